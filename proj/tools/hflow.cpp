#include <cstdio>
int main(){ std::puts("hflow"); return 0; }
