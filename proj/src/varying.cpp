#include "hflow/common.hpp"
