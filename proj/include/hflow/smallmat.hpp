#pragma once

#include <functional>

#include "hflow/common.hpp"

namespace hflow {

// Dense row-major square matrix sized for desk-scale problems (n <= 8 or so).
struct Mat {
  int n = 0;
  Vec a;

  Mat() = default;
  explicit Mat(int nn, double fill = 0.0) : n(nn), a(static_cast<size_t>(nn) * nn, fill) {}
  Mat(int nn, Vec data) : n(nn), a(std::move(data)) {
    if (static_cast<int>(a.size()) != n * n) throw InvalidInput("Mat: data size does not match order");
  }

  static Mat identity(int n);

  double& at(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }
};

Mat mul(const Mat& A, const Mat& B);
Mat transpose(const Mat& A);
Vec mul_vec(const Mat& A, const Vec& x);
Mat symmetrized(const Mat& A);
double frob_norm(const Mat& A);
double max_abs_diff(const Mat& A, const Mat& B);

struct EigSym {
  Vec values;   // ascending
  Mat vectors;  // columns are eigenvectors, A = V diag(values) V^T
};

// Cyclic Jacobi rotations for symmetric matrices; off-diagonal threshold is
// relative to the Frobenius norm of the input.
EigSym jacobi_eigen(const Mat& A, double tol = 1e-13, int max_sweeps = 100);

Mat sym_func(const Mat& A, const std::function<double(double)>& fn);
Mat spd_sqrt(const Mat& A);
Mat spd_inv_sqrt(const Mat& A);
Mat sym_exp(const Mat& S);
Mat spd_log(const Mat& A);
Mat spd_pow(const Mat& A, double t);

// Throws DomainError with an eigenvalue report when A is not positive definite.
void require_pd(const Mat& A, const std::string& what);

double det(const Mat& A);
bool is_invertible(const Mat& A, double rel_tol = 1e-12);
Mat inverse(const Mat& A);

}  // namespace hflow
