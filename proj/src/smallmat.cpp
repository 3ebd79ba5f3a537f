#include "hflow/smallmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hflow {

Mat Mat::identity(int n) {
  Mat I(n);
  for (int i = 0; i < n; ++i) I.at(i, i) = 1.0;
  return I;
}

Mat mul(const Mat& A, const Mat& B) {
  if (A.n != B.n) throw InvalidInput("Mat mul: size mismatch");
  Mat C(A.n);
  for (int i = 0; i < A.n; ++i)
    for (int k = 0; k < A.n; ++k) {
      double aik = A.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < A.n; ++j) C.at(i, j) += aik * B.at(k, j);
    }
  return C;
}

Mat transpose(const Mat& A) {
  Mat T(A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) T.at(j, i) = A.at(i, j);
  return T;
}

Vec mul_vec(const Mat& A, const Vec& x) {
  if (static_cast<int>(x.size()) != A.n) throw InvalidInput("Mat mul_vec: size mismatch");
  Vec y(A.n, 0.0);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) y[i] += A.at(i, j) * x[j];
  return y;
}

Mat symmetrized(const Mat& A) {
  Mat S(A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) S.at(i, j) = 0.5 * (A.at(i, j) + A.at(j, i));
  return S;
}

double frob_norm(const Mat& A) {
  double s = 0.0;
  for (double v : A.a) s += v * v;
  return std::sqrt(s);
}

double max_abs_diff(const Mat& A, const Mat& B) {
  double m = 0.0;
  for (size_t i = 0; i < A.a.size(); ++i) m = std::max(m, std::abs(A.a[i] - B.a[i]));
  return m;
}

EigSym jacobi_eigen(const Mat& A0, double tol, int max_sweeps) {
  if (A0.n <= 0) throw InvalidInput("jacobi_eigen: empty matrix");
  Mat A = symmetrized(A0);
  const int n = A.n;
  Mat V = Mat::identity(n);
  const double scale = frob_norm(A) + 1e-300;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += sqr(A.at(p, q));
    if (std::sqrt(2.0 * off) <= tol * scale) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = A.at(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double theta = (A.at(q, q) - A.at(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);
        double app = A.at(p, p), aqq = A.at(q, q);
        A.at(p, q) = 0.0;
        A.at(q, p) = 0.0;
        A.at(p, p) = app - t * apq;
        A.at(q, q) = aqq + t * apq;
        for (int r = 0; r < n; ++r) {
          double vrp = V.at(r, p), vrq = V.at(r, q);
          V.at(r, p) = vrp - s * (vrq + tau * vrp);
          V.at(r, q) = vrq + s * (vrp - tau * vrq);
          if (r == p || r == q) continue;
          double arp = A.at(r, p), arq = A.at(r, q);
          A.at(r, p) = A.at(p, r) = arp - s * (arq + tau * arp);
          A.at(r, q) = A.at(q, r) = arq + s * (arp - tau * arq);
        }
      }
    }
  }

  EigSym e;
  e.values.resize(n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vec diag(n);
  for (int i = 0; i < n; ++i) diag[i] = A.at(i, i);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return diag[i] < diag[j]; });
  e.vectors = Mat(n);
  for (int k = 0; k < n; ++k) {
    e.values[k] = diag[order[k]];
    for (int r = 0; r < n; ++r) e.vectors.at(r, k) = V.at(r, order[k]);
  }
  return e;
}

Mat sym_func(const Mat& A, const std::function<double(double)>& fn) {
  EigSym e = jacobi_eigen(A);
  Mat D(A.n);
  for (int i = 0; i < A.n; ++i) D.at(i, i) = fn(e.values[i]);
  return symmetrized(mul(mul(e.vectors, D), transpose(e.vectors)));
}

void require_pd(const Mat& A, const std::string& what) {
  EigSym e = jacobi_eigen(A);
  if (e.values.front() <= 0.0) {
    std::ostringstream os;
    os << what << ": matrix is not positive definite, eigenvalues = [";
    for (size_t i = 0; i < e.values.size(); ++i) os << (i ? ", " : "") << e.values[i];
    os << "]";
    throw DomainError(os.str());
  }
}

namespace {
Mat spd_func_checked(const Mat& A, const std::function<double(double)>& fn, const char* what) {
  EigSym e = jacobi_eigen(A);
  if (e.values.front() <= 0.0) {
    std::ostringstream os;
    os << what << ": matrix is not positive definite, min eigenvalue = " << e.values.front();
    throw DomainError(os.str());
  }
  Mat D(A.n);
  for (int i = 0; i < A.n; ++i) D.at(i, i) = fn(e.values[i]);
  return symmetrized(mul(mul(e.vectors, D), transpose(e.vectors)));
}
}  // namespace

Mat spd_sqrt(const Mat& A) {
  return spd_func_checked(A, [](double v) { return std::sqrt(v); }, "spd_sqrt");
}

Mat spd_inv_sqrt(const Mat& A) {
  return spd_func_checked(A, [](double v) { return 1.0 / std::sqrt(v); }, "spd_inv_sqrt");
}

Mat sym_exp(const Mat& S) {
  return sym_func(S, [](double v) { return std::exp(v); });
}

Mat spd_log(const Mat& A) {
  return spd_func_checked(A, [](double v) { return std::log(v); }, "spd_log");
}

Mat spd_pow(const Mat& A, double t) {
  return spd_func_checked(A, [t](double v) { return std::pow(v, t); }, "spd_pow");
}

double det(const Mat& A0) {
  Mat A = A0;
  const int n = A.n;
  double d = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A.at(r, col)) > std::abs(A.at(piv, col))) piv = r;
    if (A.at(piv, col) == 0.0) return 0.0;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(A.at(piv, j), A.at(col, j));
      d = -d;
    }
    d *= A.at(col, col);
    for (int r = col + 1; r < n; ++r) {
      double f = A.at(r, col) / A.at(col, col);
      for (int j = col; j < n; ++j) A.at(r, j) -= f * A.at(col, j);
    }
  }
  return d;
}

bool is_invertible(const Mat& A, double rel_tol) {
  double scale = frob_norm(A);
  if (scale == 0.0) return false;
  double n = A.n;
  return std::abs(det(A)) > std::pow(rel_tol * scale / std::sqrt(n), n);
}

Mat inverse(const Mat& A0) {
  const int n = A0.n;
  Mat A = A0;
  Mat I = Mat::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(A.at(r, col)) > std::abs(A.at(piv, col))) piv = r;
    if (std::abs(A.at(piv, col)) < 1e-300) throw InvalidInput("inverse: singular matrix");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(A.at(piv, j), A.at(col, j));
        std::swap(I.at(piv, j), I.at(col, j));
      }
    double p = A.at(col, col);
    for (int j = 0; j < n; ++j) {
      A.at(col, j) /= p;
      I.at(col, j) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = A.at(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        A.at(r, j) -= f * A.at(col, j);
        I.at(r, j) -= f * I.at(col, j);
      }
    }
  }
  return I;
}

}  // namespace hflow
