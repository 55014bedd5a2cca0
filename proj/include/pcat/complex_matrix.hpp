#pragma once

// Dense square complex matrices and the factorizations the rest of the
// library is built on: partial-pivot LU (inverse, linear solves), Cholesky
// (positive-definiteness probe) and a power-iteration 2-norm estimate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "pcat/errors.hpp"

namespace pcat {

using cplx = std::complex<double>;
using cvector = std::vector<cplx>;

class ComplexMatrix {
public:
  ComplexMatrix() = default;

  explicit ComplexMatrix(int n) : n_(n), a_(static_cast<size_t>(n) * n) {}

  static ComplexMatrix identity(int n) {
    ComplexMatrix m(n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(const cvector& d) {
    ComplexMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m(i, i) = d[static_cast<size_t>(i)];
    return m;
  }

  int dim() const { return n_; }

  cplx& operator()(int i, int j) { return a_[static_cast<size_t>(i) * n_ + j]; }
  const cplx& operator()(int i, int j) const {
    return a_[static_cast<size_t>(i) * n_ + j];
  }

  const std::vector<cplx>& data() const { return a_; }
  std::vector<cplx>& data() { return a_; }

  bool is_finite() const {
    for (const cplx& z : a_) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  double norm_frobenius() const {
    double s = 0.0;
    for (const cplx& z : a_) s += std::norm(z);
    return std::sqrt(s);
  }

  friend ComplexMatrix operator+(const ComplexMatrix& x, const ComplexMatrix& y) {
    check_same_dim(x, y, "operator+");
    ComplexMatrix r(x.n_);
    for (size_t k = 0; k < x.a_.size(); ++k) r.a_[k] = x.a_[k] + y.a_[k];
    return r;
  }

  friend ComplexMatrix operator-(const ComplexMatrix& x, const ComplexMatrix& y) {
    check_same_dim(x, y, "operator-");
    ComplexMatrix r(x.n_);
    for (size_t k = 0; k < x.a_.size(); ++k) r.a_[k] = x.a_[k] - y.a_[k];
    return r;
  }

  friend ComplexMatrix operator*(const cplx& c, const ComplexMatrix& x) {
    ComplexMatrix r(x.n_);
    for (size_t k = 0; k < x.a_.size(); ++k) r.a_[k] = c * x.a_[k];
    return r;
  }

  friend ComplexMatrix operator*(const ComplexMatrix& x, const ComplexMatrix& y) {
    check_same_dim(x, y, "operator*");
    const int n = x.n_;
    ComplexMatrix r(n);
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        const cplx xik = x(i, k);
        if (xik == 0.0) continue;
        for (int j = 0; j < n; ++j) r(i, j) += xik * y(k, j);
      }
    }
    return r;
  }

  friend cvector operator*(const ComplexMatrix& x, const cvector& v) {
    if (static_cast<int>(v.size()) != x.n_)
      throw DimensionMismatch("matrix-vector product: size mismatch");
    cvector r(v.size(), 0.0);
    for (int i = 0; i < x.n_; ++i) {
      cplx s = 0.0;
      for (int j = 0; j < x.n_; ++j) s += x(i, j) * v[static_cast<size_t>(j)];
      r[static_cast<size_t>(i)] = s;
    }
    return r;
  }

private:
  static void check_same_dim(const ComplexMatrix& x, const ComplexMatrix& y,
                             const char* op) {
    if (x.n_ != y.n_)
      throw DimensionMismatch(std::string(op) + ": dimensions differ");
  }

  int n_ = 0;
  std::vector<cplx> a_;
};

inline cplx dot_conj(const cvector& u, const cvector& v) {
  if (u.size() != v.size()) throw DimensionMismatch("dot_conj: size mismatch");
  cplx s = 0.0;
  for (size_t k = 0; k < u.size(); ++k) s += std::conj(u[k]) * v[k];
  return s;
}

inline double norm2(const cvector& v) {
  double s = 0.0;
  for (const cplx& z : v) s += std::norm(z);
  return std::sqrt(s);
}

// --- LU factorization with partial pivoting ---------------------------------

struct LuFactors {
  ComplexMatrix lu;       // packed L (unit diagonal) and U
  std::vector<int> perm;  // row permutation applied to the input
  double min_pivot = 0.0; // smallest |pivot| met during elimination

  int dim() const { return lu.dim(); }
};

// Factors A = P^T L U. Zero pivots are replaced by `pivot_floor` (if > 0)
// so that deliberately near-singular solves, e.g. inverse iteration, stay
// usable; min_pivot records the smallest true pivot for singularity tests.
inline LuFactors lu_factor(const ComplexMatrix& a, double pivot_floor = 0.0) {
  const int n = a.dim();
  LuFactors f;
  f.lu = a;
  f.perm.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) f.perm[static_cast<size_t>(i)] = i;
  f.min_pivot = std::numeric_limits<double>::infinity();

  ComplexMatrix& m = f.lu;
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(m(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(m(i, k));
      if (v > best) {
        best = v;
        piv = i;
      }
    }
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      std::swap(f.perm[static_cast<size_t>(k)], f.perm[static_cast<size_t>(piv)]);
    }
    f.min_pivot = std::min(f.min_pivot, best);
    if (best == 0.0) {
      if (pivot_floor <= 0.0) continue;  // leave the zero; solve would divide
      m(k, k) = pivot_floor;
    }
    const cplx inv_piv = 1.0 / m(k, k);
    for (int i = k + 1; i < n; ++i) {
      const cplx l = m(i, k) * inv_piv;
      m(i, k) = l;
      if (l == 0.0) continue;
      for (int j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
    }
  }
  if (n == 0) f.min_pivot = 0.0;
  return f;
}

inline cvector lu_solve(const LuFactors& f, const cvector& b) {
  const int n = f.dim();
  if (static_cast<int>(b.size()) != n)
    throw DimensionMismatch("lu_solve: size mismatch");
  cvector x(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = b[static_cast<size_t>(f.perm[static_cast<size_t>(i)])];
  // forward substitution, unit lower triangle
  for (int i = 0; i < n; ++i) {
    cplx s = x[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) s -= f.lu(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = s;
  }
  // back substitution
  for (int i = n - 1; i >= 0; --i) {
    cplx s = x[static_cast<size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= f.lu(i, j) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = s / f.lu(i, i);
  }
  return x;
}

// Solves A^H x = b using the factorization of A.
inline cvector lu_solve_adjoint(const LuFactors& f, const cvector& b) {
  const int n = f.dim();
  if (static_cast<int>(b.size()) != n)
    throw DimensionMismatch("lu_solve_adjoint: size mismatch");
  cvector x = b;
  // U^H y = b (U^H is lower triangular)
  for (int i = 0; i < n; ++i) {
    cplx s = x[static_cast<size_t>(i)];
    for (int j = 0; j < i; ++j) s -= std::conj(f.lu(j, i)) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = s / std::conj(f.lu(i, i));
  }
  // L^H z = y (unit upper triangular)
  for (int i = n - 1; i >= 0; --i) {
    cplx s = x[static_cast<size_t>(i)];
    for (int j = i + 1; j < n; ++j) s -= std::conj(f.lu(j, i)) * x[static_cast<size_t>(j)];
    x[static_cast<size_t>(i)] = s;
  }
  // undo the row permutation (P^T on the adjoint side acts on the result)
  cvector r(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) r[static_cast<size_t>(f.perm[static_cast<size_t>(i)])] = x[static_cast<size_t>(i)];
  return r;
}

// Relative pivot threshold below which a matrix is reported singular.
inline constexpr double kSingularRelTol = 1e-12;

inline ComplexMatrix mat_inverse(const ComplexMatrix& a,
                                 double rel_tol = kSingularRelTol) {
  const int n = a.dim();
  const double scale = a.norm_frobenius();
  LuFactors f = lu_factor(a);
  if (n == 0 || f.min_pivot < rel_tol * scale || !(f.min_pivot > 0.0))
    throw Singular("mat_inverse: pivot below " + std::to_string(rel_tol) +
                   " * ||A||_F");
  ComplexMatrix inv(n);
  cvector e(static_cast<size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    e[static_cast<size_t>(j)] = 1.0;
    cvector col = lu_solve(f, e);
    e[static_cast<size_t>(j)] = 0.0;
    for (int i = 0; i < n; ++i) inv(i, j) = col[static_cast<size_t>(i)];
  }
  return inv;
}

// --- spectral-norm estimate and condition number -----------------------------

// Power iteration on A^H A with a fixed start vector; accurate enough for
// diagnostics, and deterministic.
inline double operator_norm_2(const ComplexMatrix& a, int max_iter = 100) {
  const int n = a.dim();
  if (n == 0) return 0.0;
  cvector u(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    u[static_cast<size_t>(i)] = 1.0 + static_cast<double>(i) / n;
  double nu = norm2(u);
  for (cplx& z : u) z /= nu;
  double sigma = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    cvector w = a * u;
    const double s = norm2(w);
    if (s == 0.0) return 0.0;
    // w <- A^H (A u)
    cvector v(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      const cplx wi = w[static_cast<size_t>(i)];
      for (int j = 0; j < n; ++j)
        v[static_cast<size_t>(j)] += std::conj(a(i, j)) * wi;
    }
    const double nv = norm2(v);
    const double sigma_new = std::sqrt(nv);
    for (size_t k = 0; k < v.size(); ++k) u[k] = v[k] / nv;
    if (std::abs(sigma_new - sigma) <= 1e-12 * sigma_new) return sigma_new;
    sigma = sigma_new;
  }
  return sigma;
}

// sigma_min via power iteration on (A^H A)^{-1} using an existing LU of A.
inline double smallest_singular_value(const LuFactors& f, int max_iter = 100) {
  const int n = f.dim();
  if (n == 0) return 0.0;
  cvector u(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    u[static_cast<size_t>(i)] = 1.0 + static_cast<double>(i) / n;
  double nu = norm2(u);
  for (cplx& z : u) z /= nu;
  double rho = 0.0;  // dominant eigenvalue of (A^H A)^{-1}
  for (int it = 0; it < max_iter; ++it) {
    cvector w = lu_solve_adjoint(f, u);
    cvector v = lu_solve(f, w);
    const double nv = norm2(v);
    if (!(nv > 0.0) || !std::isfinite(nv)) return 0.0;
    const double rho_new = nv;
    for (size_t k = 0; k < v.size(); ++k) u[k] = v[k] / nv;
    if (std::abs(rho_new - rho) <= 1e-12 * rho_new)
      return 1.0 / std::sqrt(rho_new);
    rho = rho_new;
  }
  return rho > 0.0 ? 1.0 / std::sqrt(rho) : 0.0;
}

// --- Cholesky ----------------------------------------------------------------

// Attempts the L L^H factorization of a Hermitian matrix. Returns false when
// a diagonal pivot fails to be strictly positive, i.e. the matrix is not
// positive definite.
inline bool cholesky_is_positive_definite(const ComplexMatrix& a) {
  const int n = a.dim();
  ComplexMatrix l(n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (int k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double lj = std::sqrt(d);
    l(j, j) = lj;
    for (int i = j + 1; i < n; ++i) {
      cplx s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / lj;
    }
  }
  return true;
}

}  // namespace pcat
