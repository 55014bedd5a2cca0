#pragma once

// The modified inner product that turns a diagonalizable non-normal
// Hamiltonian into a normal one: Q = (P^dag)^{-1} P^{-1} built from the
// diagonalizer P, the inner product I_Q(u, v) = u^dag Q v, the Q-adjoint
// A^{dag_Q} = Q^{-1} A^dag Q, and the split of H into Q-Hermitian and
// anti-Q-Hermitian parts.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "pcat/complex_matrix.hpp"
#include "pcat/eig.hpp"
#include "pcat/errors.hpp"

namespace pcat {

struct QMetric {
  ComplexMatrix Q;
  ComplexMatrix Qinv;
  std::string source_gauge;

  int dim() const { return Q.dim(); }
};

// Q = (P^dag)^{-1} P^{-1} = (P^{-1})^dag P^{-1}; Q^{-1} = P P^dag. Built only
// from a SpectralData (or an explicit P below) so positive definiteness is
// structural: Q is a Gram matrix of an invertible factor.
inline QMetric build_q_metric(const SpectralData& s) {
  QMetric q;
  q.Q = s.Pinv.adjoint() * s.Pinv;
  q.Qinv = s.P * s.P.adjoint();
  q.source_gauge = s.gauge;
  return q;
}

// Test hook: build the metric from an explicitly chosen P (gauge override).
inline QMetric build_q_metric_from_p(const ComplexMatrix& p,
                                     const std::string& gauge = "explicit") {
  const ComplexMatrix pinv = mat_inverse(p);
  QMetric q;
  q.Q = pinv.adjoint() * pinv;
  q.Qinv = p * p.adjoint();
  q.source_gauge = gauge;
  return q;
}

inline cplx q_inner(const cvector& u, const cvector& v, const QMetric& q) {
  const int n = q.dim();
  if (static_cast<int>(u.size()) != n || static_cast<int>(v.size()) != n)
    throw DimensionMismatch("q_inner: vector dimensions");
  cplx s = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx row = 0.0;
    for (int j = 0; j < n; ++j) row += q.Q(i, j) * v[static_cast<size_t>(j)];
    s += std::conj(u[static_cast<size_t>(i)]) * row;
  }
  return s;
}

inline ComplexMatrix q_adjoint(const ComplexMatrix& a, const QMetric& q) {
  if (a.dim() != q.dim()) throw DimensionMismatch("q_adjoint: dimensions");
  return q.Qinv * a.adjoint() * q.Q;
}

// H = H_Qh + H_Qa with H_Qh = (H + H^{dag_Q})/2 Q-Hermitian and
// H_Qa = (H - H^{dag_Q})/2 anti-Q-Hermitian. The sum reconstructs H exactly.
inline std::pair<ComplexMatrix, ComplexMatrix> q_split(const ComplexMatrix& h,
                                                       const QMetric& q) {
  if (h.dim() != q.dim()) throw DimensionMismatch("q_split: dimensions");
  const ComplexMatrix hq = q_adjoint(h, q);
  const int n = h.dim();
  ComplexMatrix qh(n), qa(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      qh(i, j) = 0.5 * (h(i, j) + hq(i, j));
      qa(i, j) = h(i, j) - qh(i, j);
    }
  }
  return {qh, qa};
}

inline bool is_q_normal(const ComplexMatrix& h, const QMetric& q, double tol) {
  if (h.dim() != q.dim()) throw DimensionMismatch("is_q_normal: dimensions");
  const ComplexMatrix hq = q_adjoint(h, q);
  const ComplexMatrix comm = h * hq - hq * h;
  const double hn = h.norm_frobenius();
  return comm.norm_frobenius() <= tol * hn * hn;
}

// Seeded Q-Hermitian sample: symmetrize a random G as (G + G^{dag_Q})/2,
// which spans the whole Q-Hermitian space. mt19937_64 with an explicit
// bit-to-double map keeps the output identical across platforms.
inline ComplexMatrix random_q_hermitian(const QMetric& q, std::uint64_t seed,
                                        double scale = 1.0) {
  const int n = q.dim();
  std::mt19937_64 gen(seed);
  auto unit = [&gen]() {
    return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
  };
  ComplexMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = scale * cplx(unit(), unit());
  const ComplexMatrix gq = q_adjoint(g, q);
  return 0.5 * (g + gq);
}

// max_{ij} |<lambda_i|Q|lambda_j> - delta_ij| over the eigenbasis of s.
inline double biorthonormality_error(const SpectralData& s, const QMetric& q) {
  if (s.dim() != q.dim())
    throw DimensionMismatch("biorthonormality_error: dimensions");
  const ComplexMatrix b = s.P.adjoint() * q.Q * s.P;
  const int n = b.dim();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx want = i == j ? cplx(1.0) : cplx(0.0);
      worst = std::max(worst, std::abs(b(i, j) - want));
    }
  }
  return worst;
}

inline double hermiticity_error(const ComplexMatrix& a) {
  const ComplexMatrix d = a - a.adjoint();
  return d.norm_frobenius();
}

}  // namespace pcat
