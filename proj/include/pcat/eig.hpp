#pragma once

// Dense complex non-symmetric eigendecomposition: Householder reduction to
// Hessenberg form, shifted QR iteration for the eigenvalues, inverse
// iteration for the eigenvectors, then a fixed gauge and a fixed eigenvalue
// ordering so identical inputs give bit-identical output.
//
// Ordering: Im descending, then Re ascending, so the eigenvalues with the
// largest imaginary part (the dominant ones under e^{-iHt/hbar}) come first.
// Gauge: unit Euclidean norm, largest-modulus component real and positive.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pcat/complex_matrix.hpp"
#include "pcat/errors.hpp"

namespace pcat {

struct SpectralData {
  cvector eigenvalues;   // sorted: Im desc, Re asc
  ComplexMatrix P;       // columns are the eigenvectors, gauge-fixed
  ComplexMatrix Pinv;
  double cond_P = 0.0;   // 2-norm condition number of P
  std::string gauge;     // normalization convention tag

  int dim() const { return P.dim(); }
};

inline constexpr double kDefaultEigTol = 1e-10;
inline constexpr double kDefaultCondCeiling = 1e10;

namespace detail {

// Deterministic start vectors for inverse iteration (MMIX LCG).
class SplitMix {
public:
  explicit SplitMix(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ull + 1) {}

  double next_unit() {  // in [-1, 1)
    state_ = state_ * 6364136223846793005ull + 1442695040888963407ull;
    const double u = static_cast<double>(state_ >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  }

private:
  std::uint64_t state_;
};

struct Givens {
  double c = 1.0;  // real by construction
  cplx s = 0.0;
};

inline Givens make_givens(const cplx& a, const cplx& b) {
  Givens g;
  const double abs_a = std::abs(a);
  const double abs_b = std::abs(b);
  if (abs_b == 0.0) {
    g.c = 1.0;
    g.s = 0.0;
    return g;
  }
  if (abs_a == 0.0) {
    g.c = 0.0;
    g.s = std::conj(b) / abs_b;
    return g;
  }
  const double r = std::hypot(abs_a, abs_b);
  g.c = abs_a / r;
  g.s = (a / abs_a) * std::conj(b) / r;
  return g;
}

// Householder reduction to upper Hessenberg form; q accumulates the unitary
// similarity (q^H a q = hess).
inline void hessenberg_reduce(ComplexMatrix& a, ComplexMatrix& q) {
  const int n = a.dim();
  q = ComplexMatrix::identity(n);
  cvector v(static_cast<size_t>(n));
  for (int k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm += std::norm(a(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const cplx x0 = a(k + 1, k);
    const double abs_x0 = std::abs(x0);
    const cplx phase = abs_x0 > 0.0 ? x0 / abs_x0 : cplx(1.0);
    const cplx alpha = -phase * xnorm;
    double vnorm_sq = 0.0;
    for (int i = k + 1; i < n; ++i) {
      v[static_cast<size_t>(i)] = a(i, k) - (i == k + 1 ? alpha : cplx(0.0));
      vnorm_sq += std::norm(v[static_cast<size_t>(i)]);
    }
    if (vnorm_sq == 0.0) continue;
    const double tau = 2.0 / vnorm_sq;

    // A <- (I - tau v v^H) A, rows k+1..n-1
    for (int j = k; j < n; ++j) {
      cplx dot = 0.0;
      for (int i = k + 1; i < n; ++i)
        dot += std::conj(v[static_cast<size_t>(i)]) * a(i, j);
      dot *= tau;
      for (int i = k + 1; i < n; ++i) a(i, j) -= dot * v[static_cast<size_t>(i)];
    }
    // A <- A (I - tau v v^H), columns k+1..n-1
    for (int i = 0; i < n; ++i) {
      cplx dot = 0.0;
      for (int j = k + 1; j < n; ++j) dot += a(i, j) * v[static_cast<size_t>(j)];
      dot *= tau;
      for (int j = k + 1; j < n; ++j)
        a(i, j) -= dot * std::conj(v[static_cast<size_t>(j)]);
    }
    // Q <- Q (I - tau v v^H)
    for (int i = 0; i < n; ++i) {
      cplx dot = 0.0;
      for (int j = k + 1; j < n; ++j) dot += q(i, j) * v[static_cast<size_t>(j)];
      dot *= tau;
      for (int j = k + 1; j < n; ++j)
        q(i, j) -= dot * std::conj(v[static_cast<size_t>(j)]);
    }
    for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
    a(k + 1, k) = alpha;
  }
}

inline cplx wilkinson_shift(const ComplexMatrix& h, int m) {
  const cplx a = h(m - 1, m - 1);
  const cplx b = h(m - 1, m);
  const cplx c = h(m, m - 1);
  const cplx d = h(m, m);
  const cplx mid = 0.5 * (a + d);
  const cplx disc = std::sqrt(mid * mid - (a * d - b * c));
  const cplx l1 = mid + disc;
  const cplx l2 = mid - disc;
  return std::abs(l1 - d) <= std::abs(l2 - d) ? l1 : l2;
}

// Eigenvalues of an upper Hessenberg matrix by explicit-shift QR with
// deflation. h is destroyed. Throws NonDiagonalizable on non-convergence.
inline cvector hessenberg_qr_eigenvalues(ComplexMatrix h) {
  const int n = h.dim();
  cvector eig(static_cast<size_t>(n));
  if (n == 0) return eig;

  const double eps = std::numeric_limits<double>::epsilon();
  double hnorm = h.norm_frobenius();
  if (hnorm == 0.0) hnorm = 1.0;

  std::vector<Givens> rot(static_cast<size_t>(n));
  int hi = n - 1;
  int iter = 0;
  int total_iter = 0;
  const int max_total = 60 * n;

  while (hi >= 0) {
    // deflate negligible subdiagonals
    int lo = hi;
    while (lo > 0) {
      const double sub = std::abs(h(lo, lo - 1));
      double scale = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
      if (scale == 0.0) scale = hnorm;
      if (sub <= eps * scale) {
        h(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }

    if (lo == hi) {
      eig[static_cast<size_t>(hi)] = h(hi, hi);
      --hi;
      iter = 0;
      continue;
    }
    if (lo == hi - 1) {
      // 2x2 block: closed form
      const cplx a = h(lo, lo), b = h(lo, hi), c = h(hi, lo), d = h(hi, hi);
      const cplx mid = 0.5 * (a + d);
      const cplx disc = std::sqrt(mid * mid - (a * d - b * c));
      eig[static_cast<size_t>(hi)] = mid + disc;
      eig[static_cast<size_t>(lo)] = mid - disc;
      hi -= 2;
      iter = 0;
      continue;
    }

    if (++total_iter > max_total)
      throw NonDiagonalizable("eig: QR iteration failed to converge");

    cplx mu;
    if (++iter % 12 == 0) {
      // exceptional shift to break symmetric stalls
      double s = 0.75 * std::abs(h(hi, hi - 1));
      if (hi - 2 >= lo) s += 0.75 * std::abs(h(hi - 1, hi - 2));
      mu = h(hi, hi) + s;
    } else {
      mu = wilkinson_shift(h, hi);
    }

    for (int i = lo; i <= hi; ++i) h(i, i) -= mu;
    // QR by Givens on rows, window only: eigenvalues are unaffected by the
    // blocks coupling the window to the rest of the matrix.
    for (int i = lo; i < hi; ++i) {
      const Givens g = make_givens(h(i, i), h(i + 1, i));
      rot[static_cast<size_t>(i)] = g;
      for (int j = i; j <= hi; ++j) {
        const cplx t1 = h(i, j);
        const cplx t2 = h(i + 1, j);
        h(i, j) = g.c * t1 + g.s * t2;
        h(i + 1, j) = -std::conj(g.s) * t1 + g.c * t2;
      }
    }
    // RQ
    for (int i = lo; i < hi; ++i) {
      const Givens& g = rot[static_cast<size_t>(i)];
      const int top = lo;
      for (int r = top; r <= std::min(i + 1, hi); ++r) {
        const cplx t1 = h(r, i);
        const cplx t2 = h(r, i + 1);
        h(r, i) = g.c * t1 + std::conj(g.s) * t2;
        h(r, i + 1) = -g.s * t1 + g.c * t2;
      }
    }
    for (int i = lo; i <= hi; ++i) h(i, i) += mu;
  }
  return eig;
}

// O(n^2) LU of (hess - mu I) with adjacent-row pivoting, for inverse
// iteration. Zero pivots are floored so nearly exact shifts stay solvable.
struct HessShiftedLu {
  ComplexMatrix u;
  std::vector<cplx> mult;
  std::vector<char> swapped;
  int n = 0;

  HessShiftedLu(const ComplexMatrix& hess, const cplx& mu, double pivot_floor) {
    n = hess.dim();
    u = hess;
    for (int i = 0; i < n; ++i) u(i, i) -= mu;
    mult.assign(static_cast<size_t>(n), 0.0);
    swapped.assign(static_cast<size_t>(n), 0);
    for (int k = 0; k + 1 < n; ++k) {
      if (std::abs(u(k + 1, k)) > std::abs(u(k, k))) {
        swapped[static_cast<size_t>(k)] = 1;
        for (int j = k; j < n; ++j) std::swap(u(k, j), u(k + 1, j));
      }
      if (std::abs(u(k, k)) == 0.0) u(k, k) = pivot_floor;
      const cplx m = u(k + 1, k) / u(k, k);
      mult[static_cast<size_t>(k)] = m;
      u(k + 1, k) = 0.0;
      if (m != 0.0)
        for (int j = k + 1; j < n; ++j) u(k + 1, j) -= m * u(k, j);
    }
    if (n > 0 && std::abs(u(n - 1, n - 1)) == 0.0) u(n - 1, n - 1) = pivot_floor;
  }

  cvector solve(cvector b) const {
    for (int k = 0; k + 1 < n; ++k) {
      if (swapped[static_cast<size_t>(k)])
        std::swap(b[static_cast<size_t>(k)], b[static_cast<size_t>(k + 1)]);
      b[static_cast<size_t>(k + 1)] -= mult[static_cast<size_t>(k)] * b[static_cast<size_t>(k)];
    }
    for (int i = n - 1; i >= 0; --i) {
      cplx s = b[static_cast<size_t>(i)];
      for (int j = i + 1; j < n; ++j) s -= u(i, j) * b[static_cast<size_t>(j)];
      b[static_cast<size_t>(i)] = s / u(i, i);
    }
    return b;
  }
};

inline void orthogonalize_against(cvector& y, const std::vector<cvector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const cvector& w : basis) {
      const cplx proj = dot_conj(w, y);
      for (size_t k = 0; k < y.size(); ++k) y[k] -= proj * w[k];
    }
  }
}

}  // namespace detail

// Eigendecomposition H = P diag(eigenvalues) P^{-1}.
//
// Throws NonDiagonalizable when cond(P) exceeds `cond_ceiling` or the
// residual ||H P - P D||_F stays above tol_eig * ||H||_F; both are the
// operational signatures of a (near-)defective input.
inline SpectralData eig(const ComplexMatrix& h_in,
                        double tol_eig = kDefaultEigTol,
                        double cond_ceiling = kDefaultCondCeiling) {
  const int n = h_in.dim();
  if (n <= 0) throw DimensionMismatch("eig: empty matrix");
  if (!h_in.is_finite()) throw Error("InvalidInput", "eig: non-finite entries");

  const double eps = std::numeric_limits<double>::epsilon();
  const double hnorm = h_in.norm_frobenius();
  const double scale = hnorm > 0.0 ? hnorm : 1.0;

  ComplexMatrix hess = h_in;
  ComplexMatrix qacc;
  detail::hessenberg_reduce(hess, qacc);
  const cvector raw_eigs = detail::hessenberg_qr_eigenvalues(hess);

  // group (near-)identical eigenvalues so degenerate eigenspaces get an
  // orthogonalized basis instead of n copies of the same vector
  const double cluster_tol = 1e3 * eps * scale;
  std::vector<int> cluster_of(static_cast<size_t>(n), -1);
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) {
    if (cluster_of[static_cast<size_t>(i)] >= 0) continue;
    const int c = static_cast<int>(clusters.size());
    clusters.push_back({i});
    cluster_of[static_cast<size_t>(i)] = c;
    for (int j = i + 1; j < n; ++j) {
      if (cluster_of[static_cast<size_t>(j)] >= 0) continue;
      if (std::abs(raw_eigs[static_cast<size_t>(i)] - raw_eigs[static_cast<size_t>(j)]) <= cluster_tol) {
        clusters[static_cast<size_t>(c)].push_back(j);
        cluster_of[static_cast<size_t>(j)] = c;
      }
    }
  }

  const double pivot_floor = eps * scale;
  std::vector<cvector> vectors(static_cast<size_t>(n));
  for (size_t c = 0; c < clusters.size(); ++c) {
    const std::vector<int>& members = clusters[c];
    cplx mu = 0.0;
    for (int idx : members) mu += raw_eigs[static_cast<size_t>(idx)];
    mu /= static_cast<double>(members.size());

    const detail::HessShiftedLu lu(hess, mu, pivot_floor);
    std::vector<cvector> accepted;
    for (size_t m = 0; m < members.size(); ++m) {
      detail::SplitMix rng(0xC0FFEEull + 977u * static_cast<std::uint64_t>(members[m]) +
                           31u * static_cast<std::uint64_t>(c));
      cvector y(static_cast<size_t>(n));
      for (cplx& z : y) z = cplx(rng.next_unit(), rng.next_unit());
      double ny = norm2(y);
      for (cplx& z : y) z /= ny;

      const double growth_target = 0.1 / (static_cast<double>(n) * eps);
      for (int it = 0; it < 4; ++it) {
        cvector w = lu.solve(y);
        if (!accepted.empty()) detail::orthogonalize_against(w, accepted);
        const double growth = norm2(w);
        if (!(growth > 0.0) || !std::isfinite(growth)) break;
        for (cplx& z : w) z /= growth;
        y = w;
        if (growth >= growth_target) break;
      }
      if (!accepted.empty()) {
        detail::orthogonalize_against(y, accepted);
        const double nrm = norm2(y);
        if (nrm > 0.0)
          for (cplx& z : y) z /= nrm;
      }
      accepted.push_back(y);
      vectors[static_cast<size_t>(members[m])] = y;
    }
  }

  // back-transform to the original basis and fix the gauge
  ComplexMatrix p(n);
  for (int j = 0; j < n; ++j) {
    cvector v = qacc * vectors[static_cast<size_t>(j)];
    const double nv = norm2(v);
    for (cplx& z : v) z /= nv;
    int kmax = 0;
    double best = -1.0;
    for (int i = 0; i < n; ++i) {
      const double m = std::abs(v[static_cast<size_t>(i)]);
      if (m > best) {
        best = m;
        kmax = i;
      }
    }
    const cplx pivot = v[static_cast<size_t>(kmax)];
    const cplx phase = std::conj(pivot) / std::abs(pivot);
    for (cplx& z : v) z *= phase;
    for (int i = 0; i < n; ++i) p(i, j) = v[static_cast<size_t>(i)];
  }

  LuFactors plu = lu_factor(p);
  const double pnorm = p.norm_frobenius();
  if (!(plu.min_pivot > kSingularRelTol * pnorm))
    throw NonDiagonalizable("eig: eigenvector matrix numerically singular");
  ComplexMatrix pinv(n);
  {
    cvector e(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      e[static_cast<size_t>(j)] = 1.0;
      cvector col = lu_solve(plu, e);
      e[static_cast<size_t>(j)] = 0.0;
      for (int i = 0; i < n; ++i) pinv(i, j) = col[static_cast<size_t>(i)];
    }
  }

  // Biorthogonal Rayleigh correction lambda + w^H (H - lambda) v / (w^H v):
  // sharpens the QR eigenvalues to the accuracy of the vectors (downstream
  // phase alignment multiplies eigenvalue error by t_p). The residual form
  // leaves exact eigenpairs bit-exact.
  cvector refined(static_cast<size_t>(n));
  {
    const ComplexMatrix hp_raw = h_in * p;
    for (int j = 0; j < n; ++j) {
      const cplx lam = raw_eigs[static_cast<size_t>(j)];
      cplx num = 0.0, den = 0.0;
      for (int i = 0; i < n; ++i) {
        num += pinv(j, i) * (hp_raw(i, j) - lam * p(i, j));
        den += pinv(j, i) * p(i, j);
      }
      refined[static_cast<size_t>(j)] = lam + num / den;
    }
  }

  // sort eigenpairs: Im descending, then Re ascending; the raw QR values
  // carry the exact ties of structured inputs, so they drive the order
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    const cplx& a = raw_eigs[static_cast<size_t>(x)];
    const cplx& b = raw_eigs[static_cast<size_t>(y)];
    if (a.imag() != b.imag()) return a.imag() > b.imag();
    return a.real() < b.real();
  });

  SpectralData s;
  s.gauge = "unit-norm-max-real-positive";
  s.eigenvalues.resize(static_cast<size_t>(n));
  s.P = ComplexMatrix(n);
  s.Pinv = ComplexMatrix(n);
  for (int j = 0; j < n; ++j) {
    const int src = order[static_cast<size_t>(j)];
    s.eigenvalues[static_cast<size_t>(j)] = refined[static_cast<size_t>(src)];
    for (int i = 0; i < n; ++i) {
      s.P(i, j) = p(i, src);
      s.Pinv(j, i) = pinv(src, i);
    }
  }

  const double sigma_max = operator_norm_2(s.P);
  const double sigma_min = smallest_singular_value(plu);
  s.cond_P = sigma_min > 0.0 ? sigma_max / sigma_min
                             : std::numeric_limits<double>::infinity();
  if (!(s.cond_P <= cond_ceiling))
    throw NonDiagonalizable("eig: cond(P) = " + std::to_string(s.cond_P) +
                            " exceeds ceiling");

  // residual gate: defective inputs can sneak past the cond ceiling with an
  // orthogonal-but-wrong basis (e.g. an exact Jordan block)
  ComplexMatrix hp = h_in * s.P;
  double resid = 0.0;
  for (int j = 0; j < n; ++j) {
    const cplx lam = s.eigenvalues[static_cast<size_t>(j)];
    for (int i = 0; i < n; ++i) resid += std::norm(hp(i, j) - lam * s.P(i, j));
  }
  resid = std::sqrt(resid);
  if (resid > tol_eig * scale)
    throw NonDiagonalizable("eig: residual " + std::to_string(resid / scale) +
                            " above tolerance; input is (near-)defective");
  return s;
}

// Tr(e^{-i H t / hbar} O) evaluated in the eigenbasis:
//   sum_n e^{-i lambda_n t / hbar} (P^{-1} O P)_{nn}.
// Exact over the full spectrum, no dominant-subset truncation.
inline cplx trace_weighted_exp(const SpectralData& s, const ComplexMatrix& o,
                               double t, double hbar) {
  const int n = s.dim();
  if (o.dim() != n)
    throw DimensionMismatch("trace_weighted_exp: operator dimension");
  cplx total = 0.0;
  for (int k = 0; k < n; ++k) {
    // (P^{-1} O P)_{kk} = row_k(Pinv) . O . col_k(P)
    cplx elem = 0.0;
    for (int i = 0; i < n; ++i) {
      cplx row = 0.0;
      for (int j = 0; j < n; ++j) row += o(i, j) * s.P(j, k);
      elem += s.Pinv(k, i) * row;
    }
    const cplx lam = s.eigenvalues[static_cast<size_t>(k)];
    total += std::exp(cplx(0.0, -1.0) * lam * (t / hbar)) * elem;
  }
  return total;
}

// Diagonal matrix element <lambda_k|_Q O |lambda_k> = (P^{-1} O P)_{kk}.
inline cplx eigenbasis_diagonal_element(const SpectralData& s,
                                        const ComplexMatrix& o, int k) {
  const int n = s.dim();
  if (o.dim() != n)
    throw DimensionMismatch("eigenbasis_diagonal_element: operator dimension");
  cplx elem = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx row = 0.0;
    for (int j = 0; j < n; ++j) row += o(i, j) * s.P(j, k);
    elem += s.Pinv(k, i) * row;
  }
  return elem;
}

}  // namespace pcat
