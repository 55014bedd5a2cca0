#pragma once

// Future-included dynamics in eigenbasis coordinates. The past state |A(t)>
// evolves under H, the future state |B(t)> under the Q-adjoint of H, which
// in eigenbasis coordinates means
//   a_i(t) = a_i(T_A) e^{-i lambda_i (t - T_A)/hbar}
//   b_i(t) = b_i(T_B) e^{-i conj(lambda_i) (t - T_B)/hbar}.
// The transition amplitude <B(t)|_Q A(t)> = sum_i conj(b_i(t)) a_i(t) is
// conserved in t; its modulus is bounded by e^{B_max T/hbar} for Q-normalized
// states, and maximize_states constructs a pair attaining the bound.

#include <cmath>
#include <optional>
#include <vector>

#include "pcat/complex_matrix.hpp"
#include "pcat/dominant.hpp"
#include "pcat/eig.hpp"
#include "pcat/errors.hpp"

namespace pcat {

struct StatePair {
  cvector a;      // coefficients of |A(T_A)> in the eigenbasis
  cvector b;      // coefficients of |B(T_B)> in the eigenbasis
  double T_A = 0.0;
  double T_B = 0.0;
};

inline constexpr double kVanishingDenominatorTol = 1e-12;

// Coefficients of both states propagated to time t in [T_A, T_B].
inline StatePair evolve_pair(const SpectralData& s, const StatePair& pair,
                             double t, double hbar) {
  const int n = s.dim();
  if (static_cast<int>(pair.a.size()) != n || static_cast<int>(pair.b.size()) != n)
    throw DimensionMismatch("evolve_pair: coefficient dimensions");
  if (t < pair.T_A || t > pair.T_B)
    throw TimeOutOfRange("evolve_pair: t outside [T_A, T_B]");
  StatePair out = pair;
  const cplx mi(0.0, -1.0);
  for (int i = 0; i < n; ++i) {
    const cplx lam = s.eigenvalues[static_cast<size_t>(i)];
    out.a[static_cast<size_t>(i)] =
        pair.a[static_cast<size_t>(i)] * std::exp(mi * lam * ((t - pair.T_A) / hbar));
    out.b[static_cast<size_t>(i)] =
        pair.b[static_cast<size_t>(i)] *
        std::exp(mi * std::conj(lam) * ((t - pair.T_B) / hbar));
  }
  return out;
}

// <B(t)|_Q A(t)>, t-independent; evaluated from the boundary data directly:
// sum_i conj(b_i(T_B)) a_i(T_A) e^{-i lambda_i (T_B - T_A)/hbar}.
inline cplx transition_amplitude(const SpectralData& s, const StatePair& pair,
                                 double hbar) {
  const int n = s.dim();
  if (static_cast<int>(pair.a.size()) != n || static_cast<int>(pair.b.size()) != n)
    throw DimensionMismatch("transition_amplitude: coefficient dimensions");
  const double big_t = pair.T_B - pair.T_A;
  const cplx mi(0.0, -1.0);
  cplx amp = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx lam = s.eigenvalues[static_cast<size_t>(i)];
    amp += std::conj(pair.b[static_cast<size_t>(i)]) * pair.a[static_cast<size_t>(i)] *
           std::exp(mi * lam * (big_t / hbar));
  }
  return amp;
}

// The maximizing pair of the transition-amplitude modulus: support exactly on
// the dominant subset, |a_i(T_A)| = |b_i(T_B)| = sqrt(w_i), and the phase
// combination Theta_i = theta_{a_i} - theta_{b_i} - T Re(lambda_i)/hbar held
// at the common value theta_c. Convention: theta_{b_i} = 0. The resulting
// modulus is e^{B_max T/hbar}.
inline StatePair maximize_states(const SpectralData& s, double big_t, double hbar,
                                 const std::optional<std::vector<double>>& weights = std::nullopt,
                                 double theta_c = 0.0,
                                 double tol_deg = kDefaultDegTol) {
  if (!(big_t > 0.0)) throw TimeOutOfRange("maximize_states: T must be > 0");
  const DominantSubset sub = dominant_subset(s, tol_deg);
  const size_t m = static_cast<size_t>(sub.size());
  if (m == 0) throw Error("EmptySubset", "maximize_states: empty subset");

  std::vector<double> w;
  if (weights) {
    if (weights->size() != m)
      throw DimensionMismatch("maximize_states: weights must be indexed by the subset");
    double total = 0.0;
    for (double x : *weights) {
      if (!(x > 0.0))
        throw std::invalid_argument("maximize_states: weights must be positive");
      total += x;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw std::invalid_argument("maximize_states: weights must sum to 1");
    w = *weights;
  } else {
    w.assign(m, 1.0 / static_cast<double>(m));
  }

  StatePair pair;
  pair.T_A = 0.0;
  pair.T_B = big_t;
  pair.a.assign(static_cast<size_t>(s.dim()), 0.0);
  pair.b.assign(static_cast<size_t>(s.dim()), 0.0);
  for (size_t k = 0; k < m; ++k) {
    const int i = sub.indices[k];
    const double amp = std::sqrt(w[k]);
    const double re_lam = s.eigenvalues[static_cast<size_t>(i)].real();
    const double theta_a = theta_c + big_t * re_lam / hbar;
    pair.a[static_cast<size_t>(i)] = amp * std::exp(cplx(0.0, theta_a));
    pair.b[static_cast<size_t>(i)] = amp;
  }
  return pair;
}

// Normalized matrix element (the weak value under I_Q):
//   <B(t)|_Q O |A(t)> / <B(t)|_Q A(t)>
// with the numerator evaluated through eigenbasis coordinates of O.
inline cplx weak_value(const ComplexMatrix& o, const SpectralData& s,
                       const StatePair& pair, double t, double hbar) {
  const int n = s.dim();
  if (o.dim() != n) throw DimensionMismatch("weak_value: operator dimension");
  const StatePair at_t = evolve_pair(s, pair, t, hbar);

  const ComplexMatrix o_eig = s.Pinv * o * s.P;
  cplx num = 0.0;
  for (int i = 0; i < n; ++i) {
    cplx row = 0.0;
    for (int j = 0; j < n; ++j) row += o_eig(i, j) * at_t.a[static_cast<size_t>(j)];
    num += std::conj(at_t.b[static_cast<size_t>(i)]) * row;
  }
  cplx den = 0.0;
  for (int i = 0; i < n; ++i)
    den += std::conj(at_t.b[static_cast<size_t>(i)]) * at_t.a[static_cast<size_t>(i)];

  const double floor = kVanishingDenominatorTol * norm2(at_t.a) * norm2(at_t.b);
  if (std::abs(den) < floor)
    throw VanishingDenominator("weak_value: orthogonal state pair");
  return num / den;
}

// Q-Hermitian part of H reconstructed from the spectral data:
// P diag(Re lambda) P^{-1}.
inline ComplexMatrix q_hermitian_hamiltonian(const SpectralData& s) {
  const int n = s.dim();
  ComplexMatrix re_d(n);
  for (int i = 0; i < n; ++i) re_d(i, i) = s.eigenvalues[static_cast<size_t>(i)].real();
  return s.P * re_d * s.Pinv;
}

// | d/dt <O> - (i/hbar) <[H_Qh, O]> | with the time derivative taken by a
// centered difference of the weak value; O(dt^2) for smooth inputs.
inline double heisenberg_residual(const ComplexMatrix& o, const SpectralData& s,
                                  const StatePair& pair, double t, double dt,
                                  double hbar) {
  if (!(dt > 0.0)) throw std::invalid_argument("heisenberg_residual: dt must be > 0");
  const cplx w_plus = weak_value(o, s, pair, t + dt, hbar);
  const cplx w_minus = weak_value(o, s, pair, t - dt, hbar);
  const cplx deriv_fd = (w_plus - w_minus) / (2.0 * dt);

  const ComplexMatrix h_qh = q_hermitian_hamiltonian(s);
  const ComplexMatrix comm = h_qh * o - o * h_qh;
  const cplx deriv_heis = cplx(0.0, 1.0 / hbar) * weak_value(comm, s, pair, t, hbar);
  return std::abs(deriv_fd - deriv_heis);
}

}  // namespace pcat
