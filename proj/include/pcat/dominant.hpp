#pragma once

// The dominant subset A: indices of eigenvalues whose imaginary part attains
// the maximum B_max. Those terms dominate e^{-iHt/hbar} at large t.

#include <limits>
#include <vector>

#include "pcat/eig.hpp"

namespace pcat {

struct DominantSubset {
  std::vector<int> indices;  // members of A in eigenvalue-sort order
  double B_max = 0.0;        // max_i Im lambda_i
  double gap = 0.0;          // B_max minus the next-largest Im; +inf if none

  int size() const { return static_cast<int>(indices.size()); }
};

inline constexpr double kDefaultDegTol = 1e-9;

inline DominantSubset dominant_subset(const SpectralData& s,
                                      double tol_deg = kDefaultDegTol) {
  DominantSubset a;
  if (s.eigenvalues.empty()) return a;
  a.B_max = s.eigenvalues.front().imag();
  for (const cplx& lam : s.eigenvalues) a.B_max = std::max(a.B_max, lam.imag());
  const double window = tol_deg * (1.0 + std::abs(a.B_max));
  a.gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.dim(); ++i) {
    const double below = a.B_max - s.eigenvalues[static_cast<size_t>(i)].imag();
    if (below <= window)
      a.indices.push_back(i);
    else
      a.gap = std::min(a.gap, below);
  }
  return a;
}

}  // namespace pcat
