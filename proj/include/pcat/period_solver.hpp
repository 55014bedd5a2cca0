#pragma once

// Constructive search for periods t_p aligning all phases:
//   alpha_i t_p = C + h m_i  for every i, with integers m_1 < ... < m_n and
//   a common constant C in [0, h), h = 2 pi hbar.
//
// The differences m_{i+1} - m_i must form an integer vector proportional to
// the spacings alpha_{i+1} - alpha_i. After rationalizing the consecutive
// spacing ratios, the primitive such vector generates every solution as an
// integer multiple l >= 1, smallest l giving the smallest period. All integer
// work is exact (arbitrary precision); conversion to floating point happens
// only at the boundary.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "pcat/dominant.hpp"
#include "pcat/eig.hpp"
#include "pcat/errors.hpp"
#include "pcat/periodic.hpp"
#include "pcat/rational.hpp"

namespace pcat {

struct RationalSpacing {
  std::vector<double> alphas;        // sorted ascending, distinct
  std::vector<Fraction> ratios;      // (alpha_i - alpha_{i-1})/(alpha_{i+1} - alpha_i)
  long long max_denominator = 0;
  double approx_error = 0.0;         // largest relative rationalization error
};

struct PeriodCandidate {
  double t_p = 0.0;
  std::vector<long long> m;   // integer certificate, one per alpha
  double C = 0.0;             // common residue in [0, h)
  double f_value = 0.0;       // alignment cosine sum over the supplied alphas
  double damped_f = 0.0;      // f_value * e^{2 B t_p / hbar}, set by select_period
};

struct EnumerationBounds {
  long long max_scale = 10000;       // largest lattice multiple enumerated
  long long max_abs_m1 = 1000000;    // |m_1| ceiling
  int max_candidates = 32;
};

struct AlignmentCheck {
  bool aligned = false;
  double C = 0.0;       // circular mean residue, in [0, h)
  double spread = 0.0;  // worst residue deviation, absolute
};

inline constexpr double kDefaultAlignTol = 1e-9;
inline constexpr double kDefaultRationalizeTol = 1e-9;
inline constexpr long long kDefaultMaxDenominator = 1000000;

// Residues alpha_i t_p mod h compared circularly (a residue just below h and
// one just above 0 agree). C is reported canonically in [0, h).
inline AlignmentCheck verify_alignment(const std::vector<double>& alphas,
                                       double t_p, double h,
                                       double tol_align = kDefaultAlignTol) {
  if (!(t_p > 0.0)) throw TimeOutOfRange("verify_alignment: t_p must be > 0");
  AlignmentCheck chk;
  if (alphas.empty()) return chk;
  auto residue = [&](double alpha) {
    double r = std::fmod(alpha * t_p, h);
    if (r < 0.0) r += h;
    return r;
  };
  const double r0 = residue(alphas.front());
  double mean_dev = 0.0;
  double worst = 0.0;
  for (double alpha : alphas) {
    double d = residue(alpha) - r0;
    if (d > 0.5 * h) d -= h;
    if (d < -0.5 * h) d += h;
    worst = std::max(worst, std::abs(d));
    mean_dev += d;
  }
  mean_dev /= static_cast<double>(alphas.size());
  chk.spread = worst;
  chk.aligned = worst <= tol_align * h;
  double c = r0 + mean_dev;
  if (c < 0.0) c += h;
  if (c >= h) c -= h;
  if (h - c <= 1e-12 * h) c = 0.0;  // canonical wrap for residues at ~h
  chk.C = c;
  return chk;
}

// Collapses near-equal values (ascending input not required) and returns the
// distinct sorted list plus, for each input, the index of its group.
struct CollapsedAlphas {
  std::vector<double> distinct;
  std::vector<int> group_of;  // per input value
};

inline CollapsedAlphas collapse_alphas(const std::vector<double>& values,
                                       double tol = 1e-9) {
  CollapsedAlphas out;
  out.group_of.assign(values.size(), -1);
  std::vector<int> order(values.size());
  for (size_t i = 0; i < values.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return values[static_cast<size_t>(x)] < values[static_cast<size_t>(y)]; });
  double scale = 0.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  const double window = tol * (1.0 + scale);
  for (int idx : order) {
    const double v = values[static_cast<size_t>(idx)];
    if (out.distinct.empty() || v - out.distinct.back() > window) out.distinct.push_back(v);
    out.group_of[static_cast<size_t>(idx)] = static_cast<int>(out.distinct.size()) - 1;
  }
  return out;
}

// Consecutive spacing ratios as bounded-denominator rationals.
inline RationalSpacing rationalize_spacings(const std::vector<double>& alphas,
                                            long long max_denominator = kDefaultMaxDenominator,
                                            double tol = kDefaultRationalizeTol) {
  if (alphas.size() < 2)
    throw std::invalid_argument("rationalize_spacings: need at least 2 alphas");
  for (size_t i = 1; i < alphas.size(); ++i)
    if (!(alphas[i] > alphas[i - 1]))
      throw std::invalid_argument("rationalize_spacings: alphas must be strictly ascending");
  RationalSpacing rs;
  rs.alphas = alphas;
  rs.max_denominator = max_denominator;
  rs.approx_error = 0.0;
  for (size_t i = 1; i + 1 < alphas.size(); ++i) {
    const double s_prev = alphas[i] - alphas[i - 1];
    const double s_next = alphas[i + 1] - alphas[i];
    const double rho = s_prev / s_next;
    const RationalApprox ra = best_rational(rho, max_denominator);
    if (ra.num <= 0)
      throw ApproximationFailure("rationalize_spacings: nonpositive ratio");
    const double rel = ra.error / rho;
    if (rel > tol)
      throw ApproximationFailure(
          "rationalize_spacings: no rational within tolerance under denominator bound");
    rs.approx_error = std::max(rs.approx_error, rel);
    rs.ratios.emplace_back(ra.num, ra.den);
  }
  return rs;
}

namespace detail {

// floor with a snap for arguments that are integers up to rounding
inline long long floor_snapped(double r, double snap = 1e-8) {
  double fl = std::floor(r);
  if (r - fl > 1.0 - snap) fl += 1.0;
  return static_cast<long long>(fl);
}

inline double alignment_cos_sum(const std::vector<double>& alphas, double t_p,
                                double h) {
  const double hbar = h / (2.0 * std::numbers::pi);
  double acc = 0.0;
  for (double am : alphas)
    for (double an : alphas) acc += std::cos((am - an) * t_p / hbar);
  return acc;
}

// Emission tolerance. A relative rationalization error epsilon misplaces the
// residue of alpha_i by up to ~epsilon * (alpha_i t_p / h) turns, and double
// rounding of the phase contributes eps * (alpha_i t_p / h); both scale with
// the phase magnitude, so the certificate tolerance is widened accordingly.
inline double emission_tol(double approx_error, const std::vector<double>& alphas,
                           double t_p, double h) {
  double max_phase = 0.0;
  for (double a : alphas) max_phase = std::max(max_phase, std::abs(a) * t_p / h);
  return 1e-12 +
         (10.0 * approx_error + 16.0 * std::numeric_limits<double>::epsilon()) *
             (1.0 + max_phase);
}

inline std::optional<PeriodCandidate> make_candidate(
    const std::vector<double>& alphas, double h, double t_p,
    const std::vector<BigInt>& prefix, const BigInt& scale_l,
    const EnumerationBounds& bounds, double approx_error) {
  const long long m1 = floor_snapped(alphas.front() * t_p / h);
  if (std::llabs(m1) > bounds.max_abs_m1) return std::nullopt;
  PeriodCandidate cand;
  cand.t_p = t_p;
  cand.m.resize(alphas.size());
  for (size_t i = 0; i < alphas.size(); ++i) {
    const BigInt mi = BigInt(m1) + scale_l * prefix[i];
    if (!fits_int64(mi)) return std::nullopt;
    cand.m[i] = mi.convert_to<long long>();
  }
  const AlignmentCheck chk =
      verify_alignment(alphas, t_p, h, emission_tol(approx_error, alphas, t_p, h));
  if (!chk.aligned) return std::nullopt;
  cand.C = chk.C;
  cand.f_value = alignment_cos_sum(alphas, t_p, h);
  cand.damped_f = cand.f_value;
  return cand;
}

}  // namespace detail

// Order-2 case: every difference m_2 - m_1 = delta >= 1 yields the aligned
// period t_p = h delta / (alpha_2 - alpha_1); m_1 is fixed by 0 <= C < h.
inline std::vector<PeriodCandidate> solve_order2(double alpha1, double alpha2,
                                                 double h,
                                                 const EnumerationBounds& bounds = {}) {
  if (!(alpha1 < alpha2))
    throw std::invalid_argument("solve_order2: alphas must be strictly ascending");
  const std::vector<double> alphas{alpha1, alpha2};
  const std::vector<BigInt> prefix{BigInt(0), BigInt(1)};
  std::vector<PeriodCandidate> out;
  for (long long delta = 1; delta <= bounds.max_scale; ++delta) {
    const double t_p = h * static_cast<double>(delta) / (alpha2 - alpha1);
    auto cand = detail::make_candidate(alphas, h, t_p, prefix, BigInt(delta),
                                       bounds, 0.0);
    if (!cand) continue;
    out.push_back(std::move(*cand));
    if (static_cast<int>(out.size()) >= bounds.max_candidates) break;
  }
  if (out.empty())
    throw EmptyWithinBounds("solve_order2: no candidate within enumeration bounds");
  return out;
}

// General order: reduce the rationalized ratio chain to the primitive integer
// difference vector, then enumerate its positive multiples.
inline std::vector<PeriodCandidate> solve_general(const RationalSpacing& spacing,
                                                  double h,
                                                  const EnumerationBounds& bounds = {}) {
  const size_t n = spacing.alphas.size();
  if (n < 2) throw std::invalid_argument("solve_general: need at least 2 alphas");
  if (n == 2)
    return solve_order2(spacing.alphas[0], spacing.alphas[1], h, bounds);

  // delta_k / delta_1 = prod_{j<=k-1} d_j / n_j from the consecutive ratios
  std::vector<Fraction> rel(n - 1);
  rel[0] = Fraction(1, 1);
  for (size_t k = 1; k < n - 1; ++k)
    rel[k] = rel[k - 1] * Fraction(spacing.ratios[k - 1].den, spacing.ratios[k - 1].num);

  BigInt lcm_den = 1;
  for (const Fraction& f : rel) lcm_den = big_lcm(lcm_den, f.den);
  std::vector<BigInt> delta(n - 1);
  BigInt g = 0;
  for (size_t k = 0; k < n - 1; ++k) {
    delta[k] = rel[k].num * (lcm_den / rel[k].den);
    g = big_gcd(g, delta[k]);
  }
  for (BigInt& d : delta) d /= g;  // primitive vector

  // the closing ratio (alpha_n - alpha_{n-1})/(alpha_n - alpha_1) is implied
  // by the chain; verify it against the data instead of consuming it
  {
    BigInt total = 0;
    for (const BigInt& d : delta) total += d;
    const double implied = delta.back().convert_to<double>() / total.convert_to<double>();
    const double actual = (spacing.alphas[n - 1] - spacing.alphas[n - 2]) /
                          (spacing.alphas[n - 1] - spacing.alphas[0]);
    if (std::abs(implied - actual) / actual >
        10.0 * spacing.approx_error + 1e-10)
      throw ApproximationFailure(
          "solve_general: rationalized ratio chain inconsistent with closing ratio");
  }

  std::vector<BigInt> prefix(n);
  prefix[0] = 0;
  for (size_t i = 1; i < n; ++i) prefix[i] = prefix[i - 1] + delta[i - 1];

  const double base_t_p =
      h * delta[0].convert_to<double>() / (spacing.alphas[1] - spacing.alphas[0]);
  std::vector<PeriodCandidate> out;
  for (long long l = 1; l <= bounds.max_scale; ++l) {
    const double t_p = base_t_p * static_cast<double>(l);
    if (!std::isfinite(t_p)) break;
    auto cand = detail::make_candidate(spacing.alphas, h, t_p, prefix, BigInt(l),
                                       bounds, spacing.approx_error);
    if (!cand) continue;
    out.push_back(std::move(*cand));
    if (static_cast<int>(out.size()) >= bounds.max_candidates) break;
  }
  if (out.empty())
    throw EmptyWithinBounds("solve_general: no candidate within enumeration bounds");
  return out;
}

struct SelectedPeriod {
  PeriodCandidate candidate;
  bool degenerate_maxima = false;  // B = 0: every aligned period ties
};

// Applies the e^{2 B t_p / hbar} damping and picks the winner. B_max > 0 is
// rejected: the trace modulus would grow without bound and no optimum exists.
inline SelectedPeriod select_period(std::vector<PeriodCandidate>& candidates,
                                    double B_max, double hbar,
                                    double b_tol = 1e-12) {
  if (candidates.empty())
    throw EmptyWithinBounds("select_period: no candidates");
  if (B_max > b_tol)
    throw PositiveBmax("select_period: B_max > 0 violates the boundedness supposition");
  const bool degenerate = std::abs(B_max) <= b_tol;
  for (PeriodCandidate& c : candidates)
    c.damped_f = c.f_value * std::exp(2.0 * B_max * c.t_p / hbar);

  size_t best = 0;
  for (size_t i = 1; i < candidates.size(); ++i) {
    if (degenerate) {
      if (candidates[i].t_p < candidates[best].t_p) best = i;
      continue;
    }
    const double fi = candidates[i].damped_f;
    const double fb = candidates[best].damped_f;
    if (fi > fb * (1.0 + 1e-12)) {
      best = i;
    } else if (fi >= fb * (1.0 - 1e-12) && candidates[i].t_p < candidates[best].t_p) {
      best = i;
    }
  }
  SelectedPeriod sel;
  sel.candidate = candidates[best];
  sel.degenerate_maxima = degenerate;
  return sel;
}

// Certificate over the original (possibly duplicated) alpha list: merged
// groups share one integer, m_i = m_{i+1} for equal alphas.
inline std::vector<long long> expand_certificate(const PeriodCandidate& cand,
                                                 const std::vector<int>& group_of) {
  std::vector<long long> full(group_of.size());
  for (size_t i = 0; i < group_of.size(); ++i)
    full[i] = cand.m[static_cast<size_t>(group_of[i])];
  return full;
}

struct PeriodSolveReport {
  std::vector<double> alphas;   // distinct sorted Re parts over the subset
  std::vector<int> group_of;    // subset member -> distinct-alpha index
  double approx_error = 0.0;
  std::vector<PeriodCandidate> candidates;
  SelectedPeriod selected;
  bool unconstrained = false;   // single distinct alpha: every period aligns
};

// Full pipeline over the dominant subset: collapse duplicate real parts,
// rationalize the spacing ratios, enumerate candidates, apply the damping
// selection. h = 2 pi hbar throughout.
inline PeriodSolveReport solve_periods(const SpectralData& s,
                                       const DominantSubset& subset, double hbar,
                                       const EnumerationBounds& bounds = {},
                                       long long max_denominator = kDefaultMaxDenominator,
                                       double rational_tol = kDefaultRationalizeTol,
                                       double collapse_tol = 1e-9,
                                       double b_tol = 1e-12) {
  PeriodSolveReport rep;
  std::vector<double> re;
  re.reserve(subset.indices.size());
  for (int i : subset.indices)
    re.push_back(s.eigenvalues[static_cast<size_t>(i)].real());
  const CollapsedAlphas col = collapse_alphas(re, collapse_tol);
  rep.alphas = col.distinct;
  rep.group_of = col.group_of;

  if (subset.B_max > b_tol)
    throw PositiveBmax("solve_periods: B_max > 0 violates the boundedness supposition");

  if (rep.alphas.size() < 2) {
    rep.unconstrained = true;
    return rep;
  }
  if (rep.alphas.size() == 2) {
    rep.candidates = solve_order2(rep.alphas[0], rep.alphas[1],
                                  2.0 * std::numbers::pi * hbar, bounds);
  } else {
    const RationalSpacing spacing =
        rationalize_spacings(rep.alphas, max_denominator, rational_tol);
    rep.approx_error = spacing.approx_error;
    rep.candidates = solve_general(spacing, 2.0 * std::numbers::pi * hbar, bounds);
  }
  rep.selected = select_period(rep.candidates, subset.B_max, hbar, b_tol);
  return rep;
}

// --- brute-force oracle -------------------------------------------------------

struct ScanRow {
  double t_p = 0.0;
  double f = 0.0;         // exact |Tr e^{-iHt/hbar}|^2
  double damped_f = 0.0;  // dominant-subset approximant of f
};

struct ScanResult {
  std::vector<ScanRow> rows;
  double argmax_t = 0.0;
  double argmax_f = 0.0;
  double resolution = 0.0;   // localization accuracy of argmax_t
  bool flat = false;
  std::vector<ScanRow> local_maxima;  // interior grid maxima above threshold
};

// Uniform grid over [0, t_max] plus golden-section refinement of the best
// interior local maximum. The t = 0 endpoint is emitted but never reported
// as the argmax: every spectrum is trivially aligned there.
inline ScanResult scan_oracle(const SpectralData& s, double hbar, double t_max,
                              int grid_points, double report_threshold = 0.5,
                              double tol_deg = kDefaultDegTol) {
  if (grid_points < 2)
    throw std::invalid_argument("scan_oracle: need at least 2 grid points");
  if (!(t_max > 0.0)) throw std::invalid_argument("scan_oracle: t_max must be > 0");

  const DominantSubset subset = dominant_subset(s, tol_deg);
  auto f_exact = [&](double t) { return amplitude_modulus_sq(s, t, hbar); };

  ScanResult res;
  res.rows.resize(static_cast<size_t>(grid_points));
  const double step = t_max / static_cast<double>(grid_points - 1);
  double f_min = std::numeric_limits<double>::infinity();
  double f_max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double t = step * i;
    ScanRow& row = res.rows[static_cast<size_t>(i)];
    row.t_p = t;
    row.f = f_exact(t);
    row.damped_f = amplitude_modulus_sq(s, t, hbar, subset);
    f_min = std::min(f_min, row.f);
    f_max = std::max(f_max, row.f);
  }

  if (f_max - f_min <= 1e-12 * std::max(std::abs(f_max), 1.0)) {
    res.flat = true;
    res.argmax_t = res.rows[1].t_p;
    res.argmax_f = res.rows[1].f;
    res.resolution = t_max;
    return res;
  }

  // interior local maxima on the grid
  int best_i = -1;
  for (int i = 1; i + 1 < grid_points; ++i) {
    const double fl = res.rows[static_cast<size_t>(i - 1)].f;
    const double fc = res.rows[static_cast<size_t>(i)].f;
    const double fr = res.rows[static_cast<size_t>(i + 1)].f;
    if (fc >= fl && fc >= fr && (fc > fl || fc > fr)) {
      res.local_maxima.push_back(res.rows[static_cast<size_t>(i)]);
      if (best_i < 0 || fc > res.rows[static_cast<size_t>(best_i)].f) best_i = i;
    }
  }
  if (best_i < 0) {
    // monotone profile: best positive grid point, refined inside its bracket
    best_i = 1;
    for (int i = 2; i < grid_points; ++i)
      if (res.rows[static_cast<size_t>(i)].f > res.rows[static_cast<size_t>(best_i)].f)
        best_i = i;
  }

  double lo = res.rows[static_cast<size_t>(std::max(best_i - 1, 0))].t_p;
  double hi_t = res.rows[static_cast<size_t>(std::min(best_i + 1, grid_points - 1))].t_p;
  const double golden_tol = 1e-10 * t_max;
  const double inv_phi = 0.6180339887498949;
  double x1 = hi_t - inv_phi * (hi_t - lo);
  double x2 = lo + inv_phi * (hi_t - lo);
  double f1 = f_exact(x1);
  double f2 = f_exact(x2);
  while (hi_t - lo > golden_tol) {
    if (f1 >= f2) {
      hi_t = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi_t - inv_phi * (hi_t - lo);
      f1 = f_exact(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi_t - lo);
      f2 = f_exact(x2);
    }
  }
  res.argmax_t = 0.5 * (lo + hi_t);
  res.argmax_f = f_exact(res.argmax_t);

  // honest localization limit: the flat top of f resolves the maximizer only
  // to ~sqrt(eps |f| / |f''|); estimate curvature from the starting bracket
  const int il = std::max(best_i - 1, 0);
  const int ir = std::min(best_i + 1, grid_points - 1);
  const double curv =
      std::abs(res.rows[static_cast<size_t>(il)].f + res.rows[static_cast<size_t>(ir)].f -
               2.0 * res.rows[static_cast<size_t>(best_i)].f) /
      (step * step);
  const double eps = std::numeric_limits<double>::epsilon();
  const double noise_floor =
      curv > 0.0
          ? 8.0 * std::sqrt(eps * std::max(std::abs(res.argmax_f), 1.0) / curv)
          : step;
  res.resolution = std::max(golden_tol, noise_floor);

  const double threshold = report_threshold * res.argmax_f;
  std::vector<ScanRow> kept;
  for (const ScanRow& r : res.local_maxima)
    if (r.f >= threshold) kept.push_back(r);
  res.local_maxima = std::move(kept);
  return res;
}

}  // namespace pcat
