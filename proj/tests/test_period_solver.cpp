#include <catch2/catch.hpp>

#include <numbers>

#include "pcat/period_solver.hpp"
#include "gcd_chain_oracle.hpp"
#include "test_support.hpp"

using namespace pcat;
using pcat_test::Rng;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> commensurate_alphas(Rng& rng, int count, int max_den) {
  const int q = rng.uniform_int(1, max_den);
  std::vector<int> z;
  while (static_cast<int>(z.size()) < count) {
    const int v = rng.uniform_int(-12, 12);
    bool dup = false;
    for (int w : z) dup = dup || w == v;
    if (!dup) z.push_back(v);
  }
  std::sort(z.begin(), z.end());
  std::vector<double> alphas;
  for (int v : z) alphas.push_back(static_cast<double>(v) / q);
  return alphas;
}

}  // namespace

TEST_CASE("best_rational recovers exact small rationals") {
  const RationalApprox r = best_rational(0.75, 100);
  REQUIRE(r.num == 3);
  REQUIRE(r.den == 4);
  REQUIRE(r.error == 0.0);
}

TEST_CASE("best_rational finds the classic 1/sqrt(2) convergent") {
  const double x = 1.0 / std::sqrt(2.0);
  const RationalApprox r = best_rational(x, 100);
  REQUIRE(r.num == 70);
  REQUIRE(r.den == 99);
  REQUIRE(std::abs(Fraction(r.num, r.den).to_double() - x) < 1e-4);
}

TEST_CASE("rationalize_spacings on integer spacings is exact") {
  const RationalSpacing rs = rationalize_spacings({1.0, 2.0, 3.0});
  REQUIRE(rs.ratios.size() == 1);
  REQUIRE(rs.ratios[0].num == 1);
  REQUIRE(rs.ratios[0].den == 1);
  REQUIRE(rs.approx_error == 0.0);
}

TEST_CASE("rationalize_spacings approximates an irrational ratio") {
  const RationalSpacing rs =
      rationalize_spacings({0.0, 1.0, 1.0 + std::sqrt(2.0)}, 100, 1e-3);
  REQUIRE(rs.ratios.size() == 1);
  REQUIRE(rs.ratios[0].num == 70);
  REQUIRE(rs.ratios[0].den == 99);
  REQUIRE(rs.approx_error > 0.0);
  REQUIRE(rs.approx_error < 1e-3);
}

TEST_CASE("rationalize_spacings fails under a hostile denominator bound") {
  REQUIRE_THROWS_AS(
      rationalize_spacings({0.0, 1.0, 1.0 + std::sqrt(2.0)}, 10, 1e-9),
      ApproximationFailure);
}

TEST_CASE("order-2 pair needs no internal ratio") {
  REQUIRE_NOTHROW(rationalize_spacings({1.0, 2.0}, 10));
}

TEST_CASE("solve_order2 worked instance alpha = (1, 2)") {
  const auto cands = solve_order2(1.0, 2.0, kTwoPi);
  REQUIRE_FALSE(cands.empty());
  REQUIRE(cands[0].t_p == Approx(kTwoPi).epsilon(1e-13));
  REQUIRE(cands[0].m == std::vector<long long>{1, 2});
  REQUIRE(cands[0].C == Approx(0.0).margin(1e-10));
  for (size_t i = 1; i < cands.size(); ++i)
    REQUIRE(cands[i].t_p > cands[i - 1].t_p);
}

TEST_CASE("solve_order2 worked instance alpha = (1, 3/2)") {
  const auto cands = solve_order2(1.0, 1.5, kTwoPi);
  REQUIRE(cands[0].t_p == Approx(4.0 * kPi).epsilon(1e-13));
  REQUIRE(cands[0].m == std::vector<long long>{2, 3});
  REQUIRE(cands[0].C == Approx(0.0).margin(1e-10));
}

TEST_CASE("solve_order2 with alpha_1 = 0 gives the pure harmonics") {
  const auto cands = solve_order2(0.0, 1.0, kTwoPi);
  REQUIRE(cands.size() >= 3);
  for (size_t k = 0; k < 3; ++k) {
    REQUIRE(cands[k].t_p == Approx(kTwoPi * static_cast<double>(k + 1)));
    REQUIRE(cands[k].C == Approx(0.0).margin(1e-10));
    REQUIRE(cands[k].m[0] == 0);
  }
}

TEST_CASE("solve_general worked instance alpha = (1, 2, 3)") {
  const RationalSpacing rs = rationalize_spacings({1.0, 2.0, 3.0});
  const auto cands = solve_general(rs, kTwoPi);
  REQUIRE(cands[0].t_p == Approx(kTwoPi).epsilon(1e-13));
  REQUIRE(cands[0].m == std::vector<long long>{1, 2, 3});
  REQUIRE(cands[0].C == Approx(0.0).margin(1e-10));
}

TEST_CASE("solve_general worked instance alpha = (1, 2, 4)") {
  const RationalSpacing rs = rationalize_spacings({1.0, 2.0, 4.0});
  const auto cands = solve_general(rs, kTwoPi);
  REQUIRE(cands[0].t_p == Approx(kTwoPi).epsilon(1e-13));
  REQUIRE(cands[0].m == std::vector<long long>{1, 2, 4});
  REQUIRE(cands[0].C == Approx(0.0).margin(1e-10));
}

TEST_CASE("solve_general worked instance alpha = (1/2, 1, 2)") {
  const RationalSpacing rs = rationalize_spacings({0.5, 1.0, 2.0});
  const auto cands = solve_general(rs, kTwoPi);
  REQUIRE(cands[0].t_p == Approx(4.0 * kPi).epsilon(1e-13));
  REQUIRE(cands[0].m == std::vector<long long>{1, 2, 4});
  REQUIRE(cands[0].C == Approx(0.0).margin(1e-10));
}

TEST_CASE("order-2 residue agrees with the closed form h(a1 m2 - a2 m1)/(a2 - a1)") {
  Rng rng(135);
  for (int trial = 0; trial < 25; ++trial) {
    const double a1 = rng.range(-3.0, 3.0);
    const double a2 = a1 + rng.range(0.2, 3.0);
    std::vector<PeriodCandidate> cands;
    try {
      cands = solve_order2(a1, a2, kTwoPi);
    } catch (const EmptyWithinBounds&) {
      continue;
    }
    for (size_t k = 0; k < std::min<size_t>(cands.size(), 5); ++k) {
      const PeriodCandidate& c = cands[k];
      double closed = kTwoPi * (a1 * static_cast<double>(c.m[1]) -
                                a2 * static_cast<double>(c.m[0])) /
                      (a2 - a1);
      closed = std::fmod(closed, kTwoPi);
      if (closed < 0.0) closed += kTwoPi;
      if (kTwoPi - closed < 1e-9) closed = 0.0;
      REQUIRE(c.C == Approx(closed).margin(1e-8 * (1.0 + std::abs(a1 * c.t_p))));
    }
  }
}

TEST_CASE("solve_general restricted to order 2 matches solve_order2 exactly") {
  Rng rng(139);
  for (int trial = 0; trial < 20; ++trial) {
    const std::vector<double> alphas = commensurate_alphas(rng, 2, 12);
    const RationalSpacing rs = rationalize_spacings(alphas);
    const auto a = solve_general(rs, kTwoPi);
    const auto b = solve_order2(alphas[0], alphas[1], kTwoPi);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      REQUIRE(a[i].m == b[i].m);
      REQUIRE(a[i].t_p == b[i].t_p);
    }
  }
}

TEST_CASE("every emitted candidate passes the certificate check") {
  Rng rng(149);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = rng.uniform_int(2, 6);
    const std::vector<double> alphas = commensurate_alphas(rng, n, 12);
    const RationalSpacing rs = rationalize_spacings(alphas);
    std::vector<PeriodCandidate> cands;
    try {
      cands = solve_general(rs, kTwoPi);
    } catch (const EmptyWithinBounds&) {
      continue;
    }
    const double tol = 10.0 * rs.approx_error + 1e-12;
    for (const PeriodCandidate& c : cands) {
      const AlignmentCheck chk = verify_alignment(alphas, c.t_p, kTwoPi, tol);
      REQUIRE(chk.aligned);
      // certificate identity alpha_i t_p - h m_i = C, to rationalization error
      for (size_t i = 0; i < alphas.size(); ++i) {
        const double resid = alphas[i] * c.t_p - kTwoPi * static_cast<double>(c.m[i]);
        double diff = std::fmod(resid - c.C, kTwoPi);
        if (diff > kPi) diff -= kTwoPi;
        if (diff < -kPi) diff += kTwoPi;
        REQUIRE(std::abs(resid - c.C) <= (10.0 * rs.approx_error + 1e-9) *
                                             (1.0 + std::abs(alphas[i] * c.t_p)));
        REQUIRE(std::abs(diff) < 1e-6);
      }
      REQUIRE(c.C >= 0.0);
      REQUIRE(c.C < kTwoPi);
      for (size_t i = 1; i < c.m.size(); ++i) REQUIRE(c.m[i] > c.m[i - 1]);
    }
    for (size_t i = 1; i < cands.size(); ++i)
      REQUIRE(cands[i].t_p > cands[i - 1].t_p);
  }
}

TEST_CASE("gcd-chain certificates land inside the production lattice") {
  Rng rng(151);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = rng.uniform_int(3, 5);
    const std::vector<double> alphas = commensurate_alphas(rng, n, 6);
    const RationalSpacing rs = rationalize_spacings(alphas);
    const auto cands = solve_general(rs, kTwoPi);

    const pcat_test::ChainRatios cr = pcat_test::chain_ratios(alphas);
    pcat_test::ChainCertificate cert;
    try {
      const BigInt l0 = pcat_test::minimal_chain_scale(cr);
      cert = n == 3 ? pcat_test::order3_chain(cr, l0)
                    : pcat_test::order45_chain(cr, l0);
    } catch (const std::runtime_error&) {
      continue;  // chain not applicable to this draw
    }

    // the chain's difference vector is an integer multiple of the primitive one
    std::vector<BigInt> prod_diffs(cands[0].m.size() - 1);
    for (size_t i = 0; i + 1 < cands[0].m.size(); ++i)
      prod_diffs[i] = BigInt(cands[0].m[i + 1] - cands[0].m[i]);
    REQUIRE(cert.diffs.size() == prod_diffs.size());
    const BigInt mult = cert.diffs[0] / prod_diffs[0];
    REQUIRE(mult >= 1);
    for (size_t i = 0; i < prod_diffs.size(); ++i)
      REQUIRE(cert.diffs[i] == mult * prod_diffs[i]);

    // and the chain's period is aligned
    BigInt d1 = cert.diffs[0];
    const double t_chain =
        kTwoPi * d1.convert_to<double>() / (alphas[1] - alphas[0]);
    REQUIRE(verify_alignment(alphas, t_chain, kTwoPi, 1e-9).aligned);
    ++compared;
  }
  REQUIRE(compared >= 40);
}

TEST_CASE("order-3 gcd chain with minimal scale matches production exactly") {
  // for order 3 the chain is always primitive: gcd(n2, d1) = d1
  Rng rng(157);
  for (int trial = 0; trial < 25; ++trial) {
    const std::vector<double> alphas = commensurate_alphas(rng, 3, 8);
    const RationalSpacing rs = rationalize_spacings(alphas);
    const auto cands = solve_general(rs, kTwoPi);
    const pcat_test::ChainRatios cr = pcat_test::chain_ratios(alphas);
    const pcat_test::ChainCertificate cert = pcat_test::order3_chain(cr, 1);
    REQUIRE(cert.diffs[0] == BigInt(cands[0].m[1] - cands[0].m[0]));
    REQUIRE(cert.diffs[1] == BigInt(cands[0].m[2] - cands[0].m[1]));
  }
}

TEST_CASE("incommensurate spectra yield approximate but usable candidates") {
  // spacing ratio 1/sqrt(2): rationalized to 70/99 under a denominator bound
  const std::vector<double> alphas{0.0, 1.0, 1.0 + std::sqrt(2.0)};
  const RationalSpacing rs = rationalize_spacings(alphas, 100, 1e-3);
  REQUIRE(rs.approx_error > 1e-6);

  EnumerationBounds bounds;
  bounds.max_candidates = 4;
  const auto cands = solve_general(rs, kTwoPi, bounds);
  REQUIRE_FALSE(cands.empty());
  // the lattice period is h * 70 / s_1
  REQUIRE(cands[0].t_p == Approx(70.0 * kTwoPi).epsilon(1e-12));
  // aligned to the rationalization error, scaled by the phase magnitude
  const double spread =
      verify_alignment(alphas, cands[0].t_p, kTwoPi, 1.0).spread;
  REQUIRE(spread / kTwoPi < 200.0 * rs.approx_error);
  REQUIRE(spread / kTwoPi > 1e-6);  // genuinely approximate, not exact

  // the alignment quality is still near the n^2 ceiling, and the exact scan
  // over the same horizon confirms no dramatically better period below
  SpectralData s;
  for (double a : alphas) s.eigenvalues.push_back(cplx(a, 0.0));
  s.P = ComplexMatrix::identity(3);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  const double f_cand = amplitude_modulus_sq(s, cands[0].t_p, 1.0);
  REQUIRE(f_cand > 0.98 * 9.0);
  const ScanResult scan = scan_oracle(s, 1.0, 1.02 * cands[0].t_p, 20000);
  REQUIRE(scan.argmax_f >= f_cand - 1e-9);
  REQUIRE(scan.argmax_f <= 9.0 + 1e-9);
}

TEST_CASE("select_period damps larger periods away for B < 0") {
  auto cands = solve_order2(1.0, 2.0, kTwoPi);
  const SelectedPeriod sel = select_period(cands, -0.01, 1.0);
  REQUIRE(sel.candidate.t_p == Approx(kTwoPi));
  REQUIRE_FALSE(sel.degenerate_maxima);
  REQUIRE(sel.candidate.damped_f ==
          Approx(sel.candidate.f_value * std::exp(-0.02 * kTwoPi)));
}

TEST_CASE("select_period flags the degenerate B = 0 family") {
  auto cands = solve_order2(1.0, 2.0, kTwoPi);
  const SelectedPeriod sel = select_period(cands, 0.0, 1.0);
  REQUIRE(sel.candidate.t_p == Approx(kTwoPi));
  REQUIRE(sel.degenerate_maxima);
}

TEST_CASE("select_period rejects positive B_max") {
  auto cands = solve_order2(1.0, 2.0, kTwoPi);
  REQUIRE_THROWS_AS(select_period(cands, 0.1, 1.0), PositiveBmax);
}

TEST_CASE("verify_alignment basics") {
  const AlignmentCheck ok = verify_alignment({1.0, 2.0}, kTwoPi, kTwoPi);
  REQUIRE(ok.aligned);
  REQUIRE(ok.C == Approx(0.0).margin(1e-12));
  const AlignmentCheck bad = verify_alignment({1.0, 2.0}, kPi, kTwoPi);
  REQUIRE_FALSE(bad.aligned);
  REQUIRE(verify_alignment({1.7}, 0.3, kTwoPi).aligned);  // single residue
}

TEST_CASE("verify_alignment reports a nonzero common residue") {
  // 0.5 * 2pi = pi and 1.5 * 2pi = 3pi agree at C = pi
  const AlignmentCheck chk = verify_alignment({0.5, 1.5}, kTwoPi, kTwoPi);
  REQUIRE(chk.aligned);
  REQUIRE(chk.C == Approx(kPi).epsilon(1e-12));
}

TEST_CASE("solve_periods honors hbar through h = 2 pi hbar") {
  SpectralData s;
  s.eigenvalues = {{1.0, 0.0}, {2.0, 0.0}};
  s.P = ComplexMatrix::identity(2);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  const PeriodSolveReport rep = solve_periods(s, dominant_subset(s), 2.0);
  REQUIRE(rep.selected.candidate.t_p == Approx(2.0 * kTwoPi).epsilon(1e-12));
}

TEST_CASE("verify_alignment treats residues circularly at the wrap point") {
  const double delta = 1e-12;
  const AlignmentCheck chk =
      verify_alignment({1.0 - delta, 1.0 + delta}, kTwoPi, kTwoPi, 1e-9);
  REQUIRE(chk.aligned);
  REQUIRE(chk.C == Approx(0.0).margin(1e-9));
}

TEST_CASE("degenerate alphas merge into a shared certificate entry") {
  SpectralData s;
  s.eigenvalues = {{1.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
  s.P = ComplexMatrix::identity(3);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  const DominantSubset sub = dominant_subset(s);
  REQUIRE(sub.size() == 3);
  const PeriodSolveReport rep = solve_periods(s, sub, 1.0);
  REQUIRE(rep.alphas == std::vector<double>{1.0, 2.0});
  const std::vector<long long> full =
      expand_certificate(rep.selected.candidate, rep.group_of);
  REQUIRE(full.size() == 3);
  REQUIRE(full[0] == full[1]);  // equal alphas share the integer
  REQUIRE(full[2] > full[1]);
  REQUIRE(rep.selected.candidate.t_p == Approx(kTwoPi));
}

TEST_CASE("solve_periods reports an unconstrained period for one distinct alpha") {
  SpectralData s;
  s.eigenvalues = {{1.0, 0.0}};
  s.P = ComplexMatrix::identity(1);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  const PeriodSolveReport rep = solve_periods(s, dominant_subset(s), 1.0);
  REQUIRE(rep.unconstrained);
  REQUIRE(rep.candidates.empty());
}

TEST_CASE("solve_periods raises PositiveBmax before searching") {
  SpectralData s;
  s.eigenvalues = {{1.0, 0.1}, {2.0, 0.0}};
  s.P = ComplexMatrix::identity(2);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  REQUIRE_THROWS_AS(solve_periods(s, dominant_subset(s), 1.0), PositiveBmax);
}

TEST_CASE("tight spacings overflow the m_1 bound and report EmptyWithinBounds") {
  EnumerationBounds bounds;
  bounds.max_scale = 100;
  REQUIRE_THROWS_AS(solve_order2(1.0, 1.0 + 1e-8, kTwoPi, bounds),
                    EmptyWithinBounds);
}

TEST_CASE("scan_oracle finds the diag(1,2) argmax near 2 pi") {
  SpectralData s;
  s.eigenvalues = {{1.0, 0.0}, {2.0, 0.0}};
  s.P = ComplexMatrix::identity(2);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  const ScanResult res = scan_oracle(s, 1.0, 10.0, 1000);
  REQUIRE(res.rows.size() == 1000);
  REQUIRE_FALSE(res.flat);
  REQUIRE(std::abs(res.argmax_t - kTwoPi) <= res.resolution + 1e-9);
  REQUIRE(res.argmax_f == Approx(4.0).margin(1e-9));
}

TEST_CASE("scan_oracle reports a flat profile for a single eigenvalue") {
  SpectralData s;
  s.eigenvalues = {{1.3, 0.0}};
  s.P = ComplexMatrix::identity(1);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  const ScanResult res = scan_oracle(s, 1.0, 5.0, 100);
  REQUIRE(res.flat);
}

TEST_CASE("scan_oracle accepts a degenerate two-point grid") {
  SpectralData s;
  s.eigenvalues = {{1.0, 0.0}, {2.0, 0.0}};
  s.P = ComplexMatrix::identity(2);
  s.Pinv = s.P;
  s.cond_P = 1.0;
  REQUIRE_NOTHROW(scan_oracle(s, 1.0, 1.0, 2));
}

TEST_CASE("solver smallest period agrees with the scan argmax") {
  Rng rng(163);
  int compared = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const int n = rng.uniform_int(2, 5);
    const std::vector<double> alphas = commensurate_alphas(rng, n, 6);
    SpectralData s;
    for (double a : alphas) s.eigenvalues.push_back(cplx(a, 0.0));
    s.P = ComplexMatrix::identity(n);
    s.Pinv = s.P;
    s.cond_P = 1.0;

    const PeriodSolveReport rep = solve_periods(s, dominant_subset(s), 1.0);
    const double t_solver = rep.selected.candidate.t_p;
    if (t_solver > 600.0) continue;

    const ScanResult scan = scan_oracle(s, 1.0, 1.05 * t_solver, 8192);
    REQUIRE(std::abs(scan.argmax_t - t_solver) <= scan.resolution + 1e-9);
    ++compared;
  }
  REQUIRE(compared >= 15);
}
