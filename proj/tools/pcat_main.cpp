// pcat: command-line toolkit for non-normal Hamiltonians. Builds the
// Q-modified inner product, evaluates weak values and periodic-time
// expectation values, searches for phase-aligned periods, and scans the
// transition-modulus objective.
//
// Exit codes: 0 success, 1 verification failed, 2 usage or parse error,
// 3 domain error (NonDiagonalizable, PositiveBmax, VanishingTrace,
// EmptyWithinBounds, ApproximationFailure, ...).

#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcat/pcat.hpp"

namespace {

using nlohmann::ordered_json;
using namespace pcat;

struct Options {
  std::string hamiltonian_path;
  std::string operator_path;
  double hbar = 1.0;
  double tol_deg = kDefaultDegTol;
  double tol_eig = kDefaultEigTol;
  double tol_align = kDefaultAlignTol;
  double kappa = kDefaultKappaTheorem3;
  long long max_denominator = kDefaultMaxDenominator;
  long long max_scale = EnumerationBounds{}.max_scale;
  long long max_abs_m1 = EnumerationBounds{}.max_abs_m1;
  int max_candidates = EnumerationBounds{}.max_candidates;
  double t_max = 50.0;
  int grid_points = 1000;
  std::uint64_t seed = 1;
  std::string output_format = "json";
  bool q_hermitize = false;
  std::optional<double> t_p;
  double big_t = 1.0;

  EnumerationBounds bounds() const {
    EnumerationBounds b;
    b.max_scale = max_scale;
    b.max_abs_m1 = max_abs_m1;
    b.max_candidates = max_candidates;
    return b;
  }
};

void add_common_options(CLI::App* cmd, Options& o) {
  cmd->add_option("hamiltonian", o.hamiltonian_path,
                  "Hamiltonian JSON file {n, re, im, label?}")
      ->required();
  cmd->add_option("--hbar", o.hbar, "Planck constant over 2 pi")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-deg", o.tol_deg,
                  "degeneracy window for the dominant subset")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-eig", o.tol_eig, "eigendecomposition residual tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--tol-align", o.tol_align,
                  "phase-alignment tolerance, relative to h")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--kappa", o.kappa,
                  "smallness threshold of |B| against the Re spacings")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-denominator", o.max_denominator,
                  "denominator bound for spacing-ratio rationalization")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-scale", o.max_scale, "largest lattice multiple enumerated")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-m1", o.max_abs_m1, "|m_1| ceiling during enumeration")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--max-candidates", o.max_candidates,
                  "maximum number of period candidates emitted")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--t-max", o.t_max, "scan horizon")->check(CLI::PositiveNumber);
  cmd->add_option("--grid", o.grid_points, "scan grid points")
      ->check(CLI::Range(2, 100000000));
  cmd->add_option("--seed", o.seed, "seed for generated operators");
  cmd->add_option("--output", o.output_format, "output format")
      ->check(CLI::IsMember({"json", "csv"}));
}

ordered_json config_echo(const Options& o) {
  ordered_json j;
  j["hbar"] = o.hbar;
  j["tol_deg"] = o.tol_deg;
  j["tol_eig"] = o.tol_eig;
  j["tol_align"] = o.tol_align;
  j["kappa"] = o.kappa;
  j["max_denominator"] = o.max_denominator;
  j["max_scale"] = o.max_scale;
  j["max_m1"] = o.max_abs_m1;
  j["max_candidates"] = o.max_candidates;
  j["t_max"] = o.t_max;
  j["grid"] = o.grid_points;
  j["seed"] = o.seed;
  j["output"] = o.output_format;
  j["q_hermitize"] = o.q_hermitize;
  return j;
}

ordered_json matrix_json(const ComplexMatrix& m) {
  ordered_json re = ordered_json::array();
  ordered_json im = ordered_json::array();
  for (int i = 0; i < m.dim(); ++i) {
    ordered_json re_row = ordered_json::array();
    ordered_json im_row = ordered_json::array();
    for (int j = 0; j < m.dim(); ++j) {
      re_row.push_back(m(i, j).real());
      im_row.push_back(m(i, j).imag());
    }
    re.push_back(std::move(re_row));
    im.push_back(std::move(im_row));
  }
  return ordered_json{{"re", std::move(re)}, {"im", std::move(im)}};
}

ordered_json vector_json(const cvector& v) {
  ordered_json re = ordered_json::array();
  ordered_json im = ordered_json::array();
  for (const cplx& z : v) {
    re.push_back(z.real());
    im.push_back(z.imag());
  }
  return ordered_json{{"re", std::move(re)}, {"im", std::move(im)}};
}

ordered_json complex_json(const cplx& z) {
  return ordered_json{{"re", z.real()}, {"im", z.imag()}};
}

ordered_json subset_json(const DominantSubset& sub) {
  ordered_json j;
  j["indices"] = sub.indices;
  j["size"] = sub.size();
  j["B_max"] = sub.B_max;
  if (std::isfinite(sub.gap))
    j["gap"] = sub.gap;
  else
    j["gap"] = nullptr;
  return j;
}

void flatten_json(const ordered_json& j, const std::string& prefix,
                  std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten_json(value, prefix.empty() ? key : prefix + "." + key, out);
  } else if (j.is_array()) {
    bool scalar = true;
    for (const auto& v : j) scalar = scalar && v.is_primitive();
    if (scalar) {
      out << prefix << ",";
      for (size_t i = 0; i < j.size(); ++i)
        out << (i ? ";" : "") << j[i].dump();
      out << "\n";
    } else {
      for (size_t i = 0; i < j.size(); ++i)
        flatten_json(j[i], prefix + "[" + std::to_string(i) + "]", out);
    }
  } else {
    out << prefix << "," << j.dump() << "\n";
  }
}

void emit_report(const ordered_json& report, const Options& o) {
  if (o.output_format == "csv")
    flatten_json(report, "", std::cout);
  else
    std::cout << report.dump(2) << "\n";
}

struct LoadedProblem {
  HamiltonianFile h_file;
  SpectralData spectral;
  QMetric metric;
  DominantSubset subset;
};

LoadedProblem load_problem(const Options& o) {
  LoadedProblem p;
  p.h_file = read_hamiltonian_file(o.hamiltonian_path);
  p.spectral = eig(p.h_file.matrix, o.tol_eig);
  p.metric = build_q_metric(p.spectral);
  p.subset = dominant_subset(p.spectral, o.tol_deg);
  return p;
}

ComplexMatrix load_operator(const Options& o, const LoadedProblem& p) {
  ComplexMatrix op;
  if (o.operator_path.empty()) {
    op = random_q_hermitian(p.metric, o.seed);
  } else {
    const HamiltonianFile of = read_hamiltonian_file(o.operator_path);
    op = of.matrix;
    if (op.dim() != p.spectral.dim())
      throw DimensionMismatch("operator dimension differs from the Hamiltonian");
  }
  if (o.q_hermitize) {
    const ComplexMatrix oq = q_adjoint(op, p.metric);
    op = 0.5 * (op + oq);
  }
  return op;
}

double b_snap_tol(const LoadedProblem& p) {
  return 1e-12 * (1.0 + p.h_file.matrix.norm_frobenius());
}

// Alignment of the dominant-subset real parts at a given period, checked at
// the user's --tol-align.
ordered_json alignment_json(const LoadedProblem& p, double t_p,
                            const Options& o) {
  std::vector<double> re;
  for (int i : p.subset.indices)
    re.push_back(p.spectral.eigenvalues[static_cast<size_t>(i)].real());
  const CollapsedAlphas col = collapse_alphas(re);
  const AlignmentCheck chk = verify_alignment(
      col.distinct, t_p, 2.0 * std::numbers::pi * o.hbar, o.tol_align);
  ordered_json j;
  j["aligned"] = chk.aligned;
  j["C"] = chk.C;
  j["spread"] = chk.spread;
  j["tol_align"] = o.tol_align;
  return j;
}

int cmd_spectrum(const Options& o) {
  const LoadedProblem p = load_problem(o);
  ordered_json rep;
  rep["command"] = "spectrum";
  if (p.h_file.label) rep["label"] = *p.h_file.label;
  rep["config"] = config_echo(o);
  rep["n"] = p.spectral.dim();
  rep["eigenvalues"] = vector_json(p.spectral.eigenvalues);
  rep["cond_P"] = p.spectral.cond_P;
  rep["gauge"] = p.spectral.gauge;
  rep["subset"] = subset_json(p.subset);
  emit_report(rep, o);
  return 0;
}

int cmd_qmetric(const Options& o) {
  const LoadedProblem p = load_problem(o);
  ordered_json rep;
  rep["command"] = "qmetric";
  if (p.h_file.label) rep["label"] = *p.h_file.label;
  rep["config"] = config_echo(o);
  rep["n"] = p.spectral.dim();
  rep["Q"] = matrix_json(p.metric.Q);
  rep["Qinv"] = matrix_json(p.metric.Qinv);
  rep["hermiticity_error_rel"] =
      hermiticity_error(p.metric.Q) / p.metric.Q.norm_frobenius();
  rep["biorthonormality_error"] = biorthonormality_error(p.spectral, p.metric);
  rep["positive_definite"] = cholesky_is_positive_definite(p.metric.Q);
  rep["q_normal"] = is_q_normal(p.h_file.matrix, p.metric, 1e-9);
  rep["cond_P"] = p.spectral.cond_P;
  rep["source_gauge"] = p.metric.source_gauge;
  emit_report(rep, o);
  return 0;
}

int cmd_weak_value(const Options& o) {
  if (!(o.big_t > 0.0)) throw CLI::ValidationError("--T must be positive");
  const LoadedProblem p = load_problem(o);
  const ComplexMatrix op = load_operator(o, p);

  const StatePair pair = maximize_states(p.spectral, o.big_t, o.hbar,
                                         std::nullopt, 0.0, o.tol_deg);
  const cplx amp = transition_amplitude(p.spectral, pair, o.hbar);
  const double expected = std::exp(p.subset.B_max * o.big_t / o.hbar);
  const cplx w = weak_value(op, p.spectral, pair, pair.T_A, o.hbar);
  const double dt = 1e-4 * o.hbar / p.h_file.matrix.norm_frobenius();
  const double heis = heisenberg_residual(op, p.spectral, pair,
                                          0.5 * (pair.T_A + pair.T_B), dt, o.hbar);

  ordered_json rep;
  rep["command"] = "weak-value";
  if (p.h_file.label) rep["label"] = *p.h_file.label;
  rep["config"] = config_echo(o);
  rep["T"] = o.big_t;
  rep["subset"] = subset_json(p.subset);
  rep["pair"] = ordered_json{{"a", vector_json(pair.a)},
                             {"b", vector_json(pair.b)},
                             {"T_A", pair.T_A},
                             {"T_B", pair.T_B}};
  rep["amplitude"] = complex_json(amp);
  rep["amplitude_modulus"] = std::abs(amp);
  rep["expected_modulus"] = expected;
  rep["amplitude_rel_error"] = std::abs(std::abs(amp) - expected) / expected;
  rep["weak_value"] = complex_json(w);
  rep["imag_ratio"] = imag_ratio(w);
  rep["heisenberg_residual"] = heis;
  rep["heisenberg_dt"] = dt;
  emit_report(rep, o);
  return 0;
}

int cmd_periodic(const Options& o) {
  const LoadedProblem p = load_problem(o);
  const ComplexMatrix op = load_operator(o, p);
  const RealityReport rr =
      reality_report(p.spectral, op, *o.t_p, o.hbar, o.tol_deg, o.kappa);

  ordered_json rep;
  rep["command"] = "periodic";
  if (p.h_file.label) rep["label"] = *p.h_file.label;
  rep["config"] = config_echo(o);
  rep["t_p"] = *o.t_p;
  rep["value"] = complex_json(rr.exact.value);
  rep["numerator"] = complex_json(rr.exact.numerator);
  rep["denominator"] = complex_json(rr.exact.denominator);
  rep["imag_ratio"] = rr.imag_ratio_exact;
  rep["reduced_value"] = complex_json(rr.reduced.value);
  rep["imag_ratio_reduced"] = rr.imag_ratio_reduced;
  rep["subset"] = subset_json(rr.subset);
  rep["theorem2_applies"] = rr.theorem2_applies;
  rep["theorem3_prereq"] = rr.theorem3_prereq;
  if (std::isfinite(rr.min_spacing))
    rep["min_spacing"] = rr.min_spacing;
  else
    rep["min_spacing"] = nullptr;
  if (*o.t_p > 0.0) rep["alignment"] = alignment_json(p, *o.t_p, o);
  emit_report(rep, o);
  return 0;
}

ordered_json candidate_json(const PeriodCandidate& c) {
  ordered_json j;
  j["t_p"] = c.t_p;
  j["m"] = c.m;
  j["C"] = c.C;
  j["f_value"] = c.f_value;
  j["damped_f"] = c.damped_f;
  return j;
}

int cmd_solve_period(const Options& o) {
  const LoadedProblem p = load_problem(o);
  const PeriodSolveReport sol =
      solve_periods(p.spectral, p.subset, o.hbar, o.bounds(), o.max_denominator,
                    kDefaultRationalizeTol, 1e-9, b_snap_tol(p));

  ordered_json rep;
  rep["command"] = "solve-period";
  if (p.h_file.label) rep["label"] = *p.h_file.label;
  rep["config"] = config_echo(o);
  rep["B_max"] = p.subset.B_max;
  rep["alphas"] = sol.alphas;
  rep["approx_error"] = sol.approx_error;
  rep["unconstrained"] = sol.unconstrained;
  if (sol.unconstrained) {
    rep["note"] =
        "single distinct real part in the dominant subset: every period is aligned";
    emit_report(rep, o);
    return 0;
  }
  ordered_json cands = ordered_json::array();
  for (const PeriodCandidate& c : sol.candidates) cands.push_back(candidate_json(c));
  rep["candidates"] = std::move(cands);
  ordered_json sel = candidate_json(sol.selected.candidate);
  sel["m_expanded"] = expand_certificate(sol.selected.candidate, sol.group_of);
  sel["degenerate_maxima"] = sol.selected.degenerate_maxima;
  sel["alignment"] = alignment_json(p, sol.selected.candidate.t_p, o);
  rep["selected"] = std::move(sel);
  emit_report(rep, o);
  return 0;
}

int cmd_scan(const Options& o) {
  const LoadedProblem p = load_problem(o);
  const ScanResult scan =
      scan_oracle(p.spectral, o.hbar, o.t_max, o.grid_points, 0.5, o.tol_deg);

  if (o.output_format == "csv") {
    std::printf("t_p,f,damped_f\n");
    for (const ScanRow& r : scan.rows)
      std::printf("%.15g,%.15g,%.15g\n", r.t_p, r.f, r.damped_f);
    std::fprintf(stderr, "argmax_t=%.15g argmax_f=%.15g resolution=%.3g flat=%d\n",
                 scan.argmax_t, scan.argmax_f, scan.resolution,
                 scan.flat ? 1 : 0);
    return 0;
  }
  ordered_json rep;
  rep["command"] = "scan";
  if (p.h_file.label) rep["label"] = *p.h_file.label;
  rep["config"] = config_echo(o);
  ordered_json rows = ordered_json::array();
  for (const ScanRow& r : scan.rows)
    rows.push_back(ordered_json{{"t_p", r.t_p}, {"f", r.f}, {"damped_f", r.damped_f}});
  rep["rows"] = std::move(rows);
  ordered_json peaks = ordered_json::array();
  for (const ScanRow& r : scan.local_maxima)
    peaks.push_back(ordered_json{{"t_p", r.t_p}, {"f", r.f}});
  rep["argmax"] = ordered_json{{"t_p", scan.argmax_t},
                               {"f", scan.argmax_f},
                               {"resolution", scan.resolution},
                               {"flat", scan.flat},
                               {"local_maxima", std::move(peaks)}};
  emit_report(rep, o);
  return 0;
}

int cmd_verify(const Options& o) {
  const LoadedProblem p = load_problem(o);
  const ComplexMatrix op = load_operator(o, p);

  ordered_json rep;
  rep["command"] = "verify";
  if (p.h_file.label) rep["label"] = *p.h_file.label;
  rep["config"] = config_echo(o);
  rep["n"] = p.spectral.dim();
  rep["cond_P"] = p.spectral.cond_P;
  rep["subset"] = subset_json(p.subset);

  ordered_json checks = ordered_json::array();
  auto check = [&checks](const std::string& name, bool pass, double value,
                         double threshold) {
    checks.push_back(ordered_json{{"name", name},
                                  {"pass", pass},
                                  {"value", value},
                                  {"threshold", threshold}});
    return pass;
  };
  bool all = true;

  const double biortho = biorthonormality_error(p.spectral, p.metric);
  all &= check("biorthonormality", biortho <= 1e-10, biortho, 1e-10);

  const ComplexMatrix hq = q_adjoint(p.h_file.matrix, p.metric);
  const double hn = p.h_file.matrix.norm_frobenius();
  const double qn = (p.h_file.matrix * hq - hq * p.h_file.matrix).norm_frobenius() /
                    (hn * hn);
  all &= check("q_normality", qn <= 1e-9, qn, 1e-9);

  const bool pd = cholesky_is_positive_definite(p.metric.Q);
  all &= check("q_positive_definite", pd, pd ? 1.0 : 0.0, 1.0);

  // period selection: explicit --tp wins; otherwise ask the solver
  std::optional<double> t_p = o.t_p;
  bool solver_ran = false;
  if (!t_p && p.subset.B_max <= b_snap_tol(p)) {
    try {
      const PeriodSolveReport sol =
          solve_periods(p.spectral, p.subset, o.hbar, o.bounds(),
                        o.max_denominator, kDefaultRationalizeTol, 1e-9,
                        b_snap_tol(p));
      if (!sol.unconstrained) {
        t_p = sol.selected.candidate.t_p;
        solver_ran = true;
        ordered_json sel = candidate_json(sol.selected.candidate);
        sel["degenerate_maxima"] = sol.selected.degenerate_maxima;
        rep["solver"] = std::move(sel);
      } else {
        rep["solver"] = ordered_json{{"unconstrained", true}};
      }
    } catch (const Error& e) {
      rep["solver"] = ordered_json{{"error", e.kind()}, {"message", e.what()}};
    }
  }
  rep["solver_selected"] = solver_ran;

  if (t_p) {
    const RealityReport rr =
        reality_report(p.spectral, op, *t_p, o.hbar, o.tol_deg, o.kappa);
    rep["t_p"] = *t_p;
    rep["value"] = complex_json(rr.exact.value);
    rep["imag_ratio"] = rr.imag_ratio_exact;
    rep["imag_ratio_reduced"] = rr.imag_ratio_reduced;
    rep["theorem2_applies"] = rr.theorem2_applies;
    rep["theorem3_prereq"] = rr.theorem3_prereq;
    if (*t_p > 0.0) {
      const ordered_json align = alignment_json(p, *t_p, o);
      rep["alignment"] = align;
      if (solver_ran) {
        all &= check("period_alignment", align["aligned"].get<bool>(),
                     align["spread"].get<double>(),
                     o.tol_align * 2.0 * std::numbers::pi * o.hbar);
      }
    }
    if (rr.theorem2_applies) {
      all &= check("reality_reduced_theorem2", rr.imag_ratio_reduced <= 1e-9,
                   rr.imag_ratio_reduced, 1e-9);
    }
    if (solver_ran && rr.theorem3_prereq) {
      const double bound =
          1e-8 * std::exp(std::abs(p.subset.B_max) * *t_p / o.hbar);
      all &= check("reality_at_selected_period", rr.imag_ratio_exact <= bound,
                   rr.imag_ratio_exact, bound);
    }
  }

  rep["checks"] = std::move(checks);
  rep["all_passed"] = all;
  emit_report(rep, o);
  return all ? 0 : 1;
}

ordered_json error_report(const std::string& kind, const std::string& message) {
  ordered_json rep;
  rep["error"] = ordered_json{{"kind", kind}, {"message", message}};
  return rep;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "pcat: non-normal Hamiltonian toolkit. Modified inner products, "
      "weak values, periodic-time expectation values, phase-aligned periods."};
  app.require_subcommand(1);

  Options o;
  CLI::App* spectrum = app.add_subcommand(
      "spectrum", "eigenvalues, conditioning, dominant subset");
  add_common_options(spectrum, o);

  CLI::App* qmetric = app.add_subcommand(
      "qmetric", "the Hermitian positive-definite Q and its diagnostics");
  add_common_options(qmetric, o);

  CLI::App* weak = app.add_subcommand(
      "weak-value", "maximizing state pair and its normalized matrix element");
  add_common_options(weak, o);
  weak->add_option("--operator", o.operator_path, "operator JSON file")->required();
  weak->add_option("--T", o.big_t, "time separation T_B - T_A (> 0)");
  weak->add_flag("--q-hermitize", o.q_hermitize,
                 "symmetrize the operator to its Q-Hermitian part");

  CLI::App* periodic = app.add_subcommand(
      "periodic", "periodic-time expectation value at a given period");
  add_common_options(periodic, o);
  periodic->add_option("--operator", o.operator_path, "operator JSON file")
      ->required();
  periodic->add_option("--tp", o.t_p, "period t_p")->required();
  periodic->add_flag("--q-hermitize", o.q_hermitize,
                     "symmetrize the operator to its Q-Hermitian part");

  CLI::App* solve = app.add_subcommand(
      "solve-period", "phase-alignment periods with integer certificates");
  add_common_options(solve, o);

  CLI::App* scan = app.add_subcommand(
      "scan", "sample f(t_p) = |Tr e^{-iHt_p/hbar}|^2 over a grid");
  add_common_options(scan, o);

  CLI::App* verify = app.add_subcommand(
      "verify", "run the built-in diagnostics and reality checks");
  add_common_options(verify, o);
  verify->add_option("--operator", o.operator_path,
                     "operator JSON file (default: seeded Q-Hermitian sample)");
  verify->add_option("--tp", o.t_p, "period override for the reality check");
  verify->add_flag("--q-hermitize", o.q_hermitize,
                   "symmetrize the operator to its Q-Hermitian part");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (spectrum->parsed()) return cmd_spectrum(o);
    if (qmetric->parsed()) return cmd_qmetric(o);
    if (weak->parsed()) return cmd_weak_value(o);
    if (periodic->parsed()) return cmd_periodic(o);
    if (solve->parsed()) return cmd_solve_period(o);
    if (scan->parsed()) return cmd_scan(o);
    if (verify->parsed()) return cmd_verify(o);
  } catch (const ParseError& e) {
    std::cout << error_report(e.kind(), e.what()).dump(2) << "\n";
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cout << error_report(e.kind(), e.what()).dump(2) << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 70;
  }
  return 2;
}
