#include "lyapoqs/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "lyapoqs/config.hpp"
#include "lyapoqs/errors.hpp"
#include "lyapoqs/observables.hpp"
#include "lyapoqs/oracle.hpp"
#include "lyapoqs/perturbative.hpp"
#include "lyapoqs/regression.hpp"

namespace lyapoqs {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Flags {
  std::string config;
  std::string level;
  std::string out;
  bool with_naive = false;
  double quad_tol = 0.0;
  int seed = 7;
  int n = 3;
};

struct Run {
  std::string command;
  RunConfig cfg;
  std::filesystem::path out;
  json diagnostics = json::object();
  int threads = 1;
};

int env_threads() {
  const char* s = std::getenv("LYAPOQS_THREADS");
  if (!s || !*s) return 1;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1) throw Error(ErrorKind::Config, fmt::format("LYAPOQS_THREADS must be a positive integer, got '{}'", s));
  return static_cast<int>(v);
}

Run prepare(const std::string& command, const Flags& f) {
  Run run;
  run.command = command;
  run.threads = env_threads();
  run.cfg = load_config(f.config);
  if (!f.level.empty()) run.cfg.level = parse_level(f.level);
  if (f.quad_tol > 0.0) {
    run.cfg.quad.abs_tol = f.quad_tol;
    run.cfg.quad.rel_tol = f.quad_tol;
  }
  run.out = f.out.empty() ? std::filesystem::path(run.cfg.output_dir) : std::filesystem::path(f.out);
  std::filesystem::create_directories(run.out);
  return run;
}

void write_manifest(const Run& run) {
  json m;
  m["tool"] = "lyapunov-oqs";
  m["version"] = kVersion;
  m["command"] = run.command;
  m["config"] = json::parse(run.cfg.resolved_json);
  m["config"]["level"] = to_string(run.cfg.level);
  m["config"]["quadrature"] = {{"abs_tol", run.cfg.quad.abs_tol},
                               {"rel_tol", run.cfg.quad.rel_tol},
                               {"max_intervals", run.cfg.quad.max_intervals}};
  m["units"] = {{"hbar", 1}, {"k_B", 1},
                {"energy", run.cfg.has_system ? run.cfg.system.energy_unit : std::string("arbitrary")}};
  m["threads"] = run.threads;
  write_text((run.out / "manifest.json").string(), m.dump(2) + "\n");
}

void write_diagnostics(const Run& run) {
  write_text((run.out / "diagnostics.json").string(), run.diagnostics.dump(2) + "\n");
}

std::vector<std::string> echo_params(const Run& run) {
  std::vector<std::string> c = {fmt::format("lyapunov-oqs {} level={}", run.command, to_string(run.cfg.level))};
  std::string flat = json::parse(run.cfg.resolved_json).dump();
  c.push_back("config " + flat);
  return c;
}

void record_system(Run& run, const OpenSystem& sys, const NonHermitianSystem& nh) {
  run.diagnostics["warnings"] = sys.warnings;
  run.diagnostics["epsilon"] = sys.epsilon;
  run.diagnostics["drift_condition_number"] = nh.g_eig.cond;
  run.diagnostics["near_defective"] = nh.g_eig.near_defective;
  run.diagnostics["min_decay_rate"] = nh.g_eig.lambda.real().minCoeff();
}

void record_tau(Run& run, const OpenSystem& sys) {
  if (sys.baths.empty()) return;
  const double tol = default_tau_tolerance(sys);
  json j = {{"tolerance", tol}};
  for (auto [name, kind] : {std::pair{"tau_B1", MarkovKernel::B1}, std::pair{"tau_B2", MarkovKernel::B2}}) {
    const TauEstimate est = estimate_tau_B(sys, kind, tol);
    json arr = json::array();
    for (double t : est.tau) arr.push_back(std::isfinite(t) ? json(t) : json("inf"));
    j[name] = arr;
    j[std::string(name) + "_horizon_exceeded"] = est.horizon_exceeded;
  }
  run.diagnostics["memory_times"] = j;
}

void record_solve(Run& run, const SolveInfo& info, const QuadStats& qs) {
  run.diagnostics["solver"] = {{"method", info.method},
                               {"residual", info.residual},
                               {"hermiticity_defect", info.hermiticity_defect}};
  for (const auto& w : info.warnings) run.diagnostics["warnings"].push_back(w);
  run.diagnostics["quadrature"] = {{"error_bound", qs.error}, {"evaluations", qs.evaluations},
                                   {"intervals", qs.intervals}, {"converged", qs.converged}};
}

int cmd_ness(const Flags& f) {
  Run run = prepare("ness", f);
  const OpenSystem sys = build_open_system(run.cfg);
  const NonHermitianSystem nh = build_nonhermitian(sys, run.cfg.quad);
  record_system(run, sys, nh);
  SolveInfo info;
  QuadStats qs;
  const CorrelationMatrix c = solve_ness(run.cfg.level, sys, nh, run.cfg.quad, &info, &qs);
  record_solve(run, info, qs);
  run.diagnostics["positivity_defect"] = positivity_defect(c, sys.statistics);
  run.diagnostics["min_eig"] = c.min_eig;
  record_tau(run, sys);

  CsvTable t;
  t.comments = echo_params(run);
  append_matrix_columns(t, "C", sys.n_sites());
  std::vector<double> row;
  append_matrix_values(row, c.c);
  t.rows.push_back(row);
  write_csv((run.out / "ness.csv").string(), t);
  write_manifest(run);
  write_diagnostics(run);
  return 0;
}

int cmd_dynamics(const Flags& f) {
  Run run = prepare("dynamics", f);
  const OpenSystem sys = build_open_system(run.cfg);
  const NonHermitianSystem nh = build_nonhermitian(sys, run.cfg.quad);
  record_system(run, sys, nh);
  const CMatrix c0 = initial_correlation(run.cfg, sys.n_sites());
  SolveInfo info;
  QuadStats qs;
  const auto cs = solve_differential(run.cfg.level, sys, nh, c0, run.cfg.times.points(), run.cfg.quad, &info, &qs);
  record_solve(run, info, qs);
  double worst = 0.0;
  for (const auto& c : cs) worst = std::max(worst, positivity_defect(c, sys.statistics));
  run.diagnostics["positivity_defect"] = worst;
  record_tau(run, sys);

  CsvTable t;
  t.comments = echo_params(run);
  t.columns = {"t"};
  append_matrix_columns(t, "C", sys.n_sites());
  t.columns.push_back("min_eig");
  for (const auto& c : cs) {
    std::vector<double> row = {c.t};
    append_matrix_values(row, c.c);
    row.push_back(c.min_eig);
    t.rows.push_back(row);
  }
  write_csv((run.out / "dynamics.csv").string(), t);
  write_manifest(run);
  write_diagnostics(run);
  return 0;
}

int cmd_two_time(const Flags& f) {
  Run run = prepare("two-time", f);
  const OpenSystem sys = build_open_system(run.cfg);
  const NonHermitianSystem nh = build_nonhermitian(sys, run.cfg.quad);
  record_system(run, sys, nh);
  const int n = sys.n_sites();
  const CMatrix c0 = initial_correlation(run.cfg, n);
  const auto taus = run.cfg.two_time.taus.points();
  const double t = run.cfg.two_time.t;
  auto entries = run.cfg.two_time.entries;
  if (entries.empty())
    for (int l = 0; l < n; ++l)
      for (int m = 0; m < n; ++m) entries.emplace_back(l, m);
  for (const auto& [l, m] : entries)
    if (l < 0 || l >= n || m < 0 || m >= n)
      throw Error(ErrorKind::Config, fmt::format("two_time.entries has [{}, {}] outside the system", l, m));

  const TwoTimeCorrelation gen = two_time(run.cfg.level, sys, nh, c0, t, taus, run.cfg.quad);
  TwoTimeCorrelation naive;
  if (f.with_naive) {
    const auto ct = solve_differential(run.cfg.level, sys, nh, c0, {t}, run.cfg.quad);
    naive = naive_qme_regression(nh, ct.front(), taus);
  }
  for (const auto& w : gen.warnings) run.diagnostics["warnings"].push_back(w);
  run.diagnostics["convention"] = gen.convention;

  CsvTable tab;
  tab.comments = echo_params(run);
  tab.columns = {"tau"};
  for (const auto& [l, m] : entries) {
    tab.columns.push_back(fmt::format("ReC_{}_{}", l, m));
    tab.columns.push_back(fmt::format("ImC_{}_{}", l, m));
  }
  if (f.with_naive)
    for (const auto& [l, m] : entries) {
      tab.columns.push_back(fmt::format("ReNaive_{}_{}", l, m));
      tab.columns.push_back(fmt::format("ImNaive_{}_{}", l, m));
    }
  for (std::size_t k = 0; k < taus.size(); ++k) {
    std::vector<double> row = {taus[k]};
    for (const auto& [l, m] : entries) {
      row.push_back(gen.values[k](l, m).real());
      row.push_back(gen.values[k](l, m).imag());
    }
    if (f.with_naive)
      for (const auto& [l, m] : entries) {
        row.push_back(naive.values[k](l, m).real());
        row.push_back(naive.values[k](l, m).imag());
      }
    tab.rows.push_back(row);
  }
  write_csv((run.out / "two_time.csv").string(), tab);
  write_manifest(run);
  write_diagnostics(run);
  return 0;
}

int cmd_pert_ness(const Flags& f) {
  Run run = prepare("pert-ness", f);
  const OpenSystem sys = build_open_system(run.cfg);
  const NonHermitianSystem nh = build_nonhermitian(sys, run.cfg.quad);
  record_system(run, sys, nh);
  const PertRegime reg = check_pert_regime(sys, nh, run.cfg.pert_threshold);
  json margins = json::array();
  CsvTable mt;
  mt.comments = echo_params(run);
  mt.columns = {"alpha", "nu", "margin", "accepted"};
  for (const auto& p : reg.pairs) {
    margins.push_back({{"alpha", p.alpha}, {"nu", p.nu}, {"margin", p.margin}, {"accepted", p.accepted}});
    mt.rows.push_back({double(p.alpha), double(p.nu), p.margin, p.accepted ? 1.0 : 0.0});
  }
  run.diagnostics["regime"] = {{"threshold", reg.threshold},
                               {"min_margin", std::isfinite(reg.min_margin) ? json(reg.min_margin) : json("inf")},
                               {"accepted", reg.accepted},
                               {"pairs", margins}};
  write_csv((run.out / "pert_margins.csv").string(), mt);
  write_manifest(run);
  write_diagnostics(run);

  const CMatrix y = pert_ness(sys, nh, run.cfg.quad, run.cfg.pert_threshold);
  CsvTable t;
  t.comments = echo_params(run);
  t.comments.push_back("eigenbasis Y_an = <b_a^dag b_n>, modes ordered by energy");
  t.columns = {};
  for (int a = 0; a < sys.n_sites(); ++a) t.columns.push_back(fmt::format("omega_{}", a));
  append_matrix_columns(t, "Y", sys.n_sites());
  std::vector<double> row(sys.hamiltonian.omega.data(), sys.hamiltonian.omega.data() + sys.n_sites());
  append_matrix_values(row, y);
  t.rows.push_back(row);
  write_csv((run.out / "pert_ness.csv").string(), t);
  return 0;
}

int cmd_resonant_level(const Flags& f) {
  Run run = prepare("resonant-level", f);
  if (!run.cfg.has_resonant_level) throw Error(ErrorKind::Config, "config needs a 'resonant_level' section");
  const auto& p = run.cfg.resonant_level;
  const auto taus = run.cfg.two_time.taus.points();
  const ResonantLevelRecord rec = resonant_level_suite(p, taus, run.cfg.quad);

  const OpenSystem sys = resonant_level_system(p);
  const NonHermitianSystem nh = build_nonhermitian(sys, run.cfg.quad);
  record_system(run, sys, nh);
  SolveInfo info;
  QuadStats qs;
  const CorrelationMatrix c = solve_ness(Level::LevelI, sys, nh, run.cfg.quad, &info, &qs);
  record_solve(run, info, qs);
  const double q1l = build_Q1_bath(sys, nh, 0, run.cfg.quad)(0, 0).real();
  const double q1r = build_Q1_bath(sys, nh, 1, run.cfg.quad)(0, 0).real();
  const auto currents = bath_current_single_site(sys, {q1l, q1r}, c.c(0, 0).real());
  const TwoTimeCorrelation reg = two_time_level1(sys, nh, c, taus, run.cfg.quad);

  CsvTable s;
  s.comments = echo_params(run);
  s.columns = {"occupation_exact", "current_exact", "occupation_lyapunov", "current_left", "current_right"};
  s.rows.push_back({rec.occupation, rec.current, c.c(0, 0).real(), currents[0], currents[1]});
  write_csv((run.out / "resonant_level.csv").string(), s);

  CsvTable t;
  t.comments = echo_params(run);
  t.columns = {"tau", "Re_exact", "Im_exact", "Re_regression", "Im_regression", "Re_naive", "Im_naive"};
  for (std::size_t k = 0; k < taus.size(); ++k)
    t.rows.push_back({taus[k], rec.two_time_exact[k].real(), rec.two_time_exact[k].imag(), reg.values[k](0, 0).real(),
                      reg.values[k](0, 0).imag(), rec.two_time_naive[k].real(), rec.two_time_naive[k].imag()});
  write_csv((run.out / "resonant_level_two_time.csv").string(), t);
  write_manifest(run);
  write_diagnostics(run);
  return 0;
}

int cmd_chain_current(const Flags& f) {
  Run run = prepare("chain-current", f);
  const OpenSystem sys = build_open_system(run.cfg);
  require_real_tridiagonal(sys.h());
  const NonHermitianSystem nh = build_nonhermitian(sys, run.cfg.quad);
  record_system(run, sys, nh);
  SolveInfo info;
  QuadStats qs;
  const CorrelationMatrix c = solve_ness(run.cfg.level, sys, nh, run.cfg.quad, &info, &qs);
  record_solve(run, info, qs);
  const auto bonds = bond_currents(sys, c);
  const auto baths = bath_currents(run.cfg.level, sys, nh, c, run.cfg.quad);
  run.diagnostics["bath_currents"] = baths;

  bool pert = false;
  std::vector<double> pc;
  if (sys.hamiltonian.real && !sys.hamiltonian.degenerate) {
    const PertRegime reg = check_pert_regime(sys, nh, run.cfg.pert_threshold);
    run.diagnostics["regime_min_margin"] = std::isfinite(reg.min_margin) ? json(reg.min_margin) : json("inf");
    if (reg.accepted) {
      pert = true;
      for (int p = 0; p + 1 < sys.n_sites(); ++p) pc.push_back(pert_current_formula(sys, nh, p, run.cfg.pert_threshold));
    }
  }
  CsvTable t;
  t.comments = echo_params(run);
  t.columns = {"bond", "current"};
  if (pert) t.columns.push_back("current_weak_coupling");
  for (std::size_t p = 0; p < bonds.size(); ++p) {
    std::vector<double> row = {double(p), bonds[p]};
    if (pert) row.push_back(pc[p]);
    t.rows.push_back(row);
  }
  write_csv((run.out / "chain_current.csv").string(), t);
  write_manifest(run);
  write_diagnostics(run);
  return 0;
}

int cmd_conductance(const Flags& f) {
  Run run = prepare("conductance", f);
  const OpenSystem sys = build_open_system(run.cfg);
  const int n = sys.n_sites();
  const int r = run.cfg.conductance_r;
  const int s = run.cfg.conductance_s < 0 ? n - 1 : run.cfg.conductance_s;
  CsvTable t;
  t.comments = echo_params(run);
  t.columns = {"r", "s", "W"};
  t.rows.push_back({double(r), double(s), dimensionless_conductance(sys, r, s)});
  write_csv((run.out / "conductance.csv").string(), t);

  CsvTable all;
  all.comments = echo_params(run);
  all.columns = {"r", "s", "W"};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) all.rows.push_back({double(a), double(b), dimensionless_conductance(sys, a, b)});
  write_csv((run.out / "conductance_matrix.csv").string(), all);
  write_manifest(run);
  write_diagnostics(run);
  return 0;
}

int cmd_spectrum(const Flags& f) {
  Run run = prepare("spectrum", f);
  const OpenSystem sys = build_open_system(run.cfg);
  const NonHermitianSystem nh = build_nonhermitian(sys, run.cfg.quad);
  record_system(run, sys, nh);
  run.diagnostics["dark_states"] = dark_states(sys, nh);
  run.diagnostics["ness_unique"] = ness_unique(nh);
  run.diagnostics["degenerate"] = sys.hamiltonian.degenerate;
  CsvTable t;
  t.comments = echo_params(run);
  t.columns = {"index", "omega", "Re_lambda", "Im_lambda"};
  // Drift eigenvalues in a deterministic order.
  std::vector<cplx> lam(nh.g_eig.lambda.data(), nh.g_eig.lambda.data() + nh.g_eig.lambda.size());
  std::sort(lam.begin(), lam.end(), [](cplx a, cplx b) { return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real(); });
  for (int a = 0; a < sys.n_sites(); ++a)
    t.rows.push_back({double(a), sys.hamiltonian.omega(a), lam[a].real(), lam[a].imag()});
  write_csv((run.out / "spectrum.csv").string(), t);
  write_manifest(run);
  write_diagnostics(run);
  return 0;
}

struct Check {
  std::string name;
  std::string level;
  double value;
  double tolerance;
  bool pass() const { return std::isfinite(value) && value <= tolerance; }
};

OpenSystem random_chain(std::mt19937_64& rng, int n, double eps, bool wide) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> onsite(n), hopping(n - 1);
  for (auto& x : onsite) x = u(rng);
  for (auto& x : hopping) x = 1.0 + 0.5 * u(rng);
  auto spec = [&]() {
    return wide ? SpectralFunction::wide_band(1.0 + 0.3 * u(rng))
                : SpectralFunction::lorentzian(1.0 + 0.3 * u(rng), 0.5 * u(rng), 2.0 + u(rng));
  };
  std::vector<BathAttachment> baths = {{0, spec(), 1.0 + 0.5 * u(rng), 0.5 * u(rng), Statistics::Fermionic},
                                       {n - 1, spec(), 2.0 + 0.5 * u(rng), 0.5 * u(rng), Statistics::Fermionic}};
  return build_system(tridiagonal_hamiltonian(onsite, hopping), baths, eps, Statistics::Fermionic);
}

int cmd_validate(const Flags& f) {
  const int threads = env_threads();
  if (f.n < 2 || f.n > 6) throw Error(ErrorKind::Config, "--n must lie in [2, 6]");
  const bool all = f.level.empty() || f.level == "all";
  bool first = all, l1 = all, l2 = all;
  if (!all) {
    const Level lv = parse_level(f.level);
    first = lv == Level::FirstMarkov;
    l1 = lv == Level::LevelI;
    l2 = lv == Level::LevelII;
  }
  std::mt19937_64 rng(static_cast<std::uint64_t>(f.seed));
  std::vector<Check> checks;
  const OpenSystem sys = random_chain(rng, f.n, 0.3, false);
  const NonHermitianSystem nh = build_nonhermitian(sys);
  const CMatrix c0 = CMatrix::Identity(f.n, f.n) * 0.5;
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);

  if (first || l1) {
    const CMatrix q1 = build_Q1(sys, nh);
    const CorrelationMatrix ci = solve_algebraic(nh.g, q1, sys.epsilon);
    const CorrelationMatrix cf = ness_first_markov(sys, nh);
    checks.push_back({"lyapunov residual", "l1", lyapunov_residual(nh.g, ci.c, q1, sys.epsilon),
                      1e-10 * std::max(1.0, sys.epsilon * sys.epsilon * max_abs(q1))});
    checks.push_back({"kronecker agreement", "l1",
                      max_abs(ci.c - solve_algebraic_kronecker(nh.g, sys.epsilon * sys.epsilon * q1)), 1e-9});
    checks.push_back({"level-I NESS equals first-Markov NESS", "l1", max_abs(ci.c - cf.c), 1e-8});
    checks.push_back({"level-I NESS positivity", "l1", positivity_defect(ci, sys.statistics), 1e-10});
  }
  if (first) {
    const auto cs = solve_differential(Level::FirstMarkov, sys, nh, c0, grid);
    double worst = 0.0;
    for (const auto& c : cs) worst = std::max(worst, positivity_defect(c, sys.statistics));
    checks.push_back({"first-Markov positivity", "first", worst, 1e-10});

    const OpenSystem wb = random_chain(rng, f.n, 1.0, true);
    const NonHermitianSystem wnh = build_nonhermitian(wb);
    const auto disc = discretize_baths(wb, 600, -15.0, 15.0);
    std::vector<double> ts;
    for (int k = 1; k <= 8; ++k) ts.push_back(5.0 * k);
    const auto ex = exact_gaussian_evolve(wb, disc, c0, ts);
    const auto fm = solve_differential(Level::FirstMarkov, wb, wnh, c0, ts);
    double err = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) err = std::max(err, max_abs(ex[k].c - fm[k].c));
    checks.push_back({"first-Markov vs discretized baths", "first", err, 5e-2});
  }
  if (l2) {
    const CMatrix q2 = build_Q2(sys);
    const CorrelationMatrix c2 = solve_algebraic(nh.g, q2, sys.epsilon);
    checks.push_back({"lyapunov residual", "l2", lyapunov_residual(nh.g, c2.c, q2, sys.epsilon),
                      1e-10 * std::max(1.0, sys.epsilon * sys.epsilon * max_abs(q2))});
    const FockOperators ops = fock_operators(f.n);
    const auto rf = redfield_fock_evolve(sys, nh, gaussian_density_matrix(ops, c0), grid);
    const auto ly = solve_differential(Level::LevelII, sys, nh, c0, grid);
    double err = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) err = std::max(err, max_abs(rf.c[k].c - ly[k].c));
    checks.push_back({"Redfield equivalence", "l2", err, 1e-8});

    const OpenSystem weak = build_system(sys.h(), sys.baths, 0.01, sys.statistics);
    const NonHermitianSystem wnh = build_nonhermitian(weak);
    const CMatrix y2 = to_eigenbasis(weak.hamiltonian, solve_ness(Level::LevelII, weak, wnh).c);
    const CMatrix yp = pert_ness(weak, wnh);
    checks.push_back({"perturbative NESS", "l2", max_abs(y2 - yp) / std::max(1e-300, max_abs(y2)), 10.0 * 1e-4});
  }

  bool ok = true;
  fmt::print("{:<40} {:<6} {:>12} {:>12}  {}\n", "check", "level", "value", "tolerance", "result");
  CsvTable t;
  t.comments = {fmt::format("lyapunov-oqs validate level={} n={} seed={}", all ? "all" : f.level, f.n, f.seed)};
  t.columns = {"check", "value", "tolerance", "pass"};
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& c = checks[i];
    ok = ok && c.pass();
    fmt::print("{:<40} {:<6} {:>12.3e} {:>12.3e}  {}\n", c.name, c.level, c.value, c.tolerance, c.pass() ? "PASS" : "FAIL");
    t.rows.push_back({double(i), c.value, c.tolerance, c.pass() ? 1.0 : 0.0});
  }
  if (!f.out.empty()) {
    std::filesystem::create_directories(f.out);
    write_csv((std::filesystem::path(f.out) / "validate.csv").string(), t);
    json m = {{"tool", "lyapunov-oqs"}, {"version", kVersion}, {"command", "validate"},
              {"level", all ? "all" : f.level}, {"n", f.n}, {"seed", f.seed}, {"threads", threads}};
    json names = json::array();
    for (const auto& c : checks) names.push_back(c.name + " [" + c.level + "]");
    m["checks"] = names;
    write_text((std::filesystem::path(f.out) / "manifest.json").string(), m.dump(2) + "\n");
  }
  return ok ? 0 : 3;
}

void write_failure(const Flags& f, const std::string& command, const Error& e) {
  if (f.out.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(f.out, ec);
  if (ec) return;
  json d = {{"command", command}, {"error", to_string(e.kind())}, {"message", e.what()}};
  try {
    write_text((std::filesystem::path(f.out) / "diagnostics.json").string(), d.dump(2) + "\n");
  } catch (...) {
  }
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Lyapunov-equation solver for quadratic open quantum systems"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", f.config, "JSON run configuration");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--level", f.level, "approximation level: first, l1 or l2");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--quad-tol", f.quad_tol, "absolute and relative quadrature tolerance")->check(CLI::PositiveNumber);
  };

  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const Flags&);
  };
  const std::vector<Entry> entries = {
      {"ness", "steady-state correlation matrix", cmd_ness},
      {"dynamics", "correlation matrix on a time grid", cmd_dynamics},
      {"two-time", "two-time correlations C(t+tau, t)", cmd_two_time},
      {"pert-ness", "weak-coupling steady state in the eigenbasis", cmd_pert_ness},
      {"resonant-level", "single level between two wide-band baths", cmd_resonant_level},
      {"chain-current", "bond currents of a nearest-neighbour chain", cmd_chain_current},
      {"conductance", "dimensionless conductance W(r, s)", cmd_conductance},
      {"spectrum", "system energies and drift eigenvalues", cmd_spectrum},
  };
  std::vector<std::pair<CLI::App*, const Entry*>> subs;
  for (const auto& e : entries) {
    auto* sub = app.add_subcommand(e.name, e.help);
    common(sub, true);
    if (std::string(e.name) == "two-time") sub->add_flag("--with-naive", f.with_naive, "add the naive regression baseline");
    subs.emplace_back(sub, &e);
  }
  auto* val = app.add_subcommand("validate", "oracle comparisons on a seeded random chain");
  val->add_option("--level", f.level, "first, l1, l2 or all");
  val->add_option("--n", f.n, "number of sites (2 to 6)");
  val->add_option("--seed", f.seed, "random seed");
  val->add_option("--out", f.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string command = "validate";
  try {
    if (val->parsed()) return cmd_validate(f);
    for (const auto& [sub, e] : subs)
      if (sub->parsed()) {
        command = e->name;
        return e->fn(f);
      }
  } catch (const Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", to_string(e.kind()), e.what());
    write_failure(f, command, e);
    return is_input_error(e.kind()) ? 2 : 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 3;
  }
  return 2;
}

}  // namespace lyapoqs
