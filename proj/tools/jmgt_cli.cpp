#include "jmgt/diagnostics/identities.hpp"
#include "jmgt/io/run_store.hpp"
#include "jmgt/spectral/checks.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace jmgt;

namespace {

struct Globals {
  std::string out = "runs";
  std::uint64_t seed = default_seed;
  int threads = 1;
};

enum Exit { ok = 0, validation = 2, runtime = 3, experiment_failed = 4 };

// failed experiment verdicts and infeasible syntheses end with exit code 4
struct VerdictFailure : Error {
  using Error::Error;
};

Json fit_or_error(const std::vector<double>& t, const std::vector<double>& v, FitWindow w, const std::string& norm) {
  try {
    return to_json(fit_decay_rate(t, v, w, norm));
  } catch (const FitError& e) {
    return {{"error", e.what()}};
  }
}

template <class F>
Json residual_or_error(F&& f) {
  try {
    return to_json(f());
  } catch (const DiagnosticError& e) {
    return {{"error", e.what()}};
  }
}

int cmd_simulate(const Globals& g, const std::string& path) {
  const ScenarioConfig cfg = load_scenario(path);
  const std::string hash = scenario_hash(cfg);
  const Scenario sc = build_scenario(cfg, g.seed);
  const Trajectory tr = integrate(sc);

  const fs::path dir = create_run_dir(g.out, hash);
  write_text(dir / "scenario.yaml", cfg.source_text);
  write_json(dir / "scenario.json", normalized(cfg));
  write_energies_csv(dir / "energies.csv", tr.energies);
  if (sc.store_states) write_states(dir / "states.bin", tr);

  Json s;
  s["scenario_hash"] = hash;
  s["timestamp"] = utc_timestamp();
  s["dimension"] = sc.model->dimension();
  s["nodes"] = sc.model->n();
  s["steps"] = tr.stats.steps;
  s["dt_effective"] = tr.stats.dt_effective;
  s["samples"] = tr.times.size();
  s["final_time"] = tr.times.back();

  std::vector<double> t = tr.times;
  std::vector<double> E, calE, H1;
  for (const auto& e : tr.energies) {
    E.push_back(e.E);
    calE.push_back(e.calE);
    H1.push_back(e.H1_norm_sq);
  }
  const FitWindow w = default_window(tr.times.back());
  s["fits"] = {{"E", fit_or_error(t, E, w, "E")}, {"calE", fit_or_error(t, calE, w, "calE")},
               {"H1", fit_or_error(t, H1, w, "H1")}};

  Json res = Json::object();
  if (!sc.nonlinear && tr.times.back() > 0.0)
    res["energy_identity"] = residual_or_error([&] { return energy_identity_residual(tr, 0.0, tr.times.back()); });
  if (tr.has_states()) {
    res["variation_of_parameters"] = residual_or_error([&] { return variation_of_parameters_residual(tr); });
    if (!sc.nonlinear)
      res["higher_identity"] = residual_or_error([&] { return higher_identity_residual(tr, 0.0, tr.times.back()); });
  }
  s["residuals"] = res;

  s["flags"] = {{"halted", tr.stats.halted},
                {"halt_time", tr.stats.halted ? Json(tr.stats.halt_time) : Json(nullptr)},
                {"halt_reason", tr.stats.halt_reason},
                {"compatibility_warning", tr.compatibility.warn},
                {"nonlinear", sc.nonlinear}};
  if (sc.nonlinear) s["flags"]["min_leading_coefficient"] = tr.stats.min_leading_coefficient;
  s["compatibility"] = {{"gamma0_residual", tr.compatibility.r0},
                        {"gamma1_residual", tr.compatibility.r1},
                        {"gamma0_relative", tr.compatibility.relative0},
                        {"gamma1_relative", tr.compatibility.relative1}};
  s["warnings"] = tr.warnings;
  write_json(dir / "summary.json", s);

  for (const auto& warning : tr.warnings) std::cerr << "warning: " << warning << '\n';
  if (tr.stats.halted) std::cerr << "halted at t = " << tr.stats.halt_time << ": " << tr.stats.halt_reason << '\n';
  std::cout << dir.string() << '\n';
  return ok;
}

struct SpectrumOptions {
  bool dense = false;
  bool iterative = false;
  std::string op = "u";
  int nev = 20;
  double shift = 0.0;
};

int cmd_spectrum(const Globals& g, const std::string& path, const SpectrumOptions& o) {
  const ScenarioConfig cfg = load_scenario(path);
  const std::string hash = scenario_hash(cfg);
  const auto model = make_model(cfg);
  if (o.op != "u" && o.op != "z") throw ConfigurationError("--operator must be u or z");
  if (o.dense && o.iterative) throw ConfigurationError("--dense and --iterative exclude each other");
  const Index dim = 3 * model->n();
  SpectrumMode mode = dim <= 3000 ? SpectrumMode::dense : SpectrumMode::iterative;
  if (o.dense) mode = SpectrumMode::dense;
  if (o.iterative) mode = SpectrumMode::iterative;
  std::optional<ZGenerators> z;
  if (o.op == "z") z = build_generator_z(model->ops, model->params);
  const BlockOperator& op = z ? z->A : model->generator;
  const SpectrumReport r = spectrum(op, mode, 10, o.nev, o.shift);

  const fs::path dir = create_run_dir(g.out, hash, "spectrum");
  write_text(dir / "scenario.yaml", cfg.source_text);
  std::ostringstream csv;
  csv << "re,im,residual\n" << std::setprecision(17);
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i) {
    csv << r.eigenvalues[i].real() << ',' << r.eigenvalues[i].imag() << ',';
    if (std::isnan(r.residuals[i]))
      csv << "nan";
    else
      csv << r.residuals[i];
    csv << '\n';
  }
  write_text(dir / "spectrum.csv", csv.str());
  Json s = {{"scenario_hash", hash},
            {"timestamp", utc_timestamp()},
            {"operator", r.op_name},
            {"dimension", r.dimension},
            {"count", r.eigenvalues.size()},
            {"abscissa", r.abscissa},
            {"backend", r.backend},
            {"mode", mode == SpectrumMode::dense ? "dense" : "iterative"},
            {"converged", r.converged}};
  write_json(dir / "summary.json", s);
  std::cout << dir.string() << '\n' << "abscissa " << std::setprecision(12) << r.abscissa << '\n';
  return ok;
}

std::vector<double> option_list(const Json& opts, const char* key, std::vector<double> fallback) {
  if (!opts.contains(key)) return fallback;
  try {
    return opts.at(key).get<std::vector<double>>();
  } catch (const Json::exception&) {
    throw ConfigurationError(std::string("experiment.options.") + key + ": expected a list of numbers");
  }
}

double option_number(const Json& opts, const char* key, double fallback) {
  if (!opts.contains(key)) return fallback;
  if (!opts.at(key).is_number()) throw ConfigurationError(std::string("experiment.options.") + key + ": expected a number");
  return opts.at(key).get<double>();
}

std::optional<FitWindow> option_window(const Json& opts) {
  if (!opts.contains("window")) return std::nullopt;
  const auto w = option_list(opts, "window", {});
  if (w.size() != 2) throw ConfigurationError("experiment.options.window: expected [t_a, t_b]");
  return FitWindow{w[0], w[1]};
}

int cmd_experiment(const Globals& g, std::string name, const std::string& path) {
  const ScenarioConfig cfg = load_scenario(path);
  if (name.empty()) name = cfg.experiment.name;
  if (name.empty()) throw ConfigurationError("no experiment name given on the command line or in the scenario");
  const Json& opts = cfg.experiment.options;
  const std::string hash = scenario_hash(cfg);

  Json metrics;
  std::string verdict = "exploratory";
  std::vector<std::tuple<std::string, std::string, std::string, std::vector<double>, std::vector<double>>> dats;

  if (name == "conservation") {
    const ConservationReport r = experiment_conservation(build_scenario(cfg, g.seed));
    const double tol = option_number(opts, "drift_tol", 1e-8);
    metrics = {{"max_drift", r.max_drift}, {"E1_initial", r.E1_initial}, {"dt", r.dt}, {"drift_tol", tol}};
    std::vector<double> drift;
    for (double e : r.E1) drift.push_back((e - r.E1_initial) / r.E1_initial);
    dats.emplace_back("E1_drift.dat", "t", "relative_E1_drift", r.t, drift);
    verdict = r.max_drift <= tol ? "pass" : "fail";
  } else if (name == "two_level") {
    const TwoLevelReport r = experiment_two_level(build_scenario(cfg, g.seed), option_window(opts));
    metrics = {{"omega_E", r.fit_E.omega},     {"omega_calE", r.fit_calE.omega}, {"fit_E", to_json(r.fit_E)},
               {"fit_calE", to_json(r.fit_calE)}, {"fit_tol", r.fit_tol},        {"transient_E", r.transient_E},
               {"transient_calE", r.transient_calE}, {"min_E", r.min_E},         {"monotone", r.monotone},
               {"notes", r.notes}};
    dats.emplace_back("E.dat", "t", "E", r.t, r.E);
    dats.emplace_back("calE.dat", "t", "calE", r.t, r.calE);
    verdict = r.pass ? "pass" : "fail";
  } else if (name == "growth") {
    const GrowthReport r = experiment_growth(build_scenario(cfg, g.seed));
    metrics = {{"growth", r.growth}, {"final_ratio", r.final_ratio}, {"detail", r.detail}};
    metrics["omega"] = r.omega ? Json(*r.omega) : Json(nullptr);
  } else if (name == "decay_rate") {
    const DecayRateReport r = experiment_decay_rate(build_scenario(cfg, g.seed), option_window(opts));
    metrics = {{"sigma", r.sigma},
               {"omega", r.fit.omega},
               {"fit", to_json(r.fit)},
               {"predicted", r.predicted},
               {"relative_gap", r.relative_gap},
               {"backend", r.backend}};
    verdict = r.pass ? "pass" : "fail";
  } else if (name == "smallness_sweep") {
    const auto betas = option_list(opts, "betas", {1e-3, 1e-2, 1e-1});
    const SweepResult r = experiment_smallness_sweep(build_scenario(cfg, g.seed), betas, g.threads);
    Json rows = Json::array();
    std::vector<double> bx, om, ce;
    for (const auto& row : r.rows) {
      Json j = {{"beta", row.beta},           {"global", row.global},     {"c_est", row.c_est},
                {"max_h1_ratio", row.max_h1_ratio}, {"end_time", row.end_time}, {"reason", row.reason}};
      j["omega"] = row.fit ? Json(row.fit->omega) : Json(nullptr);
      j["r2"] = row.fit ? Json(row.fit->r2) : Json(nullptr);
      rows.push_back(j);
      if (row.fit) {
        bx.push_back(row.beta);
        om.push_back(row.fit->omega);
        ce.push_back(row.c_est);
      }
    }
    metrics = {{"omega_linear", r.omega_linear},
               {"linear_fit", to_json(r.linear_fit)},
               {"T_run", r.T_run},
               {"rows", rows},
               {"checks",
                {{"existence_at_smallest_beta", r.check_existence},
                 {"omega_nondecreasing_as_beta_decreases", r.check_monotone},
                 {"omega_near_linear_at_smallest_beta", r.check_limit}}},
               {"flags_monotone", r.flags_monotone},
               {"c_est_spread", r.c_est_spread},
               {"anomalies", r.anomalies}};
    dats.emplace_back("omega_vs_beta.dat", "beta", "omega", bx, om);
    dats.emplace_back("c_est_vs_beta.dat", "beta", "C_est", bx, ce);
    verdict = r.pass ? "pass" : "fail";
  } else if (name == "signature") {
    const SignatureReport r = quadratic_signature(build_scenario(cfg, g.seed), option_number(opts, "beta", 0.05));
    metrics = {{"beta", r.beta}, {"deviation", r.deviation}, {"deviation_half", r.deviation_half}, {"ratio", r.ratio}};
    verdict = std::abs(r.ratio - 4.0) <= 0.5 ? "pass" : "fail";
  } else if (name == "geometry") {
    if (cfg.geometry.kind != "rectangle") throw ConfigurationError("the geometry experiment needs a rectangle");
    std::vector<std::string> variants{"left", "left,right", "none"};
    if (opts.contains("variants")) variants = opts.at("variants").get<std::vector<std::string>>();
    std::vector<GeometryCase> cases;
    for (const auto& v : variants) {
      ScenarioConfig c = cfg;
      c.geometry.gamma0 = v;
      c.geometry.allow_empty_gamma0 = v == "none";
      GeometryCase gc;
      gc.label = v;
      gc.scenario = build_scenario(c, g.seed);
      gc.x0 = cfg.geometry.x0;
      gc.basis_degree = static_cast<int>(option_number(opts, "basis_degree", 3));
      gc.delta_target = option_number(opts, "delta_target", 1.0);
      cases.push_back(std::move(gc));
    }
    Json rows = Json::array();
    std::vector<double> idx, om;
    for (const auto& row : experiment_geometry(cases)) {
      Json j = {{"label", row.label}, {"gamma0", row.gamma0}, {"field", row.field}, {"delta_h", row.delta_h},
                {"boundary_residual", row.boundary_residual}, {"note", row.note}};
      j["star_shaped"] = row.star_shaped ? Json(*row.star_shaped) : Json(nullptr);
      j["omega"] = row.omega ? Json(*row.omega) : Json(nullptr);
      rows.push_back(j);
      idx.push_back(static_cast<double>(idx.size()));
      om.push_back(row.omega.value_or(std::nan("")));
    }
    metrics = {{"cases", rows}};
    dats.emplace_back("omega_by_case.dat", "case_index", "omega", idx, om);
  } else {
    throw ConfigurationError("unknown experiment '" + name +
                             "' (conservation, two_level, growth, decay_rate, smallness_sweep, signature, geometry)");
  }

  const fs::path dir = create_run_dir(g.out, hash, "experiment-" + name);
  write_text(dir / "scenario.yaml", cfg.source_text);
  for (const auto& [file, xn, yn, x, y] : dats) write_dat(dir / file, xn, yn, x, y);
  const Json report = {{"experiment", name}, {"scenario_hash", hash}, {"metrics", metrics}, {"verdict", verdict}};
  write_json(dir / "experiment.json", report);
  std::cout << dir.string() << '\n' << name << ": " << verdict << '\n';
  if (verdict == "fail") throw VerdictFailure("experiment " + name + " failed its checks");
  return ok;
}

struct FieldOptions {
  int degree = 3;
  double delta = 1.0;
  std::string verify_only;
};

void print_certificates(const MultiplierField& h, const FieldReport& v) {
  std::cout << "origin " << h.origin << "\ndelta_h " << h.delta_h << "\nboundary_residual " << h.boundary_residual
            << "\nverified_min_eigenvalue " << v.min_eigenvalue << "\nverified_boundary_residual "
            << v.boundary_residual << "\nverified " << (v.pass ? "yes" : "no") << '\n';
}

int cmd_field(const Globals& g, const std::string& path, const FieldOptions& o) {
  const ScenarioConfig cfg = load_scenario(path);
  const std::string hash = scenario_hash(cfg);
  const Mesh mesh = make_mesh(cfg.geometry);
  const BoundaryPartition part = partition_boundary(mesh, cfg.geometry.gamma0);

  if (!o.verify_only.empty()) {
    std::ifstream in(o.verify_only);
    if (!in) throw ConfigurationError("cannot read field file '" + o.verify_only + "'");
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw ConfigurationError(o.verify_only + ": " + e.what());
    }
    MultiplierField h = field_from_json(j);
    const FieldReport v = verify_field(h, mesh, part);
    h.delta_h = v.min_eigenvalue;
    h.boundary_residual = v.boundary_residual;
    print_certificates(h, v);
    if (!v.pass) throw VerdictFailure("stored field does not re-certify");
    return ok;
  }

  const fs::path dir = create_run_dir(g.out, hash, "field");
  write_text(dir / "scenario.yaml", cfg.source_text);
  std::cout << dir.string() << '\n';
  if (cfg.geometry.x0) {
    const StarShapedReport star = check_star_shaped(mesh, part, *cfg.geometry.x0);
    std::cout << "star_shaped " << (star.pass ? "yes" : "no") << " (max (x - x0).nu = " << star.max_dot << ")\n";
  }
  try {
    const MultiplierField h = synthesize_multiplier_field(mesh, part, o.degree, o.delta);
    const FieldReport v = verify_field(h, mesh, part);
    write_json(dir / "field.json", to_json(h, v));
    print_certificates(h, v);
    if (!v.pass) throw VerdictFailure("synthesized field failed dense re-verification");
  } catch (const FieldSynthesisFailed& e) {
    write_json(dir / "field.json", {{"status", "infeasible"}, {"best_delta_h", e.best_delta()}, {"message", e.what()}});
    std::cout << "infeasible\nbest_delta_h " << e.best_delta() << '\n';
    throw VerdictFailure(e.what());
  }
  return ok;
}

// validates a scenario and runs quick structural checks on its discrete operators
int cmd_check(const Globals& g, const std::string& path) {
  const ScenarioConfig cfg = load_scenario(path);
  std::cout << "scenario_hash " << scenario_hash(cfg) << '\n' << normalized(cfg).dump(2) << '\n';
  const auto model = make_model(cfg);
  const ZGenerators z = build_generator_z(model->ops, model->params);
  const DissipativityReport d = dissipativity_check(model->ops, model->params, z.Ad, 20, g.seed);
  std::mt19937_64 rng(g.seed);
  std::normal_distribution<double> gauss;
  Vec L(3 * model->n());
  for (Index i = 0; i < L.size(); ++i) L[i] = gauss(rng);
  const ResolventReport r = resolvent_check(model->ops, model->params, z.Ad, 1.0, L, 20, g.seed);
  const bool pass = d.max_mismatch <= 1e-11 && d.max_form <= 0.0 && r.discrepancy <= 1e-10 && r.min_ks_form > 0.0;
  std::cout << "nodes " << model->n() << "\ndissipativity_mismatch " << d.max_mismatch << "\ndissipativity_max_form "
            << d.max_form << "\nresolvent_discrepancy " << r.discrepancy << "\nstructure " << (pass ? "ok" : "FAILED")
            << '\n';
  if (!pass) throw VerdictFailure("structural checks failed");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"JMGT boundary-stabilization lab"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "Directory for run outputs")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for random initial data and sampled checks");
  app.add_option("--threads", g.threads, "Parallel sweep points")->check(CLI::PositiveNumber);

  std::string scenario;
  auto* sim = app.add_subcommand("simulate", "Integrate a scenario and store the run");
  sim->add_option("scenario", scenario)->required();

  SpectrumOptions so;
  auto* spec = app.add_subcommand("spectrum", "Eigenvalues of the discrete generator");
  spec->add_option("scenario", scenario)->required();
  spec->add_flag("--dense", so.dense, "Full dense eigensolve (3N <= 3000)");
  spec->add_flag("--iterative", so.iterative, "Shift-invert Arnoldi near --shift");
  spec->add_option("--operator", so.op, "u or z")->capture_default_str();
  spec->add_option("--nev", so.nev, "Eigenvalues wanted in iterative mode")->capture_default_str();
  spec->add_option("--shift", so.shift, "Shift for iterative mode")->capture_default_str();

  std::string exp_name;
  auto* exp = app.add_subcommand("experiment", "Run a lab experiment");
  exp->add_option("name", exp_name)->required();
  exp->add_option("scenario", scenario)->required();

  FieldOptions fo;
  auto* field = app.add_subcommand("field", "Synthesize and certify a multiplier field");
  field->add_option("scenario", scenario)->required();
  field->add_option("--degree", fo.degree, "Polynomial degree of the basis")->capture_default_str();
  field->add_option("--delta", fo.delta, "Target lower bound for sym J(h)")->capture_default_str();
  field->add_option("--verify-only", fo.verify_only, "Re-certify a stored field.json");

  auto* check = app.add_subcommand("check", "Validate a scenario and its operators");
  check->add_option("scenario", scenario)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : validation;
  }

  try {
    if (*sim) return cmd_simulate(g, scenario);
    if (*spec) return cmd_spectrum(g, scenario, so);
    if (*exp) return cmd_experiment(g, exp_name, scenario);
    if (*field) return cmd_field(g, scenario, fo);
    if (*check) return cmd_check(g, scenario);
  } catch (const VerdictFailure& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return experiment_failed;
  } catch (const ConfigurationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return validation;
  } catch (const YAML::Exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return validation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return runtime;
  }
  return ok;
}
