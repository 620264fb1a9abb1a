#pragma once

#include "jmgt/evolution/integrate.hpp"
#include "jmgt/geometry/multiplier_field.hpp"
#include "jmgt/lab/fit.hpp"
#include "jmgt/spectral/spectrum.hpp"

#include <future>
#include <thread>

namespace jmgt {

struct ConservationReport {
  double max_drift = 0.0;
  double E1_initial = 0.0;
  double dt = 0.0;
  std::vector<double> t;
  std::vector<double> E1;
};

struct TwoLevelReport {
  DecayFit fit_E;
  DecayFit fit_calE;
  double fit_tol = 0.0;
  double transient_E = 0.0;
  double transient_calE = 0.0;
  double min_E = 0.0;
  bool monotone = true;
  bool pass = false;
  std::vector<std::string> notes;
  std::vector<double> t;
  std::vector<double> E;
  std::vector<double> calE;
};

struct GrowthReport {
  bool growth = false;
  std::optional<double> omega;
  double final_ratio = 0.0;
  std::string detail;
};

struct DecayRateReport {
  double sigma = 0.0;
  DecayFit fit;
  double predicted = 0.0;
  double relative_gap = 0.0;
  std::string backend;
  bool pass = false;
};

struct SweepRow {
  double beta = 0.0;
  bool global = false;
  std::string reason;
  std::optional<DecayFit> fit;
  double c_est = 0.0;
  double max_h1_ratio = 0.0;
  double end_time = 0.0;
};

struct SweepResult {
  DecayFit linear_fit;
  double omega_linear = 0.0;
  double T_run = 0.0;
  std::vector<SweepRow> rows;  // beta ascending
  bool check_existence = false;
  bool check_monotone = false;
  bool check_limit = false;
  bool flags_monotone = true;
  double c_est_spread = 0.0;
  std::vector<std::string> anomalies;
  bool pass = false;
};

struct SignatureReport {
  double beta = 0.0;
  double deviation = 0.0;
  double deviation_half = 0.0;
  double ratio = 0.0;
};

struct GeometryCase {
  std::string label;
  Scenario scenario;
  std::optional<Point> x0;
  int basis_degree = 3;
  double delta_target = 1.0;
};

struct GeometryRow {
  std::string label;
  std::string gamma0;
  std::optional<bool> star_shaped;  // unset when no x0 is given
  double star_max = 0.0;
  std::string field;  // analytic | synthesized | infeasible | not required
  double delta_h = 0.0;
  double boundary_residual = 0.0;
  std::optional<double> omega;
  std::string note;
};

namespace detail {

inline std::vector<double> series(const Trajectory& tr, double EnergyReport::*field) {
  std::vector<double> v;
  v.reserve(tr.energies.size());
  for (const auto& e : tr.energies) v.push_back(e.*field);
  return v;
}

inline std::vector<double> facet_values_on(const Model& m, BoundaryTag tag, const std::vector<double>& per_facet) {
  std::vector<double> out;
  for (std::size_t f = 0; f < per_facet.size(); ++f)
    if (m.ops.partition.tags[f] == tag) out.push_back(per_facet[f]);
  return out;
}

inline Scenario with_amplitude(const Scenario& sc, const StateVector& shape, double h_size) {
  Scenario out = sc;
  const double n = std::sqrt(compute_energies(shape, *sc.model).H_norm_sq);
  if (!(n > 0.0)) throw ConfigurationError("initial data shape has zero H norm");
  out.initial = shape.scaled(h_size / n);
  return out;
}

}  // namespace detail

inline ConservationReport experiment_conservation(const Scenario& sc) {
  const Model& m = *sc.model;
  for (double k1 : detail::facet_values_on(m, BoundaryTag::gamma1, m.ops.kappa1))
    if (k1 != 0.0) throw ExperimentPreconditionError("conservation needs kappa1 = 0 on gamma1, found " + std::to_string(k1));
  const Vec gamma = m.ops.gamma;
  if (gamma.size() > 0 && gamma.cwiseAbs().maxCoeff() > 1e-14)
    throw ExperimentPreconditionError("conservation needs gamma = 0 (alpha at the critical value)");
  if (m.params.forcing) throw ExperimentPreconditionError("conservation needs zero forcing");
  if (sc.nonlinear) throw ExperimentPreconditionError("conservation is a linear experiment");
  const Trajectory tr = integrate(sc);
  ConservationReport r;
  r.dt = tr.stats.dt_effective;
  r.t = tr.times;
  r.E1 = detail::series(tr, &EnergyReport::E1);
  r.E1_initial = r.E1.front();
  if (!(r.E1_initial > 0.0)) throw ExperimentPreconditionError("initial E1 must be positive");
  for (double e : r.E1) r.max_drift = std::max(r.max_drift, std::abs(e - r.E1_initial) / r.E1_initial);
  return r;
}

inline void require_stability_setting(const Scenario& sc) {
  const Model& m = *sc.model;
  if (m.ops.gamma.size() > 0 && m.ops.gamma.minCoeff() < -1e-14)
    throw ExperimentPreconditionError("stability experiments need gamma >= 0");
  for (double k1 : detail::facet_values_on(m, BoundaryTag::gamma1, m.ops.kappa1))
    if (!(k1 > 0.0)) throw ExperimentPreconditionError("stability experiments need kappa1 > 0 on gamma1");
}

inline TwoLevelReport experiment_two_level(const Scenario& sc, std::optional<FitWindow> window = std::nullopt) {
  require_stability_setting(sc);
  if (!sc.compatible_data && check_compatibility(sc.initial, *sc.model).warn)
    throw ExperimentPreconditionError("two-level decay needs compatible initial data");
  const Trajectory tr = integrate(sc);
  if (tr.stats.halted) throw ExperimentPreconditionError("run halted: " + tr.stats.halt_reason);
  TwoLevelReport r;
  r.t = tr.times;
  r.E = detail::series(tr, &EnergyReport::E);
  r.calE = detail::series(tr, &EnergyReport::calE);
  const FitWindow w = window.value_or(default_window(sc.T));
  r.fit_E = fit_decay_rate(r.t, r.E, w, "E");
  r.fit_calE = fit_decay_rate(r.t, r.calE, w, "calE");
  r.fit_tol = 0.05 * std::abs(r.fit_E.omega);
  r.min_E = *std::min_element(r.E.begin(), r.E.end());
  r.transient_E = *std::max_element(r.E.begin(), r.E.end()) / r.E.front();
  r.transient_calE = *std::max_element(r.calE.begin(), r.calE.end()) / r.calE.front();

  if (r.fit_E.omega > 0.0) {
    const double gap = 5.0 / r.fit_E.omega;
    for (std::size_t i = 0; i < r.t.size(); ++i) {
      if (r.t[i] < w.t_a) continue;
      std::size_t j = i;
      while (j < r.t.size() && r.t[j] < r.t[i] + gap) ++j;
      if (j == r.t.size()) break;
      if (!(r.E[j] < r.E[i])) {
        r.monotone = false;
        r.notes.push_back("E(" + std::to_string(r.t[j]) + ") >= E(" + std::to_string(r.t[i]) + ")");
        break;
      }
    }
  }
  const bool positive = r.fit_E.omega > 0.0 && r.fit_calE.omega > 0.0;
  const bool ordered = r.fit_calE.omega <= r.fit_E.omega + r.fit_tol;
  if (!positive) r.notes.push_back("a fitted rate is not positive");
  if (!ordered) r.notes.push_back("omega_calE exceeds omega_E by more than the fit tolerance");
  if (r.min_E < 0.0) r.notes.push_back("negative energy sample");
  r.pass = positive && ordered && r.monotone && r.min_E >= 0.0;
  return r;
}

// gamma < 0 somewhere with no boundary damping: the energy is expected to grow
inline GrowthReport experiment_growth(const Scenario& sc) {
  const Trajectory tr = integrate(sc);
  GrowthReport r;
  const auto E = detail::series(tr, &EnergyReport::E);
  r.final_ratio = E.back() / E.front();
  try {
    const DecayFit f = fit_decay_rate(tr.times, E, default_window(sc.T), "E");
    r.omega = f.omega;
    r.growth = f.omega < 0.0;
    r.detail = "fitted omega = " + std::to_string(f.omega);
  } catch (const FitError& e) {
    r.growth = true;
    r.detail = e.what();
  }
  return r;
}

// the real (or imaginary) part of the rightmost eigenvector, scaled to H-size one;
// a run from this state decays exactly at the spectral abscissa
inline StateVector rightmost_mode(const Model& m, double* abscissa = nullptr) {
  const SpectrumReport spec = spectrum(m.generator, SpectrumMode::dense, 0);
  const Complex lambda = spec.eigenvalues.front();
  const CVec v = refine_eigenpair(m.generator, lambda, 4).second;
  const Vec re = v.real();
  const Vec im = v.imag();
  StateVector s = StateVector::from_stacked(re.norm() >= im.norm() ? re : im, 0.0);
  s = s.scaled(1.0 / std::sqrt(compute_energies(s, m).H_norm_sq));
  if (abscissa) *abscissa = spec.abscissa;
  return s;
}

// fitted energy rate against twice the spectral abscissa of the discrete generator
inline DecayRateReport experiment_decay_rate(const Scenario& sc, std::optional<FitWindow> window = std::nullopt) {
  require_stability_setting(sc);
  DecayRateReport r;
  const SpectrumReport spec = spectrum(sc.model->generator, SpectrumMode::dense, 0);
  r.sigma = spec.abscissa;
  r.backend = spec.backend;
  const Trajectory tr = integrate(sc);
  r.fit = fit_decay_rate(tr.times, detail::series(tr, &EnergyReport::E), window.value_or(default_window(sc.T)), "E");
  r.predicted = 2.0 * std::abs(r.sigma);
  r.relative_gap = std::abs(r.fit.omega - r.predicted) / r.predicted;
  r.pass = r.sigma < 0.0 && r.relative_gap <= 0.1;
  return r;
}

namespace detail {

inline SweepRow sweep_point(const Scenario& base, const StateVector& shape, double beta, double T_run) {
  Scenario sc = with_amplitude(base, shape, beta);
  sc.T = T_run;
  sc.nonlinear = true;
  sc.store_states = true;
  sc.h1_ceiling_factor = 10.0;
  SweepRow row;
  row.beta = beta;
  Trajectory tr;
  try {
    tr = integrate(sc);
  } catch (const IntegratorError& e) {
    row.reason = e.what();
    row.end_time = e.time();
    return row;
  }
  const Model& m = *sc.model;
  row.end_time = tr.times.back();
  const auto h1 = series(tr, &EnergyReport::H1_norm_sq);
  for (double v : h1) row.max_h1_ratio = std::max(row.max_h1_ratio, std::sqrt(v / h1.front()));
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const Vec F = apply_nonlinearity(tr.states[i], m.params).tail(m.n());
    const double hn = std::sqrt(tr.energies[i].H_norm_sq);
    const double h1n = std::sqrt(tr.energies[i].H1_norm_sq);
    if (hn * h1n > 0.0) row.c_est = std::max(row.c_est, std::sqrt(F.dot(m.ops.mass * F)) / (hn * h1n));
  }
  row.global = !tr.stats.halted;
  if (tr.stats.halted) {
    row.reason = tr.stats.halt_reason;
    return row;
  }
  try {
    row.fit = fit_decay_rate(tr.times, h1, default_window(sc.T), "H1");
  } catch (const FitError& e) {
    row.reason = e.what();
  }
  return row;
}

}  // namespace detail

// base.initial fixes the data shape; each run rescales it to H-size beta
inline SweepResult experiment_smallness_sweep(const Scenario& base, std::vector<double> betas, int threads = 1) {
  if (betas.empty()) throw ConfigurationError("sweep needs at least one beta");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw ConfigurationError("sweep betas must be positive");
    if (i > 0 && !(betas[i] > betas[i - 1])) throw ConfigurationError("sweep betas must be strictly increasing");
  }
  require_stability_setting(base);
  SweepResult r;

  Scenario lin = base;
  lin.nonlinear = false;
  lin.store_states = false;
  const Trajectory tl = integrate(lin);
  r.linear_fit = fit_decay_rate(tl.times, detail::series(tl, &EnergyReport::H1_norm_sq), default_window(base.T), "H1");
  r.omega_linear = r.linear_fit.omega;
  if (!(r.omega_linear > 0.0)) throw ExperimentPreconditionError("the linear reference run does not decay");
  r.T_run = std::max(base.T, 20.0 / r.omega_linear);

  r.rows.resize(betas.size());
  const std::size_t width = static_cast<std::size_t>(std::max(1, threads));
  for (std::size_t start = 0; start < betas.size(); start += width) {
    std::vector<std::future<SweepRow>> jobs;
    const std::size_t stop = std::min(betas.size(), start + width);
    for (std::size_t i = start; i < stop; ++i)
      jobs.push_back(std::async(width > 1 ? std::launch::async : std::launch::deferred, detail::sweep_point,
                                std::cref(base), std::cref(base.initial), betas[i], r.T_run));
    for (std::size_t i = start; i < stop; ++i) r.rows[i] = jobs[i - start].get();
  }

  const double tol = 0.05 * r.omega_linear;
  const SweepRow& smallest = r.rows.front();
  r.check_existence = smallest.global && smallest.fit && smallest.fit->omega >= 0.5 * r.omega_linear;
  r.check_limit = smallest.fit && std::abs(smallest.fit->omega - r.omega_linear) <= 0.1 * r.omega_linear;
  r.check_monotone = true;
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    const auto& lo = r.rows[i - 1];
    const auto& hi = r.rows[i];
    if (!lo.fit || !hi.fit) continue;
    if (lo.fit->omega < hi.fit->omega - tol) {
      r.check_monotone = false;
      r.anomalies.push_back("omega at beta " + std::to_string(lo.beta) + " is below omega at beta " +
                            std::to_string(hi.beta));
    }
  }
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    if (!r.rows[i - 1].global && r.rows[i].global) {
      r.flags_monotone = false;
      r.anomalies.push_back("existence flag not monotone at beta " + std::to_string(r.rows[i].beta));
    }
  }
  double cmin = std::numeric_limits<double>::infinity();
  double cmax = 0.0;
  bool any_global = false;
  for (const auto& row : r.rows) {
    if (!row.global) continue;
    any_global = true;
    cmin = std::min(cmin, row.c_est);
    cmax = std::max(cmax, row.c_est);
  }
  r.c_est_spread = any_global && cmin > 0.0 ? cmax / cmin - 1.0 : std::numeric_limits<double>::quiet_NaN();
  if (!any_global) r.anomalies.push_back("every beta failed: " + r.rows.front().reason);
  r.pass = any_global && r.check_existence && r.check_monotone && r.check_limit;
  return r;
}

// max_t |Phi_nl - Phi_lin|_H for data of H-size beta
inline double nonlinear_deviation(const Scenario& base, double beta) {
  Scenario lin = detail::with_amplitude(base, base.initial, beta);
  lin.store_states = true;
  lin.nonlinear = false;
  Scenario nl = lin;
  nl.nonlinear = true;
  const Trajectory a = integrate(lin);
  const Trajectory b = integrate(nl);
  if (b.stats.halted) throw ExperimentPreconditionError("nonlinear run halted: " + b.stats.halt_reason);
  double dev = 0.0;
  for (std::size_t i = 0; i < a.states.size(); ++i) {
    StateVector d = b.states[i];
    d.u -= a.states[i].u;
    d.ut -= a.states[i].ut;
    d.utt -= a.states[i].utt;
    dev = std::max(dev, std::sqrt(compute_energies(d, *base.model).H_norm_sq));
  }
  return dev;
}

inline SignatureReport quadratic_signature(const Scenario& base, double beta) {
  SignatureReport r;
  r.beta = beta;
  r.deviation = nonlinear_deviation(base, beta);
  r.deviation_half = nonlinear_deviation(base, 0.5 * beta);
  r.ratio = r.deviation / r.deviation_half;
  return r;
}

inline std::vector<GeometryRow> experiment_geometry(const std::vector<GeometryCase>& cases) {
  std::vector<GeometryRow> rows;
  for (const auto& gc : cases) {
    const Model& m = *gc.scenario.model;
    GeometryRow row;
    row.label = gc.label;
    for (Side s : m.partition.gamma0_sides) row.gamma0 += (row.gamma0.empty() ? "" : ",") + to_string(s);
    if (m.partition.gamma0_empty()) {
      row.gamma0 = "none";
      row.star_shaped = true;
      row.field = "not required";
    } else {
      if (gc.x0) {
        const StarShapedReport star = check_star_shaped(*m.mesh, m.partition, *gc.x0);
        row.star_shaped = star.pass;
        row.star_max = star.max_dot;
      }
      try {
        const MultiplierField h = synthesize_multiplier_field(*m.mesh, m.partition, gc.basis_degree, gc.delta_target);
        row.field = h.origin;
        row.delta_h = h.delta_h;
        row.boundary_residual = h.boundary_residual;
      } catch (const FieldSynthesisFailed& e) {
        row.field = "infeasible";
        row.delta_h = e.best_delta();
      }
    }
    try {
      const Trajectory tr = integrate(gc.scenario);
      row.omega = fit_decay_rate(tr.times, detail::series(tr, &EnergyReport::E), default_window(gc.scenario.T), "E").omega;
    } catch (const FitError& e) {
      row.note = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace jmgt
