#pragma once

#include "jmgt/evolution/initial_data.hpp"
#include "jmgt/evolution/stepper.hpp"

#include <chrono>

namespace jmgt {

struct Scenario {
  std::shared_ptr<const Model> model;
  StateVector initial;
  double T = 1.0;
  double dt = 1e-3;
  double theta = 0.5;
  bool nonlinear = false;
  bool corrector = true;
  int stride = 1;
  bool store_states = false;
  bool compatible_data = false;
  std::optional<double> degeneracy_margin;  // nonlinear runs default to 0.05 min(alpha)
  std::optional<double> h1_ceiling_factor;  // halt when the H1 norm exceeds factor x its initial value
};

struct SolverStats {
  long steps = 0;
  int factorizations = 0;
  double dt_effective = 0.0;
  double wall_seconds = 0.0;
  bool halted = false;
  double halt_time = 0.0;
  std::string halt_reason;
  double min_leading_coefficient = std::numeric_limits<double>::infinity();
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<EnergyReport> energies;
  SolverStats stats;
  CompatibilityResidual compatibility;
  std::vector<std::string> warnings;
  std::shared_ptr<const Model> model;

  bool has_states() const { return !states.empty() && states.size() == times.size(); }
};

inline void validate(const Scenario& sc) {
  if (!sc.model) throw ConfigurationError("scenario has no model");
  if (!(sc.T >= 0.0) || !std::isfinite(sc.T)) throw ConfigurationError("T must be nonnegative");
  if (!(sc.dt > 0.0) || !std::isfinite(sc.dt)) throw ConfigurationError("dt must be positive");
  if (sc.T > 0.0 && sc.dt > sc.T * (1 + 1e-12)) throw ConfigurationError("dt must not exceed T");
  if (sc.stride < 1) throw ConfigurationError("stride must be at least 1");
  if (sc.initial.size() != sc.model->n()) throw ConfigurationError("initial data length does not match the mesh");
  if (!sc.initial.finite()) throw ConfigurationError("initial data are not finite");
}

inline Trajectory integrate(const Scenario& sc) {
  validate(sc);
  const auto t_start = std::chrono::steady_clock::now();
  const Model& m = *sc.model;
  Trajectory tr;
  tr.model = sc.model;
  tr.compatibility = check_compatibility(sc.initial, m);
  if (tr.compatibility.warn)
    tr.warnings.push_back("initial data violate the compatibility conditions (relative residuals " +
                          std::to_string(tr.compatibility.relative0) + ", " +
                          std::to_string(tr.compatibility.relative1) + ")");

  StateVector s = sc.initial;
  s.t = 0.0;
  s.nonlinear = sc.nonlinear;
  auto record = [&](const StateVector& st) {
    tr.times.push_back(st.t);
    tr.energies.push_back(compute_energies(st, m));
    if (sc.store_states) tr.states.push_back(st);
  };
  record(s);
  if (sc.T == 0.0) return tr;

  const long nsteps = std::max(1L, static_cast<long>(std::ceil(sc.T / sc.dt - 1e-9)));
  const double dt = sc.T / static_cast<double>(nsteps);
  tr.stats.dt_effective = dt;
  Evolver ev(sc.model, dt, sc.theta, sc.corrector);
  tr.stats.factorizations = 1;

  const double margin = sc.degeneracy_margin.value_or(0.05 * m.ops.alpha.minCoeff());
  std::optional<double> ceiling;
  if (sc.h1_ceiling_factor) ceiling = *sc.h1_ceiling_factor * std::sqrt(tr.energies.front().H1_norm_sq);

  for (long i = 1; i <= nsteps; ++i) {
    s = sc.nonlinear ? ev.step_nonlinear(s) : ev.step_linear(s);
    s.t = i * dt;
    tr.stats.steps = i;
    if (!s.finite()) throw IntegratorError("non-finite state", i, s.t);
    const bool sample = (i % sc.stride == 0) || i == nsteps;
    if (sc.nonlinear) {
      std::optional<double> h1;
      if (sample && ceiling) h1 = h1_norm(s, m);
      const DegeneracyFlag flag = detect_degeneracy(s, m.ops.alpha, m.params, margin, h1, ceiling);
      tr.stats.min_leading_coefficient = std::min(tr.stats.min_leading_coefficient, flag.min_coefficient);
      if (flag.flagged) {
        record(s);
        tr.stats.halted = true;
        tr.stats.halt_time = s.t;
        tr.stats.halt_reason = flag.reason;
        break;
      }
    }
    if (sample) record(s);
  }
  tr.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return tr;
}

}  // namespace jmgt
