#pragma once

#include "jmgt/evolution/state.hpp"

namespace jmgt {

struct EnergyReport {
  double t = 0.0;
  double E0 = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
  double E = 0.0;
  double calE = 0.0;
  double D_psi = 0.0;
  double H_norm_sq = 0.0;
  double H1_norm_sq = 0.0;
  double bd_damp = 0.0;   // |sqrt(kappa1) z_t|^2 on gamma1
  double int_damp = 0.0;  // |sqrt(gamma) u_tt|^2
  double forcing_power = 0.0;  // (f, z_t)
};

inline Vec forcing_nodal(const Model& m, double t) {
  if (!m.params.forcing) return Vec::Zero(m.n());
  const auto& f = *m.params.forcing;
  return m.mesh->interpolate([&](const Point& x) { return f(x, t); });
}

inline EnergyReport compute_energies(const StateVector& s, const Model& m) {
  const auto& ops = m.ops;
  const auto& p = m.params;
  const double b = p.b();
  const double a = p.c2_over_b();
  const Vec z = s.z(a);
  const Vec zt = s.zt(a);
  const Vec Ku = ops.K * s.u;
  const Vec Kv = ops.K * s.ut;
  const Vec lap = ops.laplacian(s.u, s.ut);

  EnergyReport r;
  r.t = s.t;
  const double gamma_v = s.ut.dot(ops.gamma_mass * s.ut);
  r.E1 = 0.5 * b * z.dot(ops.K * z) + 0.5 * p.tau * zt.dot(ops.mass * zt) + 0.5 * a * gamma_v;
  r.E0 = 0.5 * s.ut.dot(ops.alpha_mass * s.ut) + 0.5 * p.c * p.c * s.u.dot(Ku);
  const double lap_sq = lap.dot(ops.mass * lap);
  r.E2 = 0.5 * b * lap_sq;
  r.E = r.E0 + r.E1;
  r.calE = r.E + r.E2;
  r.bd_damp = zt.dot(ops.damping * zt);
  r.int_damp = s.utt.dot(ops.gamma_mass * s.utt);
  r.D_psi = b * r.bd_damp + r.int_damp;
  r.H_norm_sq = s.u.dot(Ku) + s.ut.dot(Kv) + s.utt.dot(ops.mass * s.utt);
  r.H1_norm_sq = r.H_norm_sq + lap_sq + s.u.dot(ops.robin_sq * s.u) + s.ut.dot(ops.damping_sq * s.ut);
  if (p.forcing) r.forcing_power = zt.dot(ops.mass * forcing_nodal(m, s.t));
  return r;
}

inline double h_norm(const StateVector& s, const Model& m) { return std::sqrt(compute_energies(s, m).H_norm_sq); }
inline double h1_norm(const StateVector& s, const Model& m) { return std::sqrt(compute_energies(s, m).H1_norm_sq); }

}  // namespace jmgt
