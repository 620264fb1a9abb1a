#pragma once

#include "jmgt/evolution/integrate.hpp"
#include "jmgt/geometry/multiplier_field.hpp"

namespace jmgt {

struct IdentityResidual {
  std::string name;
  double t0 = 0.0;
  double t1 = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double absolute = 0.0;
  double relative = 0.0;
  std::string time_rule = "trapezoidal";
  std::size_t samples = 0;

  void close(double floor = 1e-14) {
    absolute = std::abs(lhs - rhs);
    relative = absolute / std::max({std::abs(lhs), std::abs(rhs), floor});
  }
};

namespace detail {

inline std::pair<std::size_t, std::size_t> sample_range(const Trajectory& tr, double t0, double t1) {
  if (tr.times.empty()) throw DiagnosticError("empty trajectory");
  if (t1 < t0) throw DiagnosticError("identity interval is reversed");
  const double tol = 1e-9 * std::max(1.0, std::abs(tr.times.back()));
  std::size_t a = 0;
  while (a < tr.times.size() && tr.times[a] < t0 - tol) ++a;
  std::size_t b = a;
  while (b + 1 < tr.times.size() && tr.times[b + 1] <= t1 + tol) ++b;
  if (a >= tr.times.size() || std::abs(tr.times[a] - t0) > tol || std::abs(tr.times[b] - t1) > tol)
    throw DiagnosticError("identity endpoints must coincide with sample times");
  return {a, b};
}

template <class F>
double trapezoid(const Trajectory& tr, std::size_t a, std::size_t b, F&& value) {
  double s = 0.0;
  for (std::size_t i = a; i < b; ++i) s += 0.5 * (tr.times[i + 1] - tr.times[i]) * (value(i) + value(i + 1));
  return s;
}

inline void require_states(const Trajectory& tr) {
  if (!tr.has_states()) throw DiagnosticError("identity needs a trajectory with stored states");
}

}  // namespace detail

// E1(T) + int D_psi = E1(t) + int (f, z_t)
inline IdentityResidual energy_identity_residual(const Trajectory& tr, double t, double T) {
  const auto [a, b] = detail::sample_range(tr, t, T);
  if (b - a + 1 < 50) throw DiagnosticError("energy identity needs at least 50 samples in the interval");
  IdentityResidual r;
  r.name = "energy_identity";
  r.t0 = t;
  r.t1 = T;
  r.samples = b - a + 1;
  r.lhs = tr.energies[b].E1 + detail::trapezoid(tr, a, b, [&](std::size_t i) { return tr.energies[i].D_psi; });
  r.rhs = tr.energies[a].E1 + detail::trapezoid(tr, a, b, [&](std::size_t i) { return tr.energies[i].forcing_power; });
  r.close();
  return r;
}

// spatial pieces of the multiplier identity at one instant
struct MultiplierTerms {
  double boundary = 0.0;  // (tau/2) z_t^2 h.nu - (b/2)|grad z|^2 h.nu + b d_nu z M_h(z) on the boundary
  double source = 0.0;    // (gamma u_tt - f, M_h(z))
  double jacobian = 0.0;  // b (J(h) grad z, grad z)
  double div_grad = 0.0;  // (b/2)(z grad z, grad div h)
  double kinetic = 0.0;   // tau (z_t, M_h(z))
};

inline MultiplierTerms multiplier_terms(const Model& m, const MultiplierField& h, const StateVector& s) {
  const Mesh& mesh = *m.mesh;
  const auto& p = m.params;
  const double b = p.b();
  const double a = p.c2_over_b();
  const Vec z = s.z(a);
  const Vec zt = s.zt(a);
  const Vec f = forcing_nodal(m, s.t);
  MultiplierTerms out;
  const int npc = mesh.nodes_per_cell();
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    const Point gz = mesh.gradient(c, z);
    const auto& cell = mesh.cells[c];
    for (const auto& q : mesh.cell_quadrature(c)) {
      double zq = 0, ztq = 0, gq = 0, wq = 0, fq = 0;
      for (int i = 0; i < npc; ++i) {
        zq += q.shape[i] * z[cell[i]];
        ztq += q.shape[i] * zt[cell[i]];
        gq += q.shape[i] * m.ops.gamma[cell[i]];
        wq += q.shape[i] * s.utt[cell[i]];
        fq += q.shape[i] * f[cell[i]];
      }
      const Eigen::Matrix2d J = h.jacobian(q.x);
      const double Mh = h.value(q.x).dot(gz) + 0.5 * zq * J.trace();
      out.source += q.weight * (gq * wq - fq) * Mh;
      out.jacobian += q.weight * b * gz.dot(J * gz);
      out.div_grad += q.weight * 0.5 * b * zq * gz.dot(h.grad_divergence(q.x));
      out.kinetic += q.weight * p.tau * ztq * Mh;
    }
  }
  for (const auto& facet : mesh.boundary) {
    const Point gz = mesh.gradient(facet.cell, z);
    const double dn = gz.dot(facet.normal);
    for (const auto& q : mesh.facet_quadrature(facet)) {
      double zq = 0, ztq = 0;
      for (int i = 0; i < facet.node_count; ++i) {
        zq += q.shape[i] * z[facet.nodes[i]];
        ztq += q.shape[i] * zt[facet.nodes[i]];
      }
      const Point hv = h.value(q.x);
      const double hn = hv.dot(facet.normal);
      const double Mh = hv.dot(gz) + 0.5 * zq * h.divergence(q.x);
      out.boundary += q.weight * (0.5 * (p.tau * ztq * ztq - b * gz.squaredNorm()) * hn + b * dn * Mh);
    }
  }
  return out;
}

// integral of the boundary terms = int (gamma u_tt - f, M_h z) + [tau (z_t, M_h z)] + int b(J grad z, grad z)
//                                  + int (b/2)(z grad z, grad div h)
inline IdentityResidual multiplier_identity_residual(const Trajectory& tr, const MultiplierField& h, double s, double T) {
  detail::require_states(tr);
  if (!(h.delta_h > 0.0) || h.boundary_residual > 1e-10)
    throw DiagnosticError("multiplier identity needs a certified field");
  const auto [a, b] = detail::sample_range(tr, s, T);
  std::vector<MultiplierTerms> terms;
  for (std::size_t i = a; i <= b; ++i) terms.push_back(multiplier_terms(*tr.model, h, tr.states[i]));
  auto at = [&](std::size_t i) -> const MultiplierTerms& { return terms[i - a]; };
  IdentityResidual r;
  r.name = "multiplier_identity";
  r.t0 = s;
  r.t1 = T;
  r.samples = b - a + 1;
  r.lhs = detail::trapezoid(tr, a, b, [&](std::size_t i) { return at(i).boundary; });
  r.rhs = detail::trapezoid(tr, a, b, [&](std::size_t i) { return at(i).source + at(i).jacobian + at(i).div_grad; }) +
          at(b).kinetic - at(a).kinetic;
  r.close();
  return r;
}

// The time-independent balance for a P1 field z, whose Laplacian is the distribution
// -sum over interior facets of the normal-gradient jump:
//   b int_G [d_nu z M_h(z) - |grad z|^2 h.nu / 2]
//     = -b sum_E int_E [[d_n z]] {M_h(z)} + b (J grad z, grad z) + (b/2)(z grad z, grad div h)
inline IdentityResidual rellich_static_residual(const Model& m, const MultiplierField& h, const Vec& z) {
  const Mesh& mesh = *m.mesh;
  const double b = m.params.b();
  IdentityResidual r;
  r.name = "rellich_static";
  r.time_rule = "none";
  for (const auto& facet : mesh.boundary) {
    const Point gz = mesh.gradient(facet.cell, z);
    for (const auto& q : mesh.facet_quadrature(facet)) {
      double zq = 0;
      for (int i = 0; i < facet.node_count; ++i) zq += q.shape[i] * z[facet.nodes[i]];
      const Point hv = h.value(q.x);
      const double Mh = hv.dot(gz) + 0.5 * zq * h.divergence(q.x);
      r.lhs += q.weight * (b * gz.dot(facet.normal) * Mh - 0.5 * b * gz.squaredNorm() * hv.dot(facet.normal));
    }
  }
  double jump = 0.0;
  for (const auto& e : mesh.interior) {
    const Point ga = mesh.gradient(e.cell_a, z);
    const Point gb = mesh.gradient(e.cell_b, z);
    const double j = (ga - gb).dot(e.normal);
    const Point avg = 0.5 * (ga + gb);
    for (const auto& q : mesh.facet_quadrature(e)) {
      double zq = 0;
      for (int i = 0; i < e.node_count; ++i) zq += q.shape[i] * z[e.nodes[i]];
      jump += q.weight * j * (h.value(q.x).dot(avg) + 0.5 * zq * h.divergence(q.x));
    }
  }
  double vol = 0.0;
  for (Index c = 0; c < mesh.cell_count(); ++c) {
    const Point gz = mesh.gradient(c, z);
    const auto& cell = mesh.cells[c];
    for (const auto& q : mesh.cell_quadrature(c)) {
      double zq = 0;
      for (int i = 0; i < mesh.nodes_per_cell(); ++i) zq += q.shape[i] * z[cell[i]];
      vol += q.weight * (b * gz.dot(h.jacobian(q.x) * gz) + 0.5 * b * zq * gz.dot(h.grad_divergence(q.x)));
    }
  }
  r.rhs = -b * jump + vol;
  r.close();
  return r;
}

// b int (Lap z, Lap u) = tau [(z_t, Lap u) + |z|_K^2 / 2] + tau int |z_t|_B1^2
//                        + tau (c^2/b) int (z_t, Lap u) + int (gamma u_tt, Lap u) - int (f, Lap u)
inline IdentityResidual higher_identity_residual(const Trajectory& tr, double s, double t) {
  detail::require_states(tr);
  const auto [a, b_] = detail::sample_range(tr, s, t);
  const Model& m = *tr.model;
  const auto& ops = m.ops;
  const double b = m.params.b();
  const double tau = m.params.tau;
  const double c2b = m.params.c2_over_b();
  struct Row {
    double lhs, bnd, damp, cross, gam, force;
  };
  std::vector<Row> rows;
  for (std::size_t i = a; i <= b_; ++i) {
    const auto& st = tr.states[i];
    const Vec z = st.z(c2b);
    const Vec zt = st.zt(c2b);
    const Vec lu = ops.laplacian(st.u, st.ut);
    const Vec lz = ops.laplacian(z, zt);
    const Vec Mlu = ops.mass * lu;
    const Vec f = forcing_nodal(m, st.t);
    rows.push_back({b * lz.dot(Mlu), zt.dot(Mlu) + 0.5 * z.dot(ops.K * z), zt.dot(ops.damping * zt), zt.dot(Mlu),
                    st.utt.dot(ops.gamma_mass * lu), f.dot(Mlu)});
  }
  auto row = [&](std::size_t i) -> const Row& { return rows[i - a]; };
  IdentityResidual r;
  r.name = "higher_identity";
  r.t0 = s;
  r.t1 = t;
  r.samples = b_ - a + 1;
  r.lhs = detail::trapezoid(tr, a, b_, [&](std::size_t i) { return row(i).lhs; });
  r.rhs = tau * (row(b_).bnd - row(a).bnd) + detail::trapezoid(tr, a, b_, [&](std::size_t i) {
            const Row& q = row(i);
            return tau * q.damp + tau * c2b * q.cross + q.gam - q.force;
          });
  r.close();
  return r;
}

// max over samples of |u(t) - e^{-(c^2/b)t} u0 - int_0^t e^{-(c^2/b)(t-s)} z(s) ds|_K
inline IdentityResidual variation_of_parameters_residual(const Trajectory& tr) {
  detail::require_states(tr);
  const Model& m = *tr.model;
  const double a = m.params.c2_over_b();
  const auto& K = m.ops.K;
  const Vec& u0 = tr.states.front().u;
  const double t0 = tr.times.front();
  IdentityResidual r;
  r.name = "variation_of_parameters";
  r.t0 = t0;
  r.t1 = tr.times.back();
  r.samples = tr.times.size();
  // C(t) = int_0^t e^{-a(t-s)} z(s) ds, advanced sample to sample
  Vec C = Vec::Zero(u0.size());
  double worst = 0.0;
  double norm_max = 0.0;
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double t = tr.times[i] - t0;
    if (i > 0) {
      const double h = tr.times[i] - tr.times[i - 1];
      const double e = std::exp(-a * h);
      C = e * C + 0.5 * h * (e * tr.states[i - 1].z(a) + tr.states[i].z(a));
    }
    const Vec rhs = std::exp(-a * t) * u0 + C;
    const Vec d = tr.states[i].u - rhs;
    const double res = std::sqrt(std::max(0.0, d.dot(K * d)));
    const double nu = std::sqrt(std::max(0.0, tr.states[i].u.dot(K * tr.states[i].u)));
    norm_max = std::max(norm_max, nu);
    if (res >= worst) {
      worst = res;
      r.lhs = nu;
      r.rhs = std::sqrt(std::max(0.0, rhs.dot(K * rhs)));
    }
  }
  r.absolute = worst;
  r.relative = worst / std::max(norm_max, 1e-14);
  return r;
}

}  // namespace jmgt
