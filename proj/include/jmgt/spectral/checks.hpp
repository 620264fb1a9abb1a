#pragma once

#include "jmgt/assembly/model.hpp"
#include "jmgt/evolution/state.hpp"
#include "jmgt/spectral/spectrum.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace jmgt {

// <x, y>_H = x1' K y1 + (b/tau) x2' K y2 + x3' M y3
inline double h_inner(const DiscreteOperators& ops, const PhysicalParams& p, const Vec& x, const Vec& y) {
  const Index n = ops.n;
  return x.head(n).dot(ops.K * y.head(n)) + p.b() / p.tau * x.segment(n, n).dot(ops.K * y.segment(n, n)) +
         x.tail(n).dot(ops.mass * y.tail(n));
}

inline double dissipation_closed_form(const DiscreteOperators& ops, const PhysicalParams& p, const Vec& xi) {
  const Index n = ops.n;
  const Vec x1 = xi.head(n);
  const Vec x3 = xi.tail(n);
  return -p.c2_over_b() * x1.dot(ops.K * x1) - x3.dot(ops.mass * x3) - p.b() / p.tau * x3.dot(ops.damping * x3);
}

struct DissipativityReport {
  double max_form = -std::numeric_limits<double>::infinity();
  double max_mismatch = 0.0;
  int samples = 0;
};

inline DissipativityReport dissipativity_check(const DiscreteOperators& ops, const PhysicalParams& p,
                                               const BlockOperator& Ad, int n_samples,
                                               std::uint64_t seed = default_seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  DissipativityReport r;
  for (int s = 0; s < n_samples; ++s) {
    Vec xi(3 * ops.n);
    for (Index i = 0; i < xi.size(); ++i) xi[i] = g(rng);
    const double form = h_inner(ops, p, Ad.apply(xi), xi);
    const double closed = dissipation_closed_form(ops, p, xi);
    r.max_form = std::max(r.max_form, form);
    r.max_mismatch = std::max(r.max_mismatch, relative_gap(form, closed));
    ++r.samples;
  }
  return r;
}

// K_s = (s^2 + s) M + (b/tau)(K + s B1)
inline SpMat ks_matrix(const DiscreteOperators& ops, const PhysicalParams& p, double s) {
  return (s * s + s) * ops.mass + p.b() / p.tau * (ops.K + s * ops.damping);
}

// (s - A_d) psi = L solved by elimination through K_s
inline Vec resolvent_by_elimination(const DiscreteOperators& ops, const PhysicalParams& p, double s, const Vec& L) {
  const Index n = ops.n;
  const double b = p.b();
  const double c2 = p.c * p.c;
  const Vec f = L.head(n);
  const Vec g = L.segment(n, n);
  const Vec h = L.tail(n);
  Eigen::SimplicialLDLT<SpMat> Ks(ks_matrix(ops, p, s));
  if (Ks.info() != Eigen::Success) throw LinearSolverError("K_s factorization failed");
  Vec psi(3 * n);
  psi.head(n) = b * f / (b * s + c2);
  const Vec x3 = Ks.solve(s * (ops.mass * h) - b / p.tau * (ops.K * g));
  psi.tail(n) = x3;
  psi.segment(n, n) = (x3 + g) / s;
  return psi;
}

struct ResolventReport {
  double s = 0.0;
  double discrepancy = 0.0;
  double min_ks_form = std::numeric_limits<double>::infinity();
};

inline ResolventReport resolvent_check(const DiscreteOperators& ops, const PhysicalParams& p, const BlockOperator& Ad,
                                       double s, const Vec& L, int form_samples = 20, std::uint64_t seed = default_seed) {
  if (!(s > 0.0)) throw ConfigurationError("resolvent check needs s > 0");
  ResolventReport r;
  r.s = s;
  const Vec direct = Ad.solve_shifted(s, L);
  const Vec elim = resolvent_by_elimination(ops, p, s, L);
  r.discrepancy = (direct - elim).norm() / std::max(direct.norm(), 1e-300);
  const SpMat Ks = ks_matrix(ops, p, s);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  for (int k = 0; k < form_samples; ++k) {
    Vec x(ops.n);
    for (Index i = 0; i < x.size(); ++i) x[i] = g(rng);
    r.min_ks_form = std::min(r.min_ks_form, x.dot(Ks * x));
  }
  return r;
}

inline Vec matrix_exponential_oracle(const BlockOperator& op, double t, const Vec& phi0) {
  if (op.dim() > 200) throw ConfigurationError("matrix exponential oracle limited to dimension 200");
  if (t == 0.0) return phi0;
  const Mat A = op.to_dense();
  const Mat E = (t * A).exp();
  return E * phi0;
}

inline StateVector matrix_exponential_oracle(const BlockOperator& op, double t, const StateVector& s0) {
  return StateVector::from_stacked(matrix_exponential_oracle(op, t, s0.stacked()), s0.t + t);
}

}  // namespace jmgt
