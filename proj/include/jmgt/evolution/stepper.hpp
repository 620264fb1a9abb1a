#pragma once

#include "jmgt/diagnostics/energy.hpp"

#include <Eigen/SparseLU>

namespace jmgt {

// (W - theta dt A) x1 = (W + (1 - theta) dt A) x0 + dt load, load given in weighted form
class ThetaStepper {
 public:
  ThetaStepper(const BlockOperator& op, double dt, double theta) : op_(&op), dt_(dt), theta_(theta) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigurationError("time step must be positive");
    if (!(theta >= 0.5 && theta <= 1.0)) throw ConfigurationError("theta must lie in [0.5, 1]");
    lhs_ = op.weight() - theta * dt * op.action();
    rhs_ = op.weight() + (1.0 - theta) * dt * op.action();
    lu_ = std::make_shared<Eigen::SparseLU<SpMat>>();
    lu_->compute(lhs_);
    if (lu_->info() != Eigen::Success) throw LinearSolverError("theta-scheme matrix factorization failed");
  }

  Vec step(const Vec& x, const Vec& load) const {
    Vec r = rhs_ * x;
    if (load.size() > 0) r += dt_ * load;
    return lu_->solve(r);
  }

  double dt() const { return dt_; }
  double theta() const { return theta_; }
  const BlockOperator& op() const { return *op_; }

 private:
  const BlockOperator* op_;
  double dt_;
  double theta_;
  SpMat lhs_;
  SpMat rhs_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu_;
};

// third block (2k / tau)(u_t^2 + u u_tt), evaluated nodewise
inline Vec apply_nonlinearity(const StateVector& s, const PhysicalParams& p) {
  const Index n = s.size();
  Vec F = Vec::Zero(3 * n);
  F.tail(n) = (2.0 * p.k / p.tau) * (s.ut.cwiseProduct(s.ut) + s.u.cwiseProduct(s.utt)).eval();
  return F;
}

struct DegeneracyFlag {
  bool flagged = false;
  double min_coefficient = 0.0;
  std::string reason;
};

inline DegeneracyFlag detect_degeneracy(const StateVector& s, const Vec& alpha_nodal, const PhysicalParams& p,
                                        double margin, std::optional<double> h1_norm = std::nullopt,
                                        std::optional<double> h1_ceiling = std::nullopt) {
  DegeneracyFlag f;
  f.min_coefficient = (alpha_nodal - 2.0 * p.k * s.u).minCoeff();
  if (f.min_coefficient <= margin) {
    f.flagged = true;
    f.reason = "leading coefficient alpha - 2ku reached " + std::to_string(f.min_coefficient);
  } else if (h1_norm && h1_ceiling && *h1_norm > *h1_ceiling) {
    f.flagged = true;
    f.reason = "H1 norm " + std::to_string(*h1_norm) + " exceeded ceiling " + std::to_string(*h1_ceiling);
  }
  return f;
}

class Evolver {
 public:
  Evolver(std::shared_ptr<const Model> model, double dt, double theta = 0.5, bool corrector = true)
      : model_(std::move(model)), stepper_(model_->generator, dt, theta), corrector_(corrector) {}

  const Model& model() const { return *model_; }
  double dt() const { return stepper_.dt(); }

  // weighted load (0, 0, M f(t))
  Vec load(double t) const {
    const Index n = model_->n();
    Vec L = Vec::Zero(3 * n);
    if (model_->params.forcing) L.tail(n) = model_->ops.mass * forcing_nodal(*model_, t);
    return L;
  }

  Vec averaged_load(double t) const {
    if (!model_->params.forcing) return Vec();
    const double th = stepper_.theta();
    return th * load(t + dt()) + (1.0 - th) * load(t);
  }

  StateVector step_linear(const StateVector& s) const {
    Vec x = stepper_.step(s.stacked(), averaged_load(s.t));
    return StateVector::from_stacked(x, s.t + dt(), false);
  }

  StateVector step_nonlinear(const StateVector& s) const {
    const auto& W = model_->generator.weight();
    const Vec x0 = s.stacked();
    Vec base = averaged_load(s.t);
    if (base.size() == 0) base = Vec::Zero(x0.size());
    const Vec F0 = W * apply_nonlinearity(s, model_->params);
    Vec x = stepper_.step(x0, base + F0);
    if (corrector_) {
      const StateVector pred = StateVector::from_stacked(x, s.t + dt(), true);
      const Vec F1 = W * apply_nonlinearity(pred, model_->params);
      x = stepper_.step(x0, base + 0.5 * (F0 + F1));
    }
    return StateVector::from_stacked(x, s.t + dt(), true);
  }

 private:
  std::shared_ptr<const Model> model_;
  ThetaStepper stepper_;
  bool corrector_;
};

struct CompatibilityResidual {
  double r0 = 0.0;  // |lambda d_nu u0 + kappa0 u0| on gamma0
  double r1 = 0.0;  // |d_nu u0 + kappa1 u1| on gamma1
  double relative0 = 0.0;
  double relative1 = 0.0;
  bool warn = false;
};

// boundary residuals of the compatibility conditions, normal derivatives taken from the owning element
inline CompatibilityResidual check_compatibility(const StateVector& s0, const Model& m) {
  const Mesh& mesh = *m.mesh;
  const auto& ops = m.ops;
  const double lambda = m.params.lambda;
  CompatibilityResidual r;
  double s0sq = 0.0;
  double s1sq = 0.0;
  for (std::size_t f = 0; f < mesh.boundary.size(); ++f) {
    const auto& facet = mesh.boundary[f];
    const double dn = mesh.gradient(facet.cell, s0.u).dot(facet.normal);
    for (const auto& q : mesh.facet_quadrature(facet)) {
      double u0 = 0.0;
      double u1 = 0.0;
      for (int i = 0; i < facet.node_count; ++i) {
        u0 += q.shape[i] * s0.u[facet.nodes[i]];
        u1 += q.shape[i] * s0.ut[facet.nodes[i]];
      }
      if (ops.partition.is_gamma0(f)) {
        const double v = lambda * dn + ops.kappa0[f] * u0;
        r.r0 += q.weight * v * v;
        s0sq += q.weight * (lambda * lambda * dn * dn + ops.kappa0[f] * ops.kappa0[f] * u0 * u0);
      } else {
        const double v = dn + ops.kappa1[f] * u1;
        r.r1 += q.weight * v * v;
        s1sq += q.weight * (dn * dn + ops.kappa1[f] * ops.kappa1[f] * u1 * u1);
      }
    }
  }
  r.r0 = std::sqrt(r.r0);
  r.r1 = std::sqrt(r.r1);
  const double scale = std::sqrt(s0.u.dot(ops.K * s0.u) + s0.ut.dot(ops.K * s0.ut));
  const double floor = 1e-14;
  r.relative0 = r.r0 / std::max({std::sqrt(s0sq), scale, floor});
  r.relative1 = r.r1 / std::max({std::sqrt(s1sq), scale, floor});
  r.warn = r.relative0 > 1e-8 || r.relative1 > 1e-8;
  return r;
}

}  // namespace jmgt
