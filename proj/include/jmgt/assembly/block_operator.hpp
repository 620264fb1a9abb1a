#pragma once

#include "jmgt/assembly/operators.hpp"

#include <Eigen/SparseLU>

#include <complex>

namespace jmgt {

enum class OperatorKind { generator_u, generator_z, generator_z_dissipative, perturbation, transform, custom };

inline std::string to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::generator_u: return "A_u";
    case OperatorKind::generator_z: return "A_z";
    case OperatorKind::generator_z_dissipative: return "A_d";
    case OperatorKind::perturbation: return "P";
    case OperatorKind::transform: return "M";
    case OperatorKind::custom: return "custom";
  }
  return "?";
}

namespace detail {

// assembles a 3x3 block sparse matrix from (row, col, block) entries
inline SpMat block3(Index n, std::initializer_list<std::tuple<int, int, SpMat>> blocks) {
  std::vector<Triplet> t;
  for (const auto& [bi, bj, B] : blocks)
    for (Index k = 0; k < B.outerSize(); ++k)
      for (SpMat::InnerIterator it(B, k); it; ++it)
        if (it.value() != 0.0) t.emplace_back(bi * n + it.row(), bj * n + it.col(), it.value());
  SpMat A(3 * n, 3 * n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

inline SpMat identity(Index n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

}  // namespace detail

// The operator x -> W^{-1} A x for a block-diagonal SPD weight W and a sparse action A.
// Every discrete generator has the form W x' = A x with W = diag(I, I, tau M).
class BlockOperator {
 public:
  BlockOperator() = default;

  BlockOperator(OperatorKind kind, Index n_nodes, SpMat weight, SpMat action)
      : kind_(kind), n_nodes_(n_nodes), weight_(std::move(weight)), action_(std::move(action)) {
    if (weight_.rows() != action_.rows() || action_.rows() != action_.cols())
      throw ConfigurationError("block operator: inconsistent sizes");
    SpMat I = detail::identity(weight_.rows());
    identity_weight_ = (weight_ - I).norm() == 0.0;
    if (!identity_weight_) {
      weight_solver_ = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(weight_);
      if (weight_solver_->info() != Eigen::Success) throw LinearSolverError("weight factorization failed");
    }
  }

  OperatorKind kind() const { return kind_; }
  std::string name() const { return to_string(kind_); }
  Index dim() const { return action_.rows(); }
  Index n_nodes() const { return n_nodes_; }
  const SpMat& weight() const { return weight_; }
  const SpMat& action() const { return action_; }

  Vec solve_weight(const Vec& r) const { return identity_weight_ ? r : Vec(weight_solver_->solve(r)); }

  Vec apply(const Vec& x) const { return solve_weight(action_ * x); }

  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd out(x.size());
    out.real() = apply(Vec(x.real()));
    out.imag() = apply(Vec(x.imag()));
    return out;
  }

  // (s - op)^{-1} r, through (s W - A) x = W r
  Vec solve_shifted(double s, const Vec& r) const {
    Eigen::SparseLU<SpMat> lu;
    SpMat S = s * weight_ - action_;
    lu.compute(S);
    if (lu.info() != Eigen::Success) throw LinearSolverError("shifted system is singular");
    return lu.solve(weight_ * r);
  }

  Mat to_dense() const {
    Mat A = Mat(action_);
    if (identity_weight_) return A;
    return weight_solver_->solve(A);
  }

  SpMat block(int i, int j) const {
    const Index n = n_nodes_;
    return action_.block(i * n, j * n, n, n);
  }

 private:
  OperatorKind kind_ = OperatorKind::custom;
  Index n_nodes_ = 0;
  SpMat weight_;
  SpMat action_;
  bool identity_weight_ = true;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> weight_solver_;
};

inline SpMat generator_weight(const DiscreteOperators& ops, const PhysicalParams& p) {
  const SpMat I = detail::identity(ops.n);
  return detail::block3(ops.n, {{0, 0, I}, {1, 1, I}, {2, 2, SpMat(p.tau * ops.mass)}});
}

// tau M u''' + M_alpha u'' + c^2 K u + (b K + c^2 B1) u' + b B1 u'' = M f
inline BlockOperator build_generator_u(const DiscreteOperators& ops, const PhysicalParams& p) {
  const double b = p.b();
  const double c2 = p.c * p.c;
  const SpMat I = detail::identity(ops.n);
  SpMat action = detail::block3(ops.n, {{0, 1, I},
                                        {1, 2, I},
                                        {2, 0, SpMat(-c2 * ops.K)},
                                        {2, 1, SpMat(-(c2 * ops.damping + b * ops.K))},
                                        {2, 2, SpMat(-(b * ops.damping + ops.alpha_mass))}});
  return {OperatorKind::generator_u, ops.n, generator_weight(ops, p), std::move(action)};
}

inline BlockOperator build_transform_M(const PhysicalParams& p, Index n_nodes) {
  if (!(p.b() > 0.0)) throw ParameterError("b must be positive");
  const double a = p.c2_over_b();
  const SpMat I = detail::identity(n_nodes);
  SpMat action = detail::block3(n_nodes, {{0, 0, I}, {1, 0, SpMat(a * I)}, {1, 1, I}, {2, 1, SpMat(a * I)}, {2, 2, I}});
  return {OperatorKind::transform, n_nodes, detail::identity(3 * n_nodes), std::move(action)};
}

inline BlockOperator build_transform_M_inverse(const PhysicalParams& p, Index n_nodes) {
  const double a = p.c2_over_b();
  const SpMat I = detail::identity(n_nodes);
  SpMat action = detail::block3(
      n_nodes, {{0, 0, I}, {1, 0, SpMat(-a * I)}, {1, 1, I}, {2, 0, SpMat(a * a * I)}, {2, 1, SpMat(-a * I)}, {2, 2, I}});
  return {OperatorKind::custom, n_nodes, detail::identity(3 * n_nodes), std::move(action)};
}

struct ZGenerators {
  BlockOperator A;
  BlockOperator Ad;
  BlockOperator P;
};

// state (u, z, z_t) with z = u_t + (c^2/b) u
inline ZGenerators build_generator_z(const DiscreteOperators& ops, const PhysicalParams& p) {
  const double b = p.b();
  const double a = p.c2_over_b();
  const SpMat I = detail::identity(ops.n);
  const SpMat& Mg = ops.gamma_mass;
  const SpMat W = generator_weight(ops, p);
  SpMat full = detail::block3(ops.n, {{0, 0, SpMat(-a * I)},
                                      {0, 1, I},
                                      {1, 2, I},
                                      {2, 0, SpMat(-a * a * Mg)},
                                      {2, 1, SpMat(a * Mg - b * ops.K)},
                                      {2, 2, SpMat(-(SpMat(Mg) + b * ops.damping))}});
  SpMat diss = detail::block3(
      ops.n, {{0, 0, SpMat(-a * I)}, {1, 2, I}, {2, 1, SpMat(-b * ops.K)}, {2, 2, SpMat(-(p.tau * ops.mass + b * ops.damping))}});
  SpMat pert = detail::block3(
      ops.n, {{0, 1, I}, {2, 0, SpMat(-a * a * Mg)}, {2, 1, SpMat(a * Mg)}, {2, 2, SpMat(p.tau * ops.mass - Mg)}});
  return {BlockOperator(OperatorKind::generator_z, ops.n, W, std::move(full)),
          BlockOperator(OperatorKind::generator_z_dissipative, ops.n, W, std::move(diss)),
          BlockOperator(OperatorKind::perturbation, ops.n, W, std::move(pert))};
}

}  // namespace jmgt
