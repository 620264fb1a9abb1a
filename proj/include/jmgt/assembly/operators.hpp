#pragma once

#include "jmgt/assembly/params.hpp"
#include "jmgt/geometry/partition.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <ostream>

namespace jmgt {

struct DiscreteOperators {
  std::shared_ptr<const Mesh> mesh;
  BoundaryPartition partition;
  Index n = 0;

  SpMat mass;
  SpMat stiffness;
  SpMat robin;  // gamma0 boundary mass weighted by kappa0 / lambda
  SpMat K;      // stiffness + robin
  SpMat damping;  // gamma1 boundary mass weighted by kappa1
  SpMat alpha_mass;
  SpMat gamma_mass;
  SpMat gamma0_mass;
  SpMat gamma1_mass;
  SpMat robin_sq;
  SpMat damping_sq;

  Vec alpha;
  Vec gamma;
  std::vector<double> kappa0;  // per boundary facet, zero off gamma0
  std::vector<double> kappa1;  // per boundary facet, zero off gamma1

  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> mass_solver;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> K_solver;

  Vec solve_mass(const Vec& r) const { return mass_solver->solve(r); }

  Vec solve_K(const Vec& r) const {
    if (!K_solver) throw LinearSolverError("K is singular (empty gamma0), no Robin coercivity");
    return K_solver->solve(r);
  }

  // mass-solve of the weak Laplacian with both boundary conditions substituted
  Vec laplacian(const Vec& u, const Vec& ut) const { return -solve_mass(K * u + damping * ut); }

  bool undamped_boundary() const {
    return std::all_of(kappa1.begin(), kappa1.end(), [](double v) { return v == 0.0; });
  }
  bool critical() const { return gamma.cwiseAbs().maxCoeff() <= 1e-14; }
};

namespace detail {

inline void local_weighted_mass(const Mesh& m, Index c, const Vec& w, double out[3][3]) {
  const auto& cell = m.cells[c];
  const double a = m.cell_measure[c];
  if (m.dimension == 1) {
    const double wa = w[cell[0]];
    const double wb = w[cell[1]];
    out[0][0] = a / 12.0 * (3 * wa + wb);
    out[1][1] = a / 12.0 * (wa + 3 * wb);
    out[0][1] = out[1][0] = a / 12.0 * (wa + wb);
    return;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int k = 3 - i - j;
      if (i == j) {
        double rest = 0.0;
        for (int l = 0; l < 3; ++l)
          if (l != i) rest += w[cell[l]];
        out[i][i] = a * (w[cell[i]] / 10.0 + rest / 30.0);
      } else {
        out[i][j] = a * ((w[cell[i]] + w[cell[j]]) / 30.0 + w[cell[k]] / 60.0);
      }
    }
  }
}

// exact integral of (P1 w)(P1 u)(P1 v) over the mesh
inline SpMat weighted_mass(const Mesh& m, const Vec& w) {
  std::vector<Triplet> t;
  const int npc = m.nodes_per_cell();
  for (Index c = 0; c < m.cell_count(); ++c) {
    double loc[3][3];
    local_weighted_mass(m, c, w, loc);
    for (int i = 0; i < npc; ++i)
      for (int j = 0; j < npc; ++j) t.emplace_back(m.cells[c][i], m.cells[c][j], loc[i][j]);
  }
  SpMat A(m.node_count(), m.node_count());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

inline SpMat stiffness_matrix(const Mesh& m) {
  std::vector<Triplet> t;
  const int npc = m.nodes_per_cell();
  for (Index c = 0; c < m.cell_count(); ++c)
    for (int i = 0; i < npc; ++i)
      for (int j = 0; j < npc; ++j)
        t.emplace_back(m.cells[c][i], m.cells[c][j], m.cell_measure[c] * m.cell_grad[c][i].dot(m.cell_grad[c][j]));
  SpMat A(m.node_count(), m.node_count());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

inline SpMat facet_mass(const Mesh& m, const std::vector<double>& weight) {
  std::vector<Triplet> t;
  for (std::size_t f = 0; f < m.boundary.size(); ++f) {
    const double w = weight[f];
    if (w == 0.0) continue;
    const auto& facet = m.boundary[f];
    if (facet.node_count == 1) {
      t.emplace_back(facet.nodes[0], facet.nodes[0], w);
      continue;
    }
    const double L = facet.measure;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) t.emplace_back(facet.nodes[i], facet.nodes[j], w * L * (i == j ? 2.0 : 1.0) / 6.0);
  }
  SpMat A(m.node_count(), m.node_count());
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

inline Point facet_midpoint(const Mesh& m, const BoundaryFacet& f) {
  return f.node_count == 1 ? m.nodes[f.nodes[0]] : Point(0.5 * (m.nodes[f.nodes[0]] + m.nodes[f.nodes[1]]));
}

}  // namespace detail

inline DiscreteOperators assemble_core(std::shared_ptr<const Mesh> mesh, const BoundaryPartition& part,
                                       const PhysicalParams& params, bool allow_empty_gamma0 = false) {
  validate(params);
  const Mesh& m = *mesh;
  if (part.tags.size() != m.boundary.size()) throw ConfigurationError("partition does not match the mesh");
  if (part.gamma0_empty() && !allow_empty_gamma0) throw ConfigurationError("empty gamma0");

  DiscreteOperators ops;
  ops.mesh = mesh;
  ops.partition = part;
  ops.n = m.node_count();

  ops.alpha = m.interpolate(params.alpha);
  if (!ops.alpha.allFinite()) throw ParameterError("alpha is not finite");
  if (ops.alpha.minCoeff() < 0.0) throw ParameterError("alpha must be nonnegative");
  ops.gamma = ops.alpha.array() - params.critical_alpha();

  const std::size_t nf = m.boundary.size();
  ops.kappa0.assign(nf, 0.0);
  ops.kappa1.assign(nf, 0.0);
  std::vector<double> w_robin(nf, 0.0), w_robin_sq(nf, 0.0), w_damp_sq(nf, 0.0), one0(nf, 0.0), one1(nf, 0.0);
  for (std::size_t f = 0; f < nf; ++f) {
    const Point x = detail::facet_midpoint(m, m.boundary[f]);
    if (part.is_gamma0(f)) {
      const double k0 = params.kappa0(x);
      if (!(k0 > 0.0) || !std::isfinite(k0))
        throw ParameterError("kappa0 must be positive on gamma0 (Robin coercivity of K)");
      ops.kappa0[f] = k0;
      w_robin[f] = k0 / params.lambda;
      w_robin_sq[f] = w_robin[f] * w_robin[f];
      one0[f] = 1.0;
    } else {
      const double k1 = params.kappa1(x);
      if (!(k1 >= 0.0) || !std::isfinite(k1)) throw ParameterError("kappa1 must be nonnegative on gamma1");
      ops.kappa1[f] = k1;
      w_damp_sq[f] = k1 * k1;
      one1[f] = 1.0;
    }
  }

  ops.mass = detail::weighted_mass(m, Vec::Ones(ops.n));
  ops.stiffness = detail::stiffness_matrix(m);
  ops.robin = detail::facet_mass(m, w_robin);
  ops.K = ops.stiffness + ops.robin;
  ops.damping = detail::facet_mass(m, ops.kappa1);
  ops.alpha_mass = detail::weighted_mass(m, ops.alpha);
  ops.gamma_mass = detail::weighted_mass(m, ops.gamma);
  ops.gamma0_mass = detail::facet_mass(m, one0);
  ops.gamma1_mass = detail::facet_mass(m, one1);
  ops.robin_sq = detail::facet_mass(m, w_robin_sq);
  ops.damping_sq = detail::facet_mass(m, w_damp_sq);

  ops.mass_solver = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(ops.mass);
  if (ops.mass_solver->info() != Eigen::Success) throw LinearSolverError("mass matrix factorization failed");
  if (!part.gamma0_empty()) {
    ops.K_solver = std::make_shared<Eigen::SimplicialLDLT<SpMat>>(ops.K);
    if (ops.K_solver->info() != Eigen::Success || ops.K_solver->vectorD().minCoeff() <= 0.0)
      throw LinearSolverError("K factorization failed");
  }
  return ops;
}

// boundary data phi = facet_weight[f] * (P1 nodal) on each gamma1 facet
struct BoundaryData {
  std::vector<double> facet_weight;
  Vec nodal;
};

inline Vec neumann_load(const DiscreteOperators& ops, const BoundaryData& phi) {
  std::vector<double> w(ops.kappa1.size(), 0.0);
  for (std::size_t f = 0; f < w.size(); ++f)
    if (ops.partition.is_gamma1(f)) w[f] = phi.facet_weight.empty() ? 1.0 : phi.facet_weight[f];
  return detail::facet_mass(*ops.mesh, w) * phi.nodal;
}

// discrete harmonic extension: K psi = l(phi), l(phi)(v) = integral over gamma1 of phi v
inline Vec solve_neumann_map(const DiscreteOperators& ops, const BoundaryData& phi) {
  const Vec load = neumann_load(ops, phi);
  Vec psi = ops.solve_K(load);
  // one step of refinement keeps the pairing identity at roundoff level
  psi += ops.solve_K(load - ops.K * psi);
  if (!psi.allFinite()) throw LinearSolverError("Neumann map solve produced non-finite values");
  return psi;
}

inline Vec solve_neumann_map(const DiscreteOperators& ops, const Vec& nodal) { return solve_neumann_map(ops, {{}, nodal}); }

inline void write_triplets(std::ostream& os, const SpMat& A) {
  os.precision(17);
  for (Index k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace jmgt
