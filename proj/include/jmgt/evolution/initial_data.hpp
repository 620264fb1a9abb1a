#pragma once

#include "jmgt/diagnostics/energy.hpp"

#include <Eigen/Eigenvalues>

#include <random>

namespace jmgt {

struct InitialDataSpec {
  std::string shape = "bump";  // bump | bump_lift | mode | random | zero
  std::optional<double> h_size;
  std::optional<double> h1_size;
  bool compatible = true;
  int mode = 0;
};

// C^2 bump (1 - r^2)^3 of radius `radius`, zero outside
inline Vec bump(const Mesh& mesh, const Point& center, double radius) {
  return mesh.interpolate([&](const Point& x) {
    const double r2 = (x - center).squaredNorm() / (radius * radius);
    return r2 < 1.0 ? std::pow(1.0 - r2, 3) : 0.0;
  });
}

inline Vec default_bump(const Mesh& mesh) {
  const Point ext = mesh.extent();
  const double r = mesh.dimension == 1 ? 0.3 * ext.x() : 0.3 * std::min(ext.x(), ext.y());
  return bump(mesh, 0.5 * (mesh.lower + mesh.upper), r);
}

// generalized eigenpairs K e = mu M e, M-normalized, ascending mu
inline std::pair<Vec, Mat> k_modes(const DiscreteOperators& ops) {
  if (ops.n > 2500) throw ConfigurationError("mode shapes need a dense eigensolve; use at most 2500 nodes");
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Mat(ops.K), Mat(ops.mass));
  if (es.info() != Eigen::Success) throw LinearSolverError("generalized eigensolve for K failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// u0 correction so that d_nu u0 + kappa1 u1 = 0 holds weakly: N(-kappa1 u1)
inline Vec compatible_lift(const DiscreteOperators& ops, const Vec& u1) {
  std::vector<double> w(ops.kappa1.size());
  for (std::size_t f = 0; f < w.size(); ++f) w[f] = -ops.kappa1[f];
  return solve_neumann_map(ops, BoundaryData{w, u1});
}

inline StateVector make_initial_data(const Model& m, const InitialDataSpec& spec, std::uint64_t seed = default_seed) {
  const Mesh& mesh = *m.mesh;
  const Index n = m.n();
  StateVector s = StateVector::zeros(n);
  if (spec.shape == "zero") return s;
  if (spec.shape == "bump") {
    s.u = default_bump(mesh);
  } else if (spec.shape == "bump_lift") {
    const Point ext = mesh.extent();
    s.ut = mesh.interpolate([&](const Point& x) {
      const double cx = std::cos(M_PI * (x.x() - mesh.lower.x()) / ext.x());
      return mesh.dimension == 1 ? cx : cx * std::cos(M_PI * (x.y() - mesh.lower.y()) / ext.y());
    });
    s.u = default_bump(mesh);
    if (spec.compatible) s.u += compatible_lift(m.ops, s.ut);
  } else if (spec.shape == "mode") {
    const auto [mu, E] = k_modes(m.ops);
    if (spec.mode < 0 || spec.mode >= E.cols()) throw ConfigurationError("mode index out of range");
    s.u = E.col(spec.mode);
  } else if (spec.shape == "random") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    for (Index i = 0; i < n; ++i) s.u[i] = g(rng);
    for (Index i = 0; i < n; ++i) s.ut[i] = g(rng);
    for (Index i = 0; i < n; ++i) s.utt[i] = g(rng);
    if (spec.compatible) s.u += compatible_lift(m.ops, s.ut);
  } else {
    throw ConfigurationError("unknown initial data shape '" + spec.shape + "'");
  }
  if (spec.h_size && spec.h1_size) throw ConfigurationError("give either h_size or h1_size, not both");
  const EnergyReport e = compute_energies(s, m);
  if (spec.h_size) {
    if (!(*spec.h_size > 0.0)) throw ConfigurationError("h_size must be positive");
    s = s.scaled(*spec.h_size / std::sqrt(e.H_norm_sq));
  } else if (spec.h1_size) {
    if (!(*spec.h1_size > 0.0)) throw ConfigurationError("h1_size must be positive");
    s = s.scaled(*spec.h1_size / std::sqrt(e.H1_norm_sq));
  }
  return s;
}

}  // namespace jmgt
