#pragma once

#include "jmgt/evolution/integrate.hpp"
#include "jmgt/evolution/initial_data.hpp"

namespace testing_support {

using namespace jmgt;

inline std::shared_ptr<const Model> interval(int n, const std::string& g0 = "endpoint0", double gamma = 0.1,
                                             double kappa1 = 1.0) {
  PhysicalParams p;
  p.set_gamma_constant(gamma);
  p.kappa1 = constant_field(kappa1);
  const Mesh mesh = build_interval_mesh(1.0, n);
  return build_model(mesh, partition_boundary(mesh, g0), p);
}

inline std::shared_ptr<const Model> square(int n, const std::string& g0 = "left", double gamma = 0.1) {
  PhysicalParams p;
  p.set_gamma_constant(gamma);
  const Mesh mesh = build_rect_mesh(1.0, 1.0, n, n);
  return build_model(mesh, partition_boundary(mesh, g0), p);
}

inline Scenario scenario(std::shared_ptr<const Model> m, double T, double dt, int stride = 1, bool states = false) {
  Scenario sc;
  sc.model = m;
  InitialDataSpec spec;
  spec.h_size = 1.0;
  sc.initial = make_initial_data(*m, spec);
  sc.T = T;
  sc.dt = dt;
  sc.stride = stride;
  sc.store_states = states;
  sc.compatible_data = true;
  return sc;
}

}  // namespace testing_support
