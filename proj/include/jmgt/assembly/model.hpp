#pragma once

#include "jmgt/assembly/block_operator.hpp"

namespace jmgt {

// everything a run needs, assembled once and shared read-only
struct Model {
  std::shared_ptr<const Mesh> mesh;
  BoundaryPartition partition;
  PhysicalParams params;
  DiscreteOperators ops;
  BlockOperator generator;

  int dimension() const { return mesh->dimension; }
  Index n() const { return ops.n; }
};

inline std::shared_ptr<const Model> build_model(std::shared_ptr<const Mesh> mesh, const BoundaryPartition& part,
                                                const PhysicalParams& params, bool allow_empty_gamma0 = false) {
  auto m = std::make_shared<Model>();
  m->mesh = mesh;
  m->partition = part;
  m->params = params;
  m->ops = assemble_core(mesh, part, params, allow_empty_gamma0);
  m->generator = build_generator_u(m->ops, params);
  return m;
}

inline std::shared_ptr<const Model> build_model(const Mesh& mesh, const BoundaryPartition& part,
                                                const PhysicalParams& params, bool allow_empty_gamma0 = false) {
  return build_model(std::make_shared<const Mesh>(mesh), part, params, allow_empty_gamma0);
}

}  // namespace jmgt
