#pragma once

#include "jmgt/geometry/mesh.hpp"

#include <limits>
#include <optional>
#include <sstream>

namespace jmgt {

enum class BoundaryTag { gamma0, gamma1 };

struct BoundaryPartition {
  std::vector<BoundaryTag> tags;
  std::vector<Side> gamma0_sides;

  bool is_gamma0(std::size_t f) const { return tags[f] == BoundaryTag::gamma0; }
  bool is_gamma1(std::size_t f) const { return tags[f] == BoundaryTag::gamma1; }
  std::size_t count(BoundaryTag t) const { return static_cast<std::size_t>(std::count(tags.begin(), tags.end(), t)); }
  bool gamma0_empty() const { return count(BoundaryTag::gamma0) == 0; }
};

namespace detail {

inline std::optional<Side> parse_side(std::string name, int dimension) {
  name.erase(std::remove_if(name.begin(), name.end(), [](unsigned char ch) { return std::isspace(ch); }), name.end());
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (dimension == 1) {
    if (name == "endpoint0" || name == "left") return Side::endpoint0;
    if (name == "endpoint1" || name == "right") return Side::endpoint1;
    return std::nullopt;
  }
  if (name == "left") return Side::left;
  if (name == "right") return Side::right;
  if (name == "bottom") return Side::bottom;
  if (name == "top") return Side::top;
  return std::nullopt;
}

}  // namespace detail

// spec lists the sides forming gamma0, comma separated; everything else is gamma1.
// "none" (or an empty spec) is accepted only with allow_empty_gamma0.
inline BoundaryPartition partition_boundary(const Mesh& mesh, const std::string& spec, bool allow_empty_gamma0 = false) {
  BoundaryPartition p;
  p.tags.assign(mesh.boundary.size(), BoundaryTag::gamma1);
  std::string trimmed = spec;
  trimmed.erase(std::remove_if(trimmed.begin(), trimmed.end(), [](unsigned char ch) { return std::isspace(ch); }),
                trimmed.end());
  if (trimmed.empty() || trimmed == "none") {
    if (!allow_empty_gamma0)
      throw ConfigurationError(
          "empty gamma0: the stabilization theory needs a nonempty Robin part; use the all-dissipative flag to "
          "run without one");
    return p;
  }
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto side = detail::parse_side(item, mesh.dimension);
    if (!side) throw ConfigurationError("unknown boundary side '" + item + "' for a " +
                                        std::to_string(mesh.dimension) + "D mesh");
    p.gamma0_sides.push_back(*side);
  }
  for (std::size_t f = 0; f < mesh.boundary.size(); ++f)
    if (std::find(p.gamma0_sides.begin(), p.gamma0_sides.end(), mesh.boundary[f].side) != p.gamma0_sides.end())
      p.tags[f] = BoundaryTag::gamma0;
  if (p.gamma0_empty()) throw ConfigurationError("partition spec '" + spec + "' selects no boundary facet");
  return p;
}

struct StarShapedReport {
  double max_dot = -std::numeric_limits<double>::infinity();
  bool pass = true;
};

inline StarShapedReport check_star_shaped(const Mesh& mesh, const BoundaryPartition& part, const Point& x0) {
  if (!x0.allFinite()) throw ConfigurationError("x0 must be finite");
  StarShapedReport r;
  for (std::size_t f = 0; f < mesh.boundary.size(); ++f) {
    if (!part.is_gamma0(f)) continue;
    const auto& facet = mesh.boundary[f];
    for (const auto& q : mesh.facet_quadrature(facet)) r.max_dot = std::max(r.max_dot, (q.x - x0).dot(facet.normal));
  }
  r.pass = r.max_dot <= 1e-12;
  return r;
}

}  // namespace jmgt
