#pragma once

#include "jmgt/common.hpp"

#include <array>
#include <string>
#include <vector>

namespace jmgt {

enum class Side { endpoint0, endpoint1, left, right, bottom, top };

inline std::string to_string(Side s) {
  switch (s) {
    case Side::endpoint0: return "endpoint0";
    case Side::endpoint1: return "endpoint1";
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::bottom: return "bottom";
    case Side::top: return "top";
  }
  return "?";
}

struct BoundaryFacet {
  std::array<Index, 2> nodes{};
  int node_count = 2;
  Index cell = -1;
  Point normal = Point::Zero();
  double measure = 0.0;
  Side side = Side::left;
};

// normal points from cell_a into cell_b
struct InteriorFacet {
  std::array<Index, 2> nodes{};
  int node_count = 2;
  Index cell_a = -1;
  Index cell_b = -1;
  Point normal = Point::Zero();
  double measure = 0.0;
};

// shape holds the values of the local nodal basis at x
struct QuadPoint {
  Point x;
  double weight;
  std::array<double, 3> shape;
};

namespace detail {
inline constexpr std::array<double, 4> gauss_x{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                               0.8611363115940526};
inline constexpr std::array<double, 4> gauss_w{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                               0.3478548451374538};
}  // namespace detail

class Mesh {
 public:
  int dimension = 1;
  std::vector<Point> nodes;
  std::vector<std::array<Index, 3>> cells;
  std::vector<BoundaryFacet> boundary;
  std::vector<InteriorFacet> interior;
  std::vector<double> cell_measure;
  std::vector<std::array<Point, 3>> cell_grad;
  Point lower = Point::Zero();
  Point upper = Point::Zero();

  Index node_count() const { return static_cast<Index>(nodes.size()); }
  Index cell_count() const { return static_cast<Index>(cells.size()); }
  int nodes_per_cell() const { return dimension + 1; }
  Point extent() const { return upper - lower; }

  Point gradient(Index c, const Vec& z) const {
    Point g = Point::Zero();
    for (int i = 0; i < nodes_per_cell(); ++i) g += z[cells[c][i]] * cell_grad[c][i];
    return g;
  }

  // degree-7 exact on segments, degree-6 exact on triangles (collapsed Gauss)
  std::vector<QuadPoint> cell_quadrature(Index c) const {
    std::vector<QuadPoint> q;
    const auto& cell = cells[c];
    if (dimension == 1) {
      const Point& a = nodes[cell[0]];
      const Point& b = nodes[cell[1]];
      for (int i = 0; i < 4; ++i) {
        const double s = 0.5 * (1.0 + detail::gauss_x[i]);
        q.push_back({(1 - s) * a + s * b, 0.5 * detail::gauss_w[i] * cell_measure[c], {1 - s, s, 0.0}});
      }
      return q;
    }
    const Point& p0 = nodes[cell[0]];
    const Point& p1 = nodes[cell[1]];
    const Point& p2 = nodes[cell[2]];
    for (int i = 0; i < 4; ++i) {
      const double u = 0.5 * (1.0 + detail::gauss_x[i]);
      for (int j = 0; j < 4; ++j) {
        const double v = 0.5 * (1.0 + detail::gauss_x[j]) * (1.0 - u);
        const double w = 0.25 * detail::gauss_w[i] * detail::gauss_w[j] * (1.0 - u);
        q.push_back({p0 + u * (p1 - p0) + v * (p2 - p0), 2.0 * w * cell_measure[c], {1 - u - v, u, v}});
      }
    }
    return q;
  }

  template <class Facet>
  std::vector<QuadPoint> facet_quadrature(const Facet& f) const {
    std::vector<QuadPoint> q;
    if (f.node_count == 1) {
      q.push_back({nodes[f.nodes[0]], 1.0, {1.0, 0.0, 0.0}});
      return q;
    }
    const Point& a = nodes[f.nodes[0]];
    const Point& b = nodes[f.nodes[1]];
    for (int i = 0; i < 4; ++i) {
      const double s = 0.5 * (1.0 + detail::gauss_x[i]);
      q.push_back({(1 - s) * a + s * b, 0.5 * detail::gauss_w[i] * f.measure, {1 - s, s, 0.0}});
    }
    return q;
  }

  double boundary_measure() const {
    double s = 0.0;
    for (const auto& f : boundary) s += f.measure;
    return s;
  }

  // P1 interpolation of a point function
  template <class F>
  Vec interpolate(F&& fn) const {
    Vec v(node_count());
    for (Index i = 0; i < node_count(); ++i) v[i] = fn(nodes[i]);
    return v;
  }
};

inline Mesh build_interval_mesh(double length, int n_cells) {
  if (!(length > 0.0)) throw ConfigurationError("interval length must be positive");
  if (n_cells < 2) throw ConfigurationError("interval mesh needs at least 2 cells");
  Mesh m;
  m.dimension = 1;
  const double h = length / n_cells;
  for (int i = 0; i <= n_cells; ++i) m.nodes.emplace_back(i * h, 0.0);
  m.nodes.back().x() = length;
  for (int i = 0; i < n_cells; ++i) {
    m.cells.push_back({i, i + 1, -1});
    m.cell_measure.push_back(m.nodes[i + 1].x() - m.nodes[i].x());
    const double hc = m.cell_measure.back();
    m.cell_grad.push_back({Point(-1.0 / hc, 0.0), Point(1.0 / hc, 0.0), Point::Zero()});
  }
  m.boundary.push_back({{0, 0}, 1, 0, Point(-1.0, 0.0), 1.0, Side::endpoint0});
  m.boundary.push_back({{n_cells, n_cells}, 1, n_cells - 1, Point(1.0, 0.0), 1.0, Side::endpoint1});
  for (int i = 1; i < n_cells; ++i) m.interior.push_back({{i, i}, 1, i - 1, i, Point(1.0, 0.0), 1.0});
  m.lower = Point(0.0, 0.0);
  m.upper = Point(length, 0.0);
  return m;
}

inline Mesh build_rect_mesh(double lx, double ly, int nx, int ny) {
  if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigurationError("rectangle sizes must be positive");
  if (nx < 2 || ny < 2) throw ConfigurationError("rectangle mesh needs at least 2 cells per direction");
  Mesh m;
  m.dimension = 2;
  const double hx = lx / nx;
  const double hy = ly / ny;
  auto id = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) m.nodes.emplace_back(i == nx ? lx : i * hx, j == ny ? ly : j * hy);

  // each square splits along the (i,j)-(i+1,j+1) diagonal; cells 2q (lower) and 2q+1 (upper)
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      m.cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  for (const auto& c : m.cells) {
    const Point& p0 = m.nodes[c[0]];
    const Point& p1 = m.nodes[c[1]];
    const Point& p2 = m.nodes[c[2]];
    const Point e1 = p1 - p0;
    const Point e2 = p2 - p0;
    const double det = e1.x() * e2.y() - e1.y() * e2.x();
    m.cell_measure.push_back(0.5 * det);
    // rows of the inverse Jacobian transpose give reference gradients mapped to x
    const Point g1(e2.y() / det, -e2.x() / det);
    const Point g2(-e1.y() / det, e1.x() / det);
    m.cell_grad.push_back({-g1 - g2, g1, g2});
  }

  auto lower_cell = [nx](int i, int j) { return static_cast<Index>(2 * (j * nx + i)); };
  for (int i = 0; i < nx; ++i)
    m.boundary.push_back({{id(i, 0), id(i + 1, 0)}, 2, lower_cell(i, 0), Point(0, -1), hx, Side::bottom});
  for (int j = 0; j < ny; ++j)
    m.boundary.push_back({{id(nx, j), id(nx, j + 1)}, 2, lower_cell(nx - 1, j), Point(1, 0), hy, Side::right});
  for (int i = 0; i < nx; ++i)
    m.boundary.push_back(
        {{id(i, ny), id(i + 1, ny)}, 2, lower_cell(i, ny - 1) + 1, Point(0, 1), hx, Side::top});
  for (int j = 0; j < ny; ++j)
    m.boundary.push_back({{id(0, j), id(0, j + 1)}, 2, lower_cell(0, j) + 1, Point(-1, 0), hy, Side::left});

  const double hd = std::hypot(hx, hy);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Index lo = lower_cell(i, j);
      const Index up = lo + 1;
      m.interior.push_back({{id(i, j), id(i + 1, j + 1)}, 2, lo, up, Point(-hy, hx) / hd, hd});
      if (i + 1 < nx)
        m.interior.push_back({{id(i + 1, j), id(i + 1, j + 1)}, 2, lo, lower_cell(i + 1, j) + 1, Point(1, 0), hy});
      if (j + 1 < ny)
        m.interior.push_back({{id(i, j + 1), id(i + 1, j + 1)}, 2, up, lower_cell(i, j + 1), Point(0, 1), hx});
    }
  }
  m.lower = Point(0.0, 0.0);
  m.upper = Point(lx, ly);
  return m;
}

}  // namespace jmgt
