#pragma once

#include "jmgt/geometry/partition.hpp"
#include "jmgt/geometry/qp.hpp"

#include <Eigen/QR>

namespace jmgt {

// h(x) = A x + b, or a tensor polynomial in the box-normalized coordinates
// xi = (x - lower) / (upper - lower), one coefficient block per component.
class MultiplierField {
 public:
  enum class Kind { affine, polynomial };

  static MultiplierField affine(int dimension, const Eigen::Matrix2d& A, const Point& b) {
    MultiplierField f;
    f.kind_ = Kind::affine;
    f.dimension_ = dimension;
    f.A_ = A;
    f.b_ = b;
    if (dimension == 1) {
      f.A_.row(1).setZero();
      f.A_.col(1).setZero();
      f.b_.y() = 0.0;
    }
    f.degree_ = 1;
    return f;
  }

  static MultiplierField polynomial(int dimension, int degree, const Point& lower, const Point& upper, const Vec& coeffs) {
    MultiplierField f;
    f.kind_ = Kind::polynomial;
    f.dimension_ = dimension;
    f.degree_ = degree;
    f.lower_ = lower;
    f.scale_ = upper - lower;
    if (dimension == 1) f.scale_.y() = 1.0;
    f.coeffs_ = coeffs;
    if (coeffs.size() != dimension * basis_size(dimension, degree))
      throw ConfigurationError("coefficient vector does not match the polynomial basis");
    return f;
  }

  static Index basis_size(int dimension, int degree) {
    return dimension == 1 ? degree + 1 : (degree + 1) * (degree + 1);
  }

  Kind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  int degree() const { return degree_; }
  const Vec& coefficients() const { return coeffs_; }
  const Eigen::Matrix2d& matrix() const { return A_; }
  const Point& offset() const { return b_; }
  const Point& box_lower() const { return lower_; }
  Point box_upper() const { return lower_ + scale_; }

  Point value(const Point& x) const {
    if (kind_ == Kind::affine) return A_ * x + b_;
    Point h = Point::Zero();
    for_each_basis(x, [&](Index k, double phi, const Point&, const Eigen::Matrix2d&) {
      for (int comp = 0; comp < dimension_; ++comp) h[comp] += coeffs_[comp * nb() + k] * phi;
    });
    return h;
  }

  // J(h)_{ij} = d h_i / d x_j
  Eigen::Matrix2d jacobian(const Point& x) const {
    if (kind_ == Kind::affine) return A_;
    Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
    for_each_basis(x, [&](Index k, double, const Point& g, const Eigen::Matrix2d&) {
      for (int comp = 0; comp < dimension_; ++comp) J.row(comp) += coeffs_[comp * nb() + k] * g.transpose();
    });
    return J;
  }

  double divergence(const Point& x) const { return jacobian(x).trace(); }

  Point grad_divergence(const Point& x) const {
    if (kind_ == Kind::affine) return Point::Zero();
    Point g = Point::Zero();
    for_each_basis(x, [&](Index k, double, const Point&, const Eigen::Matrix2d& H) {
      for (int comp = 0; comp < dimension_; ++comp) g += coeffs_[comp * nb() + k] * H.col(comp);
    });
    return g;
  }

  double min_sym_eigenvalue(const Point& x) const {
    const Eigen::Matrix2d J = jacobian(x);
    if (dimension_ == 1) return J(0, 0);
    const Eigen::Matrix2d S = 0.5 * (J + J.transpose());
    const double mean = 0.5 * (S(0, 0) + S(1, 1));
    const double rad = std::hypot(0.5 * (S(0, 0) - S(1, 1)), S(0, 1));
    return mean - rad;
  }

  // certificates, filled by synthesis or verification
  double delta_h = 0.0;
  double boundary_residual = 0.0;
  double delta_target = 0.0;
  std::string origin = "user";

 private:
  Index nb() const { return basis_size(dimension_, degree_); }

  // visits every scalar basis function with its value, gradient and Hessian in x
  template <class Fn>
  void for_each_basis(const Point& x, Fn&& fn) const {
    const int d = degree_;
    const double xi = (x.x() - lower_.x()) / scale_.x();
    const double eta = dimension_ == 1 ? 0.0 : (x.y() - lower_.y()) / scale_.y();
    auto powers = [d](double t, std::vector<double>& p, std::vector<double>& dp, std::vector<double>& ddp) {
      p.assign(d + 1, 0.0);
      dp.assign(d + 1, 0.0);
      ddp.assign(d + 1, 0.0);
      for (int i = 0; i <= d; ++i) {
        p[i] = std::pow(t, i);
        if (i >= 1) dp[i] = i * std::pow(t, i - 1);
        if (i >= 2) ddp[i] = i * (i - 1) * std::pow(t, i - 2);
      }
    };
    std::vector<double> px, dpx, ddpx, py, dpy, ddpy;
    powers(xi, px, dpx, ddpx);
    powers(eta, py, dpy, ddpy);
    const double sx = 1.0 / scale_.x();
    const double sy = 1.0 / scale_.y();
    if (dimension_ == 1) {
      for (int i = 0; i <= d; ++i) {
        Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
        H(0, 0) = ddpx[i] * sx * sx;
        fn(i, px[i], Point(dpx[i] * sx, 0.0), H);
      }
      return;
    }
    for (int j = 0; j <= d; ++j) {
      for (int i = 0; i <= d; ++i) {
        Eigen::Matrix2d H;
        H(0, 0) = ddpx[i] * py[j] * sx * sx;
        H(1, 1) = px[i] * ddpy[j] * sy * sy;
        H(0, 1) = H(1, 0) = dpx[i] * dpy[j] * sx * sy;
        fn(j * (d + 1) + i, px[i] * py[j], Point(dpx[i] * py[j] * sx, px[i] * dpy[j] * sy), H);
      }
    }
  }

  Kind kind_ = Kind::affine;
  int dimension_ = 2;
  int degree_ = 1;
  Eigen::Matrix2d A_ = Eigen::Matrix2d::Zero();
  Point b_ = Point::Zero();
  Point lower_ = Point::Zero();
  Point scale_ = Point::Ones();
  Vec coeffs_;
};

struct FieldReport {
  double boundary_residual = 0.0;
  double min_eigenvalue = 0.0;
  Index boundary_samples = 0;
  Index interior_samples = 0;
  bool pass = false;
};

namespace detail {

inline std::vector<Point> lattice(const Mesh& mesh, int per_dir) {
  std::vector<Point> pts;
  const Point lo = mesh.lower;
  const Point ext = mesh.extent();
  if (mesh.dimension == 1) {
    for (int i = 0; i < per_dir; ++i) pts.emplace_back(lo.x() + ext.x() * i / (per_dir - 1), 0.0);
    return pts;
  }
  for (int j = 0; j < per_dir; ++j)
    for (int i = 0; i < per_dir; ++i)
      pts.emplace_back(lo.x() + ext.x() * i / (per_dir - 1), lo.y() + ext.y() * j / (per_dir - 1));
  return pts;
}

// four samples per quadrature point along each direction of the mesh
inline int synthesis_density(const Mesh& mesh) {
  const Index cells_per_dir =
      mesh.dimension == 1 ? mesh.cell_count() : static_cast<Index>(std::llround(std::sqrt(mesh.cell_count() / 2.0)));
  return static_cast<int>(4 * 4 * std::min<Index>(cells_per_dir, 8) + 1);
}

inline std::vector<std::pair<Point, Point>> gamma0_samples(const Mesh& mesh, const BoundaryPartition& part, int extra) {
  std::vector<std::pair<Point, Point>> out;
  for (std::size_t f = 0; f < mesh.boundary.size(); ++f) {
    if (!part.is_gamma0(f)) continue;
    const auto& facet = mesh.boundary[f];
    for (const auto& q : mesh.facet_quadrature(facet)) out.emplace_back(q.x, facet.normal);
    if (facet.node_count == 2) {
      const Point& a = mesh.nodes[facet.nodes[0]];
      const Point& b = mesh.nodes[facet.nodes[1]];
      for (int i = 0; i <= extra; ++i) out.emplace_back(a + (b - a) * (static_cast<double>(i) / extra), facet.normal);
    }
  }
  return out;
}

inline std::optional<MultiplierField> flat_field(const Mesh& mesh, const BoundaryPartition& part) {
  if (part.gamma0_sides.empty()) return std::nullopt;
  const Side s = part.gamma0_sides.front();
  for (Side other : part.gamma0_sides)
    if (other != s) return std::nullopt;
  const Point lo = mesh.lower;
  const Point hi = mesh.upper;
  const Point mid = 0.5 * (lo + hi);
  Point anchor;
  switch (s) {
    case Side::endpoint0: anchor = Point(lo.x(), 0.0); break;
    case Side::endpoint1: anchor = Point(hi.x(), 0.0); break;
    case Side::left: anchor = Point(lo.x(), mid.y()); break;
    case Side::right: anchor = Point(hi.x(), mid.y()); break;
    case Side::bottom: anchor = Point(mid.x(), lo.y()); break;
    case Side::top: anchor = Point(mid.x(), hi.y()); break;
  }
  return MultiplierField::affine(mesh.dimension, Eigen::Matrix2d::Identity(), -anchor);
}

}  // namespace detail

inline FieldReport certify_on(const MultiplierField& field, const Mesh& mesh, const BoundaryPartition& part,
                              int interior_per_dir, int boundary_extra) {
  FieldReport r;
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& x : detail::lattice(mesh, interior_per_dir)) {
    r.min_eigenvalue = std::min(r.min_eigenvalue, field.min_sym_eigenvalue(x));
    ++r.interior_samples;
  }
  for (const auto& [x, nu] : detail::gamma0_samples(mesh, part, boundary_extra)) {
    r.boundary_residual = std::max(r.boundary_residual, std::abs(field.value(x).dot(nu)));
    ++r.boundary_samples;
  }
  r.pass = r.boundary_residual <= 1e-10 && r.min_eigenvalue > 0.0 && r.min_eigenvalue >= field.delta_target - 1e-8;
  return r;
}

// independent, denser resampling (10x the synthesis lattice)
inline FieldReport verify_field(const MultiplierField& field, const Mesh& mesh, const BoundaryPartition& part) {
  const int dense = 10 * (detail::synthesis_density(mesh) - 1) + 1;
  return certify_on(field, mesh, part, mesh.dimension == 1 ? 10 * dense : dense, 40);
}

inline MultiplierField synthesize_multiplier_field(const Mesh& mesh, const BoundaryPartition& part, int basis_degree,
                                                   double delta_target) {
  if (part.gamma0_empty()) throw ConfigurationError("field synthesis needs a nonempty gamma0");
  if (!(delta_target > 0.0)) throw ConfigurationError("delta_target must be positive");
  if (basis_degree < 1) throw ConfigurationError("basis degree must be at least 1");
  const int density = detail::synthesis_density(mesh);

  if (auto flat = detail::flat_field(mesh, part)) {
    MultiplierField f = *flat;
    if (delta_target > 1.0) f = MultiplierField::affine(mesh.dimension, delta_target * f.matrix(), delta_target * f.offset());
    f.delta_target = delta_target;
    f.origin = "analytic";
    const FieldReport r = certify_on(f, mesh, part, density, 4);
    f.delta_h = r.min_eigenvalue;
    f.boundary_residual = r.boundary_residual;
    return f;
  }

  const int dim = mesh.dimension;
  const Index nb = MultiplierField::basis_size(dim, basis_degree);
  const Index n = dim * nb;
  auto unit_field = [&](Index k) {
    Vec e = Vec::Zero(n);
    e[k] = 1.0;
    return MultiplierField::polynomial(dim, basis_degree, mesh.lower, mesh.upper, e);
  };
  std::vector<MultiplierField> basis;
  for (Index k = 0; k < n; ++k) basis.push_back(unit_field(k));

  // equality rows h.nu = 0 on gamma0, eliminated through a null-space basis
  const auto bsamples = detail::gamma0_samples(mesh, part, 4);
  Mat E(bsamples.size(), n);
  for (std::size_t r = 0; r < bsamples.size(); ++r)
    for (Index k = 0; k < n; ++k) E(r, k) = basis[k].value(bsamples[r].first).dot(bsamples[r].second);
  Eigen::ColPivHouseholderQR<Mat> qr(E.transpose());
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  if (rank >= n) throw FieldSynthesisFailed("boundary conditions leave no free coefficients", 0.0);
  const Mat Qfull = qr.householderQ() * Mat::Identity(n, n);
  const Mat Z = Qfull.rightCols(n - rank);
  const Index nz = Z.cols();

  // linear sufficient condition for lambda_min(sym J) >= t: diagonal dominance,
  // S11 - |S12| >= t and S22 - |S12| >= t
  const auto pts = detail::lattice(mesh, density);
  const int rows_per = dim == 1 ? 1 : 4;
  Mat D(rows_per * pts.size(), n);
  for (std::size_t p = 0; p < pts.size(); ++p) {
    for (Index k = 0; k < n; ++k) {
      const Eigen::Matrix2d J = basis[k].jacobian(pts[p]);
      if (dim == 1) {
        D(p, k) = J(0, 0);
        continue;
      }
      const double s12 = 0.5 * (J(0, 1) + J(1, 0));
      D(4 * p + 0, k) = J(0, 0) - s12;
      D(4 * p + 1, k) = J(0, 0) + s12;
      D(4 * p + 2, k) = J(1, 1) - s12;
      D(4 * p + 3, k) = J(1, 1) + s12;
    }
  }
  const Mat DZ = D * Z;
  const Index mrows = DZ.rows();

  // phase 1: largest achievable t inside a coefficient box
  const double box = 10.0 * std::max(1.0, delta_target) * (1.0 + mesh.extent().maxCoeff());
  {
    const Index nv = nz + 1;
    Mat G = Mat::Zero(mrows + 2 * nz + 1, nv);
    Vec h = Vec::Zero(G.rows());
    G.topLeftCorner(mrows, nz) = -DZ;
    G.block(0, nz, mrows, 1).setOnes();
    G.block(mrows, 0, nz, nz) = Mat::Identity(nz, nz);
    G.block(mrows + nz, 0, nz, nz) = -Mat::Identity(nz, nz);
    h.segment(mrows, 2 * nz).setConstant(box);
    G(mrows + 2 * nz, nz) = 1.0;
    h[mrows + 2 * nz] = 2.0 * delta_target;
    Mat Q = Mat::Zero(nv, nv);
    Q.topLeftCorner(nz, nz) = 1e-8 * Mat::Identity(nz, nz);
    Vec c = Vec::Zero(nv);
    c[nz] = -1.0;
    const QpResult lp = solve_qp(Q, c, G, h);
    const double t_best = lp.x[nz];
    // only a primal feasible point with t >= target matters here
    if (lp.primal_residual > 1e-8 || t_best < delta_target * (1.0 - 1e-6)) {
      MultiplierField f = MultiplierField::polynomial(dim, basis_degree, mesh.lower, mesh.upper, Z * lp.x.head(nz));
      const FieldReport r = certify_on(f, mesh, part, density, 4);
      throw FieldSynthesisFailed("no field meets delta_target = " + std::to_string(delta_target),
                                 std::max(t_best, r.min_eigenvalue));
    }
  }

  // phase 2: minimum-norm coefficients meeting the target
  const Mat Q = Z.transpose() * Z;
  const Vec c = Vec::Zero(nz);
  const QpResult qp = solve_qp(Q, c, -DZ, Vec::Constant(mrows, -delta_target));
  if (!qp.converged) throw FieldSynthesisFailed("minimum-norm stage did not converge", delta_target);
  Vec coeffs = Z * qp.x;
  MultiplierField f = MultiplierField::polynomial(dim, basis_degree, mesh.lower, mesh.upper, coeffs);
  FieldReport r = certify_on(f, mesh, part, density, 4);
  if (r.min_eigenvalue < delta_target && r.min_eigenvalue > 0.0) {
    coeffs *= delta_target / r.min_eigenvalue;
    f = MultiplierField::polynomial(dim, basis_degree, mesh.lower, mesh.upper, coeffs);
    r = certify_on(f, mesh, part, density, 4);
  }
  f.delta_target = delta_target;
  f.delta_h = r.min_eigenvalue;
  f.boundary_residual = r.boundary_residual;
  f.origin = "synthesized";
  return f;
}

}  // namespace jmgt
