#pragma once

#include "jmgt/common.hpp"

namespace jmgt {

struct QpResult {
  Vec x;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Dense convex QP
//   min 0.5 x'Qx + c'x   subject to   Gx <= h
// solved with a Mehrotra predictor-corrector interior point method. Meant for the
// few-dozen-variable problems of field synthesis; Q + G'WG must be positive definite
// along the iteration, which holds when G has full column rank (box rows help).
inline QpResult solve_qp(const Mat& Q, const Vec& c, const Mat& G, const Vec& h, int max_iter = 200, double tol = 1e-8) {
  const Index n = c.size();
  const Index m = h.size();
  Vec x = Vec::Zero(n);
  Vec s = (h - G * x).cwiseMax(1.0);
  Vec z = Vec::Ones(m);
  const double scale_h = 1.0 + h.lpNorm<Eigen::Infinity>();
  const double scale_c = 1.0 + c.lpNorm<Eigen::Infinity>();

  auto max_step = [](const Vec& v, const Vec& dv) {
    double a = 1.0;
    for (Index i = 0; i < v.size(); ++i)
      if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
    return a;
  };

  QpResult out;
  QpResult best;
  double best_merit = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const Vec rd = Q * x + c + G.transpose() * z;
    const Vec rp = G * x + s - h;
    const double mu = s.dot(z) / static_cast<double>(m);
    out.iterations = it;
    out.primal_residual = rp.lpNorm<Eigen::Infinity>() / scale_h;
    const Vec gz = G.transpose() * z;
    out.dual_residual = rd.lpNorm<Eigen::Infinity>() /
                        (scale_c + std::max((Q * x).lpNorm<Eigen::Infinity>(), gz.lpNorm<Eigen::Infinity>()));
    out.gap = mu;
    const double merit = std::max({out.primal_residual, out.dual_residual, mu});
    if (merit < best_merit) {
      best_merit = merit;
      best = out;
      best.x = x;
    }
    if (out.primal_residual < tol && out.dual_residual < tol && mu < tol) {
      out.converged = true;
      break;
    }
    if (mu < 1e-30) break;

    const Vec w = z.cwiseQuotient(s);
    Mat H = Q + G.transpose() * w.asDiagonal() * G;
    H.diagonal().array() += 1e-14 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Mat> kkt(H);
    if (kkt.info() != Eigen::Success) break;

    auto direction = [&](const Vec& rc, Vec& dx, Vec& ds, Vec& dz) {
      const Vec rhs = -rd - G.transpose() * (w.cwiseProduct(rp)) + G.transpose() * rc.cwiseQuotient(s);
      dx = kkt.solve(rhs);
      dz = w.cwiseProduct(G * dx + rp) - rc.cwiseQuotient(s);
      ds = -(rc + s.cwiseProduct(dz)).cwiseQuotient(z);
    };

    Vec dx, ds, dz;
    const Vec rc_aff = s.cwiseProduct(z);
    direction(rc_aff, dx, ds, dz);
    const double a_aff = std::min(max_step(s, ds), max_step(z, dz));
    const double mu_aff = (s + a_aff * ds).dot(z + a_aff * dz) / static_cast<double>(m);
    const double sigma = std::pow(mu_aff / mu, 3);

    const Vec rc = s.cwiseProduct(z) + ds.cwiseProduct(dz) - Vec::Constant(m, sigma * mu);
    direction(rc, dx, ds, dz);
    const double a = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));
    x += a * dx;
    s += a * ds;
    z += a * dz;
  }
  // the normal equations lose accuracy late in the run, so fall back to the best iterate
  if (!out.converged) out = best;
  if (out.x.size() == 0) out.x = x;
  out.objective = 0.5 * out.x.dot(Q * out.x) + c.dot(out.x);
  return out;
}

}  // namespace jmgt
