#pragma once

#include "jmgt/common.hpp"

#include <vector>

namespace jmgt {

struct DecayFit {
  double omega = 0.0;
  double M = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double r2 = 0.0;
  std::string norm;
  std::size_t points = 0;
};

struct FitWindow {
  double t_a;
  double t_b;
};

// least squares line through (t, log value) on the window; omega = -slope
inline DecayFit fit_decay_rate(const std::vector<double>& t, const std::vector<double>& value, FitWindow window,
                               const std::string& norm = "E") {
  if (t.size() != value.size() || t.empty()) throw FitError("time and value series differ in length");
  if (window.t_b < window.t_a) throw FitError("fit window is reversed");
  const double tol = 1e-12 * std::max(1.0, std::abs(t.back()));
  if (window.t_a < t.front() - tol || window.t_b > t.back() + tol) throw FitError("fit window outside the series span");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_a - tol || t[i] > window.t_b + tol) continue;
    if (!(value[i] > 0.0) || !std::isfinite(value[i]))
      throw FitError(norm + " is not positive at t = " + std::to_string(t[i]) + " (growth or underflow)");
    xs.push_back(t[i]);
    ys.push_back(std::log(value[i]));
  }
  if (xs.size() < 10) throw FitError("fit window holds fewer than 10 points");
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxx == 0.0 ? 0.0 : sxy / sxx;
  const double intercept = my - slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (intercept + slope * xs[i]);
    ssr += e * e;
  }
  DecayFit f;
  f.omega = -slope;
  f.M = std::exp(intercept) / value.front();
  f.t_a = window.t_a;
  f.t_b = window.t_b;
  // a flat series (up to roundoff in the logs) is fitted exactly
  f.r2 = syy <= 1e-24 * n * (1.0 + my * my) ? 1.0 : std::clamp(1.0 - ssr / syy, 0.0, 1.0);
  f.norm = norm;
  f.points = xs.size();
  return f;
}

inline FitWindow default_window(double T) { return {0.2 * T, 0.9 * T}; }

}  // namespace jmgt
