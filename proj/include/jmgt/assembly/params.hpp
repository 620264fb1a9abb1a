#pragma once

#include "jmgt/common.hpp"

#include <functional>
#include <optional>

namespace jmgt {

using SpaceFunction = std::function<double(const Point&)>;
using SpaceTimeFunction = std::function<double(const Point&, double)>;

inline SpaceFunction constant_field(double v) {
  return [v](const Point&) { return v; };
}

struct PhysicalParams {
  double tau = 1.0;
  double c = 1.0;
  double delta = 1.0;
  double k = 0.5;
  double lambda = 1.0;
  SpaceFunction alpha = constant_field(0.5);
  SpaceFunction kappa0 = constant_field(1.0);
  SpaceFunction kappa1 = constant_field(1.0);
  std::optional<SpaceTimeFunction> forcing;

  double b() const { return delta + tau * c * c; }
  double c2_over_b() const { return c * c / b(); }
  double critical_alpha() const { return tau * c * c / b(); }
  double gamma(const Point& x) const { return alpha(x) - critical_alpha(); }

  // alpha = tau c^2 / b + g, i.e. a constant gamma = g
  void set_gamma_constant(double g) { alpha = constant_field(critical_alpha() + g); }
};

inline void validate(const PhysicalParams& p) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(name) + " must be positive and finite");
  };
  positive(p.tau, "tau");
  positive(p.c, "c");
  positive(p.delta, "delta");
  positive(p.lambda, "lambda");
  if (!(p.k >= 0.0) || !std::isfinite(p.k)) throw ParameterError("k must be nonnegative and finite");
  if (!p.alpha || !p.kappa0 || !p.kappa1) throw ParameterError("alpha, kappa0 and kappa1 must be set");
}

}  // namespace jmgt
