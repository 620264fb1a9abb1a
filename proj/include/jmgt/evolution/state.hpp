#pragma once

#include "jmgt/assembly/model.hpp"

namespace jmgt {

struct StateVector {
  double t = 0.0;
  Vec u;
  Vec ut;
  Vec utt;
  bool nonlinear = false;

  static StateVector zeros(Index n) { return {0.0, Vec::Zero(n), Vec::Zero(n), Vec::Zero(n), false}; }

  Index size() const { return u.size(); }

  Vec stacked() const {
    Vec x(3 * u.size());
    x << u, ut, utt;
    return x;
  }

  static StateVector from_stacked(const Vec& x, double t, bool nonlinear = false) {
    const Index n = x.size() / 3;
    return {t, x.head(n), x.segment(n, n), x.tail(n), nonlinear};
  }

  bool finite() const { return u.allFinite() && ut.allFinite() && utt.allFinite(); }

  // z = u_t + (c^2/b) u and its time derivative
  Vec z(double c2b) const { return ut + c2b * u; }
  Vec zt(double c2b) const { return utt + c2b * ut; }

  StateVector scaled(double s) const { return {t, s * u, s * ut, s * utt, nonlinear}; }
};

}  // namespace jmgt
