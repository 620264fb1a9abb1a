#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace jmgt {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Point = Eigen::Vector2d;

// "JMGT" in ascii
inline constexpr std::uint64_t default_seed = 0x4A4D4754ULL;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// bad user input; the CLI maps these to exit code 2
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class ExperimentPreconditionError : public ConfigurationError {
 public:
  using ConfigurationError::ConfigurationError;
};

class LinearSolverError : public Error {
 public:
  using Error::Error;
};

class IntegratorError : public Error {
 public:
  IntegratorError(const std::string& what, long step, double t)
      : Error(what + " (step " + std::to_string(step) + ", t = " + std::to_string(t) + ")"),
        step_(step),
        time_(t) {}
  long step() const { return step_; }
  double time() const { return time_; }

 private:
  long step_;
  double time_;
};

class DiagnosticError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class FieldSynthesisFailed : public Error {
 public:
  FieldSynthesisFailed(const std::string& what, double best_delta)
      : Error(what + " (best delta_h = " + std::to_string(best_delta) + ")"), best_delta_(best_delta) {}
  double best_delta() const { return best_delta_; }

 private:
  double best_delta_;
};

inline double relative_gap(double a, double b, double floor = 1e-14) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

}  // namespace jmgt
