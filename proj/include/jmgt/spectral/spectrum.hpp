#pragma once

#include "jmgt/assembly/block_operator.hpp"
#include "jmgt/spectral/dense_eigen.hpp"

#include <numeric>
#include <random>

namespace jmgt {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CSpMat = Eigen::SparseMatrix<Complex>;

enum class SpectrumMode { dense, iterative };

struct SpectrumReport {
  std::string op_name;
  Index dimension = 0;
  std::vector<Complex> eigenvalues;  // real part descending
  std::vector<double> residuals;     // NaN where not computed
  double abscissa = 0.0;
  std::string backend;
  bool converged = true;
};

// complex factorization of (s W - A), reused for repeated solves at one shift
class ShiftedSolver {
 public:
  ShiftedSolver(const BlockOperator& op, Complex s) : op_(&op), s_(s) {
    CSpMat S = s * op.weight().cast<Complex>() - op.action().cast<Complex>();
    S.makeCompressed();
    lu_.compute(S);
    if (lu_.info() != Eigen::Success) throw LinearSolverError("shifted system factorization failed");
  }

  // (s - op)^{-1} x
  CVec solve(const CVec& x) const { return lu_.solve(op_->weight().cast<Complex>() * x); }

 private:
  const BlockOperator* op_;
  Complex s_;
  Eigen::SparseLU<CSpMat> lu_;
};

inline double eigen_residual(const BlockOperator& op, Complex lambda, const CVec& v) {
  return (op.apply(v) - lambda * v).norm() / v.norm();
}

// a few steps of shifted inverse iteration starting from a fixed pseudo-random vector
inline std::pair<double, CVec> refine_eigenpair(const BlockOperator& op, Complex lambda, int steps = 3) {
  const double eps = 1e-10 * (1.0 + std::abs(lambda));
  ShiftedSolver solver(op, lambda + Complex(eps, eps));
  std::mt19937_64 rng(default_seed);
  std::normal_distribution<double> g;
  CVec v(op.dim());
  for (Index i = 0; i < v.size(); ++i) v[i] = {g(rng), g(rng)};
  v.normalize();
  for (int k = 0; k < steps; ++k) {
    v = solver.solve(v);
    v.normalize();
  }
  return {eigen_residual(op, lambda, v), v};
}

namespace detail {

inline void sort_rightmost(std::vector<Complex>& ev) {
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

inline std::vector<Complex> arnoldi_shift_invert(const BlockOperator& op, double shift, int nev, bool& converged,
                                                 int max_restarts = 30, double tol = 1e-10) {
  const Index n = op.dim();
  const int m = std::min<Index>(n, std::max(3 * nev, 60));
  ShiftedSolver solver(op, shift);
  std::mt19937_64 rng(default_seed);
  std::normal_distribution<double> g;
  Vec start(n);
  for (Index i = 0; i < n; ++i) start[i] = g(rng);
  std::vector<Complex> wanted;
  converged = false;
  for (int restart = 0; restart < max_restarts; ++restart) {
    Mat V = Mat::Zero(n, m + 1);
    Mat H = Mat::Zero(m + 1, m);
    V.col(0) = start.normalized();
    int k = 0;
    for (; k < m; ++k) {
      Vec w = solver.solve(V.col(k).cast<Complex>()).real();
      for (int pass = 0; pass < 2; ++pass) {
        const Vec h = V.leftCols(k + 1).transpose() * w;
        w -= V.leftCols(k + 1) * h;
        H.col(k).head(k + 1) += h;
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) < 1e-14) {
        ++k;
        break;
      }
      V.col(k + 1) = w / H(k + 1, k);
    }
    Eigen::EigenSolver<Mat> es(H.topLeftCorner(k, k));
    const CVec mu = es.eigenvalues();
    const Eigen::MatrixXcd Y = es.eigenvectors();
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(mu[a]) > std::abs(mu[b]); });
    const int take = std::min(nev, k);
    wanted.clear();
    bool ok = true;
    Vec next = Vec::Zero(n);
    for (int i = 0; i < take; ++i) {
      const int j = order[i];
      const Complex lambda = shift - 1.0 / mu[j];
      const CVec v = V.leftCols(k).cast<Complex>() * Y.col(j);
      const double res = eigen_residual(op, lambda, v);
      if (res > tol * (1.0 + std::abs(lambda))) ok = false;
      wanted.push_back(lambda);
      next += v.real() + v.imag();
    }
    if (ok) {
      converged = true;
      break;
    }
    start = next;
  }
  return wanted;
}

}  // namespace detail

inline SpectrumReport spectrum(const BlockOperator& op, SpectrumMode mode, int n_residuals = 10, int nev = 20,
                               double shift = 0.0) {
  SpectrumReport r;
  r.op_name = op.name();
  r.dimension = op.dim();
  if (mode == SpectrumMode::dense) {
    if (op.dim() > 3000) throw ConfigurationError("dense spectrum limited to dimension 3000, got " + std::to_string(op.dim()));
    const DenseEigenvalues d = dense_eigenvalues(op.to_dense());
    r.eigenvalues.assign(d.values.data(), d.values.data() + d.values.size());
    r.backend = d.backend;
  } else {
    bool conv = false;
    r.eigenvalues = detail::arnoldi_shift_invert(op, shift, nev, conv);
    r.converged = conv;
    r.backend = "shift-invert arnoldi (shift " + std::to_string(shift) + ")";
  }
  detail::sort_rightmost(r.eigenvalues);
  r.abscissa = r.eigenvalues.empty() ? 0.0 : r.eigenvalues.front().real();
  r.residuals.assign(r.eigenvalues.size(), std::numeric_limits<double>::quiet_NaN());
  for (int i = 0; i < std::min<int>(n_residuals, static_cast<int>(r.eigenvalues.size())); ++i)
    r.residuals[i] = refine_eigenpair(op, r.eigenvalues[i]).first;
  return r;
}

// greedy nearest-neighbour matching distance between two eigenvalue multisets;
// relative mode scales each gap by max(1, |a_i|)
inline double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b, bool relative = false) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  std::vector<char> used(b.size(), 0);
  double worst = 0.0;
  for (const auto& x : a) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(x - b[j]) / (relative ? std::max(1.0, std::abs(x)) : 1.0);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    used[arg] = 1;
    worst = std::max(worst, best);
  }
  return worst;
}

// largest distance from an eigenvalue to the conjugate of some eigenvalue
inline double conjugation_defect(const std::vector<Complex>& ev) {
  std::vector<Complex> conj;
  for (const auto& x : ev) conj.push_back(std::conj(x));
  return multiset_distance(ev, conj);
}

}  // namespace jmgt
