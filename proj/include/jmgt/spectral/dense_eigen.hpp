#pragma once

#include "jmgt/common.hpp"

#include <Eigen/Eigenvalues>

#include <dlfcn.h>

#include <complex>
#include <cstdlib>

namespace jmgt {

namespace detail {

using dgeev_fn = int (*)(int, char, char, int, double*, int, double*, double*, double*, int, double*, int);

struct LapackBackend {
  dgeev_fn dgeev = nullptr;
  std::string library;
};

// LAPACKE is loaded lazily so the OpenBLAS kernel choice below happens before the
// library initializes; its SkylakeX dgeev path hangs for n above ~700 on some CPUs.
inline const LapackBackend& lapack_backend() {
  static const LapackBackend backend = [] {
    LapackBackend b;
    if (std::getenv("JMGT_NO_LAPACK")) return b;
    setenv("OPENBLAS_CORETYPE", "Haswell", 0);
    for (const char* name : {"liblapacke.so.3", "liblapacke.so"}) {
      void* lib = dlopen(name, RTLD_NOW | RTLD_LOCAL);
      if (!lib) continue;
      b.dgeev = reinterpret_cast<dgeev_fn>(dlsym(lib, "LAPACKE_dgeev"));
      if (b.dgeev) {
        b.library = name;
        break;
      }
    }
    return b;
  }();
  return backend;
}

}  // namespace detail

struct DenseEigenvalues {
  Eigen::VectorXcd values;
  std::string backend;
};

inline DenseEigenvalues dense_eigenvalues(const Mat& A) {
  const Index n = A.rows();
  DenseEigenvalues out;
  const auto& lp = detail::lapack_backend();
  if (lp.dgeev && n > 0) {
    Mat a = A;
    Vec wr(n), wi(n);
    double dummy = 0.0;
    constexpr int col_major = 102;
    const int info = lp.dgeev(col_major, 'N', 'N', static_cast<int>(n), a.data(), static_cast<int>(n), wr.data(),
                              wi.data(), &dummy, 1, &dummy, 1);
    if (info != 0) throw LinearSolverError("dgeev failed with info " + std::to_string(info));
    out.values.resize(n);
    for (Index i = 0; i < n; ++i) out.values[i] = {wr[i], wi[i]};
    out.backend = "lapacke-dgeev (" + lp.library + ")";
    return out;
  }
  Eigen::EigenSolver<Mat> es(A, false);
  if (es.info() != Eigen::Success) throw LinearSolverError("dense eigensolve did not converge");
  out.values = es.eigenvalues();
  out.backend = "eigen-eigensolver";
  return out;
}

}  // namespace jmgt
