// eig.hpp — dense non-Hermitian eigensolvers (LAPACK zgeev) and spectrum utilities

#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "lse/common.hpp"

#define LAPACK_COMPLEX_CUSTOM
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace lse {

/// Eigenvalues of a general complex matrix. The argument is taken by
/// value because zgeev destroys its input.
inline Vec eigvals(Mat a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw std::invalid_argument("eigvals: matrix must be square");
  Vec w(n);
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n,
                                        w.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericError("zgeev failed to converge, info=" + std::to_string(info));
  return w;
}

struct Eigensystem {
  Vec values;
  Mat right;  // columns are unit-norm right eigenvectors
};

inline Eigensystem eig_right(Mat a) {
  const auto n = static_cast<lapack_int>(a.rows());
  if (a.cols() != a.rows()) throw std::invalid_argument("eig_right: matrix must be square");
  Eigensystem es{Vec(n), Mat(n, n)};
  const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n,
                                        es.values.data(), nullptr, 1, es.right.data(), n);
  if (info != 0) throw NumericError("zgeev failed to converge, info=" + std::to_string(info));
  return es;
}

/// Hermitian eigenvalues (ascending), LAPACK zheevd.
inline RVec eigvals_hermitian(Mat a) {
  const auto n = static_cast<lapack_int>(a.rows());
  RVec w(n);
  const lapack_int info =
      LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, a.data(), n, w.data());
  if (info != 0) throw NumericError("zheevd failed, info=" + std::to_string(info));
  return w;
}

inline double directed_hausdorff(const Vec& from, const Vec& to) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < to.size(); ++j)
      best = std::min(best, std::abs(from(i) - to(j)));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff_distance(const Vec& a, const Vec& b) {
  return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

/// Greedy one-to-one matching of two equally sized spectra; returns the
/// largest matched distance. Adequate when the matching tolerance is far
/// below the eigenvalue spacing.
inline double max_pairwise_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("max_pairwise_distance: size mismatch");
  std::vector<bool> used(b.size(), false);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_j = -1;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(a(i) - b(j));
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    used[best_j] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

/// Largest unpaired distance under complex conjugation: for a spectrum
/// closed under conjugation this is small.
inline double conjugation_asymmetry(const Vec& values) {
  Vec conj = values.conjugate();
  return directed_hausdorff(values, conj);
}

}  // namespace lse
