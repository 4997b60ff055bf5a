// perturb.hpp — perturbative Liouvillian spectra from the non-Hermitian
// effective Hamiltonian, and eigenstate localization analysis

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/SVD>

#include "lse/common.hpp"
#include "lse/eig.hpp"
#include "lse/fits.hpp"
#include "lse/model.hpp"

namespace lse {

struct BiorthogonalEigensystem {
  Vec energies;
  Mat right;      // unit-norm right eigenvectors (columns)
  Mat left_adj;   // rows are l_m^dag = rows of right^-1, so left_adj * right = I
  double condition = 0.0;  // condition number of the right-eigenvector matrix
  bool ill_conditioned = false;
};

/// Eigendecomposition of h_eff with biorthogonal left partners obtained
/// by inverting the right-eigenvector matrix. Near-defective spectra are
/// flagged (condition > 1e12) but still returned.
inline BiorthogonalEigensystem heff_eigensystem(const LadderConfig& cfg) {
  const Mat heff = build_heff(cfg);
  Eigensystem es = eig_right(heff);
  BiorthogonalEigensystem result;
  result.energies = std::move(es.values);
  result.right = std::move(es.right);

  const double h_norm = heff.cwiseAbs().rowwise().sum().maxCoeff();
  const double residual =
      (heff * result.right - result.right * result.energies.asDiagonal()).cwiseAbs().maxCoeff();
  if (residual > 1e-9 * h_norm)
    throw NumericError("h_eff eigenpair residual " + std::to_string(residual) +
                       " exceeds 1e-9 * norm");

  Eigen::JacobiSVD<Mat> svd(result.right);
  const auto& sv = svd.singularValues();
  result.condition = sv(0) / sv(sv.size() - 1);
  result.ill_conditioned = result.condition > 1e12;
  result.left_adj = result.right.inverse();
  return result;
}

/// Zeroth-order spectrum: the d^2 pair values -i(E_m - E_n^*), ordered by
/// the composite index m*d + n to match the vectorization convention.
inline Vec zeroth_order_pairs(const Vec& energies) {
  const int d = static_cast<int>(energies.size());
  Vec values(static_cast<Eigen::Index>(d) * d);
  for (int m = 0; m < d; ++m)
    for (int n = 0; n < d; ++n)
      values(static_cast<Eigen::Index>(m) * d + n) =
          -kI * (energies(m) - std::conj(energies(n)));
  return values;
}

inline Vec zeroth_order_spectrum(const LadderConfig& cfg) {
  return zeroth_order_pairs(heff_eigensystem(cfg).energies);
}

struct FirstOrderSpectrum {
  Vec values;                      // ordered by pair index m*d + n
  std::vector<bool> flagged;       // ill-conditioned biorthogonal norm for the pair
  int n_clusters_diagonalized = 0; // degenerate clusters handled by block diagonalization
};

/// First-order perturbed spectrum. Corrections are evaluated by
/// contracting the rank-1 jump matrices against eigenvector pairs, never
/// materializing the d^2-dimensional dissipator:
///   lambda_mn = -i(E_m - E_n^*) + gamma sum_ch (l_m^dag L r_m)(l_n^dag L r_n)^*.
/// Pairs whose zeroth-order values collide within cluster_tol are treated
/// by diagonalizing the projected dissipator block.
inline FirstOrderSpectrum first_order_spectrum(const LadderConfig& cfg,
                                               double cluster_tol = 1e-8) {
  const BiorthogonalEigensystem es = heff_eigensystem(cfg);
  const int d = static_cast<int>(es.energies.size());
  const auto channels = build_jump_channels(cfg);
  const int n_ch = static_cast<int>(channels.size());

  // l_m^dag (Phi_p a) and a^dag r_m per channel; L = (Phi_p a) a^dag.
  Mat u(n_ch, d), v(n_ch, d);
  for (int c = 0; c < n_ch; ++c) {
    Vec phased = channels[c].a;
    phased(channels[c].phase_site) = -phased(channels[c].phase_site);
    u.row(c) = (es.left_adj * phased).transpose();
    v.row(c) = (channels[c].a.adjoint() * es.right);
  }

  // reciprocal eigenvalue condition numbers; right columns are unit norm
  RVec recip_cond(d);
  for (int m = 0; m < d; ++m) recip_cond(m) = 1.0 / es.left_adj.row(m).norm();

  const Vec zeroth = zeroth_order_pairs(es.energies);
  const Eigen::Index n_pairs = zeroth.size();
  FirstOrderSpectrum result;
  result.values.resize(n_pairs);
  result.flagged.assign(n_pairs, false);

  std::vector<Eigen::Index> order(n_pairs);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const cplx za = zeroth(a), zb = zeroth(b);
    if (za.real() != zb.real()) return za.real() < zb.real();
    return za.imag() < zb.imag();
  });

  auto correction = [&](Eigen::Index p, Eigen::Index q) {
    const int m = static_cast<int>(p / d), n = static_cast<int>(p % d);
    const int mp = static_cast<int>(q / d), np = static_cast<int>(q % d);
    cplx sum{0, 0};
    for (int c = 0; c < n_ch; ++c)
      sum += u(c, m) * v(c, mp) * std::conj(u(c, n) * v(c, np));
    return cfg.gamma * sum;
  };

  // clusters: chain by Re, then by Im within each Re window
  std::vector<std::vector<Eigen::Index>> clusters;
  {
    size_t i = 0;
    while (i < order.size()) {
      size_t j = i + 1;
      while (j < order.size() &&
             zeroth(order[j]).real() - zeroth(order[j - 1]).real() < cluster_tol)
        ++j;
      std::vector<Eigen::Index> window(order.begin() + i, order.begin() + j);
      std::sort(window.begin(), window.end(), [&](Eigen::Index a, Eigen::Index b) {
        return zeroth(a).imag() < zeroth(b).imag();
      });
      size_t a = 0;
      while (a < window.size()) {
        size_t b = a + 1;
        while (b < window.size() &&
               zeroth(window[b]).imag() - zeroth(window[b - 1]).imag() < cluster_tol &&
               std::abs(zeroth(window[b]) - zeroth(window[a])) < 10 * cluster_tol)
          ++b;
        clusters.emplace_back(window.begin() + a, window.begin() + b);
        a = b;
      }
      i = j;
    }
  }

  for (const auto& cluster : clusters) {
    for (Eigen::Index p : cluster) {
      const int m = static_cast<int>(p / d), n = static_cast<int>(p % d);
      if (recip_cond(m) * recip_cond(n) < 1e-10) result.flagged[p] = true;
    }
    if (cluster.size() == 1) {
      const Eigen::Index p = cluster.front();
      result.values(p) = zeroth(p) + correction(p, p);
      continue;
    }
    const int k = static_cast<int>(cluster.size());
    cplx centroid{0, 0};
    for (Eigen::Index p : cluster) centroid += zeroth(p);
    centroid /= static_cast<double>(k);
    Mat block(k, k);
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b)
        block(a, b) = (a == b ? zeroth(cluster[a]) - centroid : cplx{0, 0}) +
                      correction(cluster[a], cluster[b]);
    const Vec lifted = eigvals(std::move(block));
    for (int a = 0; a < k; ++a) result.values(cluster[a]) = centroid + lifted(a);
    ++result.n_clusters_diagonalized;
  }
  return result;
}

struct LocalizationFit {
  double kappa = 0.0;      // decay rate per rung of |psi_A|
  double prefactor = 0.0;  // exp(intercept) of the log-linear fit
  double r_squared = 0.0;
  int n_rungs = 0;
  cplx energy{0, 0};
  RVec amp_A, amp_B;  // |psi| per rung of the fitted eigenstate
};

struct MaxImFitResult {
  std::vector<LocalizationFit> fits;  // one per top-Im candidate, descending Im
  bool rejected = false;              // Hermitian limit: no dissipative mode selected
  bool degenerate_pair = false;       // exactly degenerate top pair (|dIm| < 1e-10)

  /// The candidate whose log-linear profile is cleanest. The scale-free
  /// cluster at the top of the Im spectrum contains a chiral-self-
  /// symmetric Re(E) = 0 member whose amplitude alternates between
  /// sublattices; its +-Re companions carry the clean exponential.
  const LocalizationFit& best() const {
    size_t best_idx = 0;
    for (size_t i = 1; i < fits.size(); ++i)
      if (fits[i].r_squared > fits[best_idx].r_squared) best_idx = i;
    return fits[best_idx];
  }
};

/// Fit log|psi_A(rung)| of the largest-Im(E) eigenstates linearly over
/// the bulk window. All states within im_window of the top form the
/// near-degenerate candidate set and each one is fitted. Scale-free skin
/// localization shows up as kappa * N approximately constant.
inline MaxImFitResult max_im_eigenstate_fit(const LadderConfig& cfg, int edge_exclusion = 1,
                                            double im_window = 5e-4) {
  const BiorthogonalEigensystem es = heff_eigensystem(cfg);
  const int n = cfg.n_rungs;
  MaxImFitResult result;

  const double im_max = es.energies.imag().maxCoeff();
  const double im_min = es.energies.imag().minCoeff();
  if (im_max - im_min < 1e-12) {
    result.rejected = true;
    return result;
  }

  std::vector<int> candidates;
  for (int m = 0; m < es.energies.size(); ++m)
    if (im_max - es.energies(m).imag() < im_window) candidates.push_back(m);
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return es.energies(a).imag() > es.energies(b).imag();
  });
  int exact_top = 0;
  for (int m : candidates)
    if (im_max - es.energies(m).imag() < 1e-10) ++exact_top;
  result.degenerate_pair = exact_top > 1;

  for (int m : candidates) {
    LocalizationFit fit;
    fit.n_rungs = n;
    fit.energy = es.energies(m);
    fit.amp_A.resize(n);
    fit.amp_B.resize(n);
    for (int j = 0; j < n; ++j) {
      fit.amp_A(j) = std::abs(es.right(flat_index(j, Leg::A), m));
      fit.amp_B(j) = std::abs(es.right(flat_index(j, Leg::B), m));
    }
    std::vector<double> xs, ys;
    for (int j = edge_exclusion; j < n - edge_exclusion; ++j) {
      xs.push_back(j + 1);  // 1-based rung coordinate
      ys.push_back(std::log(std::max(fit.amp_A(j), 1e-300)));
    }
    const LinFit line = linear_fit(xs, ys);
    fit.kappa = -line.slope;
    fit.prefactor = std::exp(line.intercept);
    fit.r_squared = line.r_squared;
    result.fits.push_back(std::move(fit));
  }
  return result;
}

}  // namespace lse
