// observables.hpp — correlation-matrix observables of Gaussian states and
// cross-trajectory statistics

#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lse/common.hpp"
#include "lse/slater.hpp"

namespace lse {

/// Two-point function D_ij = <c_i^dag c_j> = [U U^dag]_ji. For a pure
/// Gaussian state D is a Hermitian projector with trace N_p.
inline Mat correlation_matrix(const SlaterState& state) {
  const Eigen::Index n = state.u.rows();
  Mat p = Mat::Zero(n, n);
  p.selfadjointView<Eigen::Lower>().rankUpdate(state.u);
  p.triangularView<Eigen::StrictlyUpper>() = p.adjoint();
  return p.transpose();
}

namespace detail {

inline double binary_entropy_sum(const RVec& etas) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < etas.size(); ++k) {
    const double eta = std::clamp(etas(k), 1e-12, 1.0 - 1e-12);
    s -= eta * std::log(eta) + (1.0 - eta) * std::log(1.0 - eta);
  }
  return s;
}

}  // namespace detail

/// Von Neumann entropy of the subsystem spanned by the given flattened
/// sites, from the eigenvalues of the restricted correlation block.
/// Natural logarithm.
inline double entanglement_entropy(const Mat& d, const std::vector<int>& sites) {
  const int k = static_cast<int>(sites.size());
  Mat block(k, k);
  for (int i = 0; i < k; ++i) {
    if (sites[i] < 0 || sites[i] >= d.rows())
      throw std::invalid_argument("entanglement_entropy: site out of range");
    for (int j = 0; j < k; ++j) block(i, j) = d(sites[i], sites[j]);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(block, Eigen::EigenvaluesOnly);
  return detail::binary_entropy_sum(es.eigenvalues());
}

/// Entropy of the left half of the ladder (rungs 1..N/2 of both legs,
/// i.e. flattened sites 1..N).
inline double half_ladder_entropy(const Mat& d, int n_rungs) {
  std::vector<int> sites(n_rungs);
  for (int i = 0; i < n_rungs; ++i) sites[i] = i;
  return entanglement_entropy(d, sites);
}

namespace detail {

/// The two disjoint segments used for mutual information: width N/8
/// rungs each (both legs), centered N/2 apart and symmetric about the
/// ladder middle. Returns 0-based rung ranges [start, start+width).
inline std::pair<int, int> mi_segment_starts(int n_rungs, int& width) {
  width = n_rungs / 8;
  const int start_v = n_rungs / 4 - width / 2;  // 0-based
  const int start_w = start_v + n_rungs / 2;
  return {start_v, start_w};
}

inline std::vector<int> rung_range_sites(int start, int width) {
  std::vector<int> sites;
  for (int j = start; j < start + width; ++j) {
    sites.push_back(flat_index(j, Leg::A));
    sites.push_back(flat_index(j, Leg::B));
  }
  return sites;
}

}  // namespace detail

/// MI = S(V) + S(VI) - S(V u VI) between the two standard segments.
inline double mutual_information(const Mat& d, int n_rungs) {
  if (n_rungs % 8 != 0)
    throw std::invalid_argument("mutual_information: rung count must be divisible by 8");
  int width = 0;
  const auto [start_v, start_w] = detail::mi_segment_starts(n_rungs, width);
  const auto sites_v = detail::rung_range_sites(start_v, width);
  const auto sites_w = detail::rung_range_sites(start_w, width);
  std::vector<int> both = sites_v;
  both.insert(both.end(), sites_w.begin(), sites_w.end());
  return entanglement_entropy(d, sites_v) + entanglement_entropy(d, sites_w) -
         entanglement_entropy(d, both);
}

/// Connected density-density correlation between rungs N/2 and N/2+x of
/// one leg. By the Wick theorem this is |<c^dag_{N/2} c_{N/2+x}>|^2.
inline double connected_correlation(const Mat& d, Leg leg, int x, int n_rungs) {
  if (x < 1 || x > n_rungs / 2)
    throw std::invalid_argument("connected_correlation: x must be in [1, N/2]");
  const int s0 = flat_index(n_rungs / 2 - 1, leg);      // 1-based rung N/2
  const int s1 = flat_index(n_rungs / 2 - 1 + x, leg);  // 1-based rung N/2 + x
  return std::norm(d(s0, s1));
}

/// Time-gridded observables of a single trajectory.
struct ObservableSeries {
  std::vector<double> times;
  std::vector<double> entropy_half;
  std::vector<double> mutual_info;  // NaN when the geometry does not admit the segments
  std::vector<RVec> site_density;   // length 2N per sample
  std::vector<RVec> corr_aa, corr_bb;  // index x-1, x = 1..N/2
  bool has_mi = false;
  int n_rungs = 0;
  int n_particles = 0;
  // engine diagnostics
  double max_orthonormality_error = 0.0;
  long jump_count = 0;
  long prob_warnings = 0;  // steps where some p_i exceeded 0.1
  double max_jump_prob = 0.0;

  double density_A(int sample, int rung) const {
    return site_density[sample](flat_index(rung, Leg::A));
  }
  double density_B(int sample, int rung) const {
    return site_density[sample](flat_index(rung, Leg::B));
  }
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Ensemble mean and standard error over trajectories, plus steady-state
/// values defined as the time average over the final fraction of the run
/// (one window mean per trajectory, standard error across trajectories).
struct TrajectoryEnsemble {
  int n_traj = 0;
  std::vector<double> times;
  std::vector<double> entropy_mean, entropy_se;
  std::vector<double> mi_mean, mi_se;
  std::vector<RVec> density_mean, density_se;  // per sample, length 2N
  bool has_mi = false;
  double window_fraction = 0.2;

  MeanSe steady_entropy;
  MeanSe steady_mi;
  RVec steady_density_mean, steady_density_se;
  RVec steady_corr_aa_mean, steady_corr_aa_se;
  RVec steady_corr_bb_mean, steady_corr_bb_se;

  long total_jumps = 0;
  long prob_warnings = 0;
  double max_orthonormality_error = 0.0;
};

namespace detail {

inline MeanSe mean_se(const std::vector<double>& xs) {
  const int n = static_cast<int>(xs.size());
  double sum = 0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var = n > 1 ? var / (n - 1) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace detail

inline TrajectoryEnsemble ensemble_statistics(const std::vector<ObservableSeries>& series,
                                              double window_fraction = 0.2) {
  if (series.size() < 2)
    throw std::invalid_argument("ensemble_statistics: need at least 2 trajectories");
  const auto& grid = series.front().times;
  for (const auto& s : series)
    if (s.times != grid)
      throw std::invalid_argument("ensemble_statistics: mismatched time grids");

  const int n_traj = static_cast<int>(series.size());
  const int n_samples = static_cast<int>(grid.size());
  TrajectoryEnsemble ens;
  ens.n_traj = n_traj;
  ens.times = grid;
  ens.has_mi = series.front().has_mi;
  ens.window_fraction = window_fraction;

  std::vector<double> buffer(n_traj);
  auto stat_at = [&](auto&& getter) {
    for (int k = 0; k < n_traj; ++k) buffer[k] = getter(series[k]);
    return detail::mean_se(buffer);
  };

  for (int i = 0; i < n_samples; ++i) {
    const auto s_stat = stat_at([&](const ObservableSeries& s) { return s.entropy_half[i]; });
    ens.entropy_mean.push_back(s_stat.mean);
    ens.entropy_se.push_back(s_stat.se);
    if (ens.has_mi) {
      const auto m_stat = stat_at([&](const ObservableSeries& s) { return s.mutual_info[i]; });
      ens.mi_mean.push_back(m_stat.mean);
      ens.mi_se.push_back(m_stat.se);
    }
    const Eigen::Index n_sites = series.front().site_density[i].size();
    RVec dm = RVec::Zero(n_sites), ds = RVec::Zero(n_sites);
    for (Eigen::Index site = 0; site < n_sites; ++site) {
      const auto stat =
          stat_at([&](const ObservableSeries& s) { return s.site_density[i](site); });
      dm(site) = stat.mean;
      ds(site) = stat.se;
    }
    ens.density_mean.push_back(std::move(dm));
    ens.density_se.push_back(std::move(ds));
  }

  // steady-state window: samples in the final window_fraction of the run
  const double t_end = grid.back();
  const double t_start = t_end - window_fraction * t_end;
  std::vector<int> window;
  for (int i = 0; i < n_samples; ++i)
    if (grid[i] >= t_start - 1e-9) window.push_back(i);
  if (window.empty()) window.push_back(n_samples - 1);

  auto window_stat = [&](auto&& getter) {
    for (int k = 0; k < n_traj; ++k) {
      double acc = 0;
      for (int i : window) acc += getter(series[k], i);
      buffer[k] = acc / window.size();
    }
    return detail::mean_se(buffer);
  };

  ens.steady_entropy =
      window_stat([](const ObservableSeries& s, int i) { return s.entropy_half[i]; });
  if (ens.has_mi)
    ens.steady_mi =
        window_stat([](const ObservableSeries& s, int i) { return s.mutual_info[i]; });

  const Eigen::Index n_sites = series.front().site_density[0].size();
  ens.steady_density_mean.resize(n_sites);
  ens.steady_density_se.resize(n_sites);
  for (Eigen::Index site = 0; site < n_sites; ++site) {
    const auto stat = window_stat(
        [&](const ObservableSeries& s, int i) { return s.site_density[i](site); });
    ens.steady_density_mean(site) = stat.mean;
    ens.steady_density_se(site) = stat.se;
  }
  const Eigen::Index n_x = series.front().corr_aa.empty() ? 0 : series.front().corr_aa[0].size();
  ens.steady_corr_aa_mean.resize(n_x);
  ens.steady_corr_aa_se.resize(n_x);
  ens.steady_corr_bb_mean.resize(n_x);
  ens.steady_corr_bb_se.resize(n_x);
  for (Eigen::Index x = 0; x < n_x; ++x) {
    const auto stat_a =
        window_stat([&](const ObservableSeries& s, int i) { return s.corr_aa[i](x); });
    ens.steady_corr_aa_mean(x) = stat_a.mean;
    ens.steady_corr_aa_se(x) = stat_a.se;
    const auto stat_b =
        window_stat([&](const ObservableSeries& s, int i) { return s.corr_bb[i](x); });
    ens.steady_corr_bb_mean(x) = stat_b.mean;
    ens.steady_corr_bb_se(x) = stat_b.se;
  }

  for (const auto& s : series) {
    ens.total_jumps += s.jump_count;
    ens.prob_warnings += s.prob_warnings;
    ens.max_orthonormality_error =
        std::max(ens.max_orthonormality_error, s.max_orthonormality_error);
  }
  return ens;
}

}  // namespace lse
