// trajectory.hpp — stochastic Schrodinger evolution loop and ensemble runner

#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "lse/common.hpp"
#include "lse/model.hpp"
#include "lse/observables.hpp"
#include "lse/rng.hpp"
#include "lse/slater.hpp"

namespace lse {

struct TrajectoryConfig {
  double dt = 0.05;
  double t_total = 0.0;  // callers resolve "auto" to 2N before this point
  double sample_interval = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t trajectory_id = 0;

  void validate() const {
    if (!(dt > 0)) throw std::invalid_argument("TrajectoryConfig: dt must be positive");
    if (sample_interval < dt)
      throw std::invalid_argument("TrajectoryConfig: sample_interval must be >= dt");
    if (t_total < sample_interval)
      throw std::invalid_argument("TrajectoryConfig: t_total must be >= sample_interval");
    const double ratio = sample_interval / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      throw std::invalid_argument("TrajectoryConfig: sample_interval must be a multiple of dt");
  }
};

inline double default_total_time(const LadderConfig& cfg) { return 2.0 * cfg.n_rungs; }

namespace detail {

inline void record_sample(ObservableSeries& series, const SlaterState& state,
                          const LadderConfig& cfg, double time) {
  const Mat d = correlation_matrix(state);
  series.times.push_back(time);
  series.entropy_half.push_back(half_ladder_entropy(d, cfg.n_rungs));
  if (series.has_mi)
    series.mutual_info.push_back(mutual_information(d, cfg.n_rungs));
  else
    series.mutual_info.push_back(std::numeric_limits<double>::quiet_NaN());
  series.site_density.push_back(d.diagonal().real());
  const int n_x = cfg.n_rungs / 2;
  RVec caa(n_x), cbb(n_x);
  for (int x = 1; x <= n_x; ++x) {
    caa(x - 1) = connected_correlation(d, Leg::A, x, cfg.n_rungs);
    cbb(x - 1) = connected_correlation(d, Leg::B, x, cfg.n_rungs);
  }
  series.corr_aa.push_back(std::move(caa));
  series.corr_bb.push_back(std::move(cbb));
  series.max_orthonormality_error =
      std::max(series.max_orthonormality_error, state.orthonormality_error());
}

}  // namespace detail

/// One quantum trajectory: repeat (drift by dt, restabilize, sample
/// jumps, apply triggered jumps in the fixed channel order), recording
/// observables every sample_interval. Triggered jumps within one step
/// are applied without refreshing the probabilities; the O(dt^2) error
/// this makes is monitored through the p_i < 0.1 warning counter.
/// Bit-exact reproducible for fixed (seed, trajectory_id, dt).
inline ObservableSeries run_trajectory(const LadderConfig& cfg, const TrajectoryConfig& tcfg,
                                       SlaterState state, const Mat& step_propagator,
                                       const std::vector<JumpChannel>& channels) {
  cfg.validate();
  tcfg.validate();
  PhiloxRng rng(tcfg.seed, tcfg.trajectory_id);

  ObservableSeries series;
  series.n_rungs = cfg.n_rungs;
  series.n_particles = state.n_particles();
  series.has_mi = cfg.n_rungs % 8 == 0;

  const long n_steps = std::lround(tcfg.t_total / tcfg.dt);
  const long per_sample = std::lround(tcfg.sample_interval / tcfg.dt);
  detail::record_sample(series, state, cfg, 0.0);

  for (long step = 1; step <= n_steps; ++step) {
    try {
      drift_step(state, step_propagator);
      const RVec p = jump_probabilities(state, channels, cfg.gamma, tcfg.dt);
      const double p_max = p.size() ? p.maxCoeff() : 0.0;
      series.max_jump_prob = std::max(series.max_jump_prob, p_max);
      if (p_max > 0.1) ++series.prob_warnings;
      for (Eigen::Index c = 0; c < p.size(); ++c) {
        const double r = rng.uniform();
        if (r < p(c)) {
          apply_jump(state, channels[static_cast<size_t>(c)]);
          ++series.jump_count;
        }
      }
    } catch (const std::exception& e) {
      throw NumericError("trajectory " + std::to_string(tcfg.trajectory_id) + " failed at step " +
                         std::to_string(step) + ": " + e.what());
    }
    state.time = step * tcfg.dt;
    if (step % per_sample == 0) detail::record_sample(series, state, cfg, state.time);
  }
  return series;
}

/// Convenience overload that builds the propagator and channels itself.
inline ObservableSeries run_trajectory(const LadderConfig& cfg, const TrajectoryConfig& tcfg,
                                       const SlaterState& initial) {
  return run_trajectory(cfg, tcfg, initial, propagator(cfg, tcfg.dt),
                        build_jump_channels(cfg));
}

/// Run n_traj independent trajectories (ids 0..n_traj-1) across a worker
/// pool. Results land in id order, so the outcome is identical for any
/// worker count. A failing trajectory is retried once with the same
/// substream; a second failure aborts the ensemble.
inline std::vector<ObservableSeries> run_ensemble(const LadderConfig& cfg,
                                                  const TrajectoryConfig& base,
                                                  const SlaterState& initial, int n_traj,
                                                  int workers = 1) {
  if (n_traj < 1) throw std::invalid_argument("run_ensemble: n_traj must be >= 1");
  if (workers < 1) workers = 1;
  const Mat step_propagator = propagator(cfg, base.dt);
  const auto channels = build_jump_channels(cfg);

  std::vector<ObservableSeries> results(n_traj);
  std::vector<std::exception_ptr> failures(n_traj);
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (;;) {
      const int id = next.fetch_add(1);
      if (id >= n_traj) return;
      TrajectoryConfig tcfg = base;
      tcfg.trajectory_id = static_cast<std::uint64_t>(id);
      for (int attempt = 0;; ++attempt) {
        try {
          results[id] = run_trajectory(cfg, tcfg, initial, step_propagator, channels);
          break;
        } catch (...) {
          if (attempt == 0) continue;  // one retry with the same substream
          failures[id] = std::current_exception();
          break;
        }
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (int id = 0; id < n_traj; ++id)
    if (failures[id]) std::rethrow_exception(failures[id]);
  return results;
}

}  // namespace lse
