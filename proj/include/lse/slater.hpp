// slater.hpp — Gaussian (Slater-determinant) states and their update rules:
// non-Hermitian drift, restabilization, quantum jumps

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "lse/common.hpp"
#include "lse/model.hpp"

namespace lse {

/// Pure Gaussian state |psi> = prod_l (sum_j U_jl c_j^dag) |0>, encoded by
/// an orthonormal 2N x N_p coefficient matrix. Particle number is the
/// column count and never changes.
struct SlaterState {
  Mat u;
  double time = 0.0;

  int n_particles() const { return static_cast<int>(u.cols()); }
  int n_sites() const { return static_cast<int>(u.rows()); }

  double orthonormality_error() const {
    return (u.adjoint() * u - Mat::Identity(u.cols(), u.cols())).cwiseAbs().maxCoeff();
  }
};

inline SlaterState basis_state(const LadderConfig& cfg, const std::vector<int>& occupied_flat) {
  cfg.validate();
  const int n = cfg.n_sites();
  SlaterState state;
  state.u = Mat::Zero(n, static_cast<int>(occupied_flat.size()));
  std::vector<bool> seen(n, false);
  for (size_t l = 0; l < occupied_flat.size(); ++l) {
    const int site = occupied_flat[l];
    if (site < 0 || site >= n) throw std::invalid_argument("basis_state: site out of range");
    if (seen[site]) throw std::invalid_argument("basis_state: repeated site");
    seen[site] = true;
    state.u(site, static_cast<Eigen::Index>(l)) = 1.0;
  }
  return state;
}

/// Half-filled checkerboard: leg A occupies odd rungs, leg B even rungs,
/// i.e. the flattened pattern 1,0,0,1,1,0,0,1,...
inline SlaterState neel_state(const LadderConfig& cfg) {
  if (cfg.n_rungs % 2 != 0)
    throw std::invalid_argument("neel_state: rung count must be even for the half-filled pattern");
  std::vector<int> occupied;
  for (int j = 0; j < cfg.n_rungs; ++j)
    occupied.push_back(j % 2 == 0 ? flat_index(j, Leg::A) : flat_index(j, Leg::B));
  return basis_state(cfg, occupied);
}

/// Half filling with the left half of every leg occupied.
inline SlaterState domain_wall_state(const LadderConfig& cfg) {
  if (cfg.n_rungs % 2 != 0)
    throw std::invalid_argument("domain_wall_state: rung count must be even");
  std::vector<int> occupied;
  for (int j = 0; j < cfg.n_rungs / 2; ++j) {
    occupied.push_back(flat_index(j, Leg::A));
    occupied.push_back(flat_index(j, Leg::B));
  }
  return basis_state(cfg, occupied);
}

/// One-step propagator exp(-i h_eff dt), computed once per run by
/// scaling-and-squaring and reused for every step.
inline Mat propagator(const LadderConfig& cfg, double dt) {
  if (!(dt > 0)) throw std::invalid_argument("propagator: dt must be positive");
  return Mat((-kI * dt) * build_heff(cfg)).exp();
}

namespace detail {

inline void householder_restabilize(Mat& u) {
  Eigen::HouseholderQR<Mat> qr(u);
  const double min_diag =
      qr.matrixQR().diagonal().head(u.cols()).cwiseAbs().minCoeff();
  if (min_diag < 1e-13)
    throw NumericError("rank-deficient state update (|R_kk| < 1e-13)");
  u = qr.householderQ() * Mat::Identity(u.rows(), u.cols());
}

/// Cholesky-based thin QR, U <- U R^{-1} with U^dag U = R^dag R. The
/// states fed in are within O(gamma dt) of an isometry, so a single pass
/// reaches machine-level orthonormality; a failed factorization falls
/// back to Householder QR.
inline void restabilize(Mat& u) {
  const Eigen::Index np = u.cols();
  Mat gram = Mat::Zero(np, np);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(u.adjoint());
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) {
    householder_restabilize(u);
    return;
  }
  const double min_diag = llt.matrixLLT().diagonal().real().minCoeff();
  if (min_diag < 1e-13)
    throw NumericError("rank-deficient state update (|R_kk| < 1e-13)");
  llt.matrixU().template solveInPlace<Eigen::OnTheRight>(u);
}

}  // namespace detail

/// U <- exp(-i h_eff dt) U followed by restabilization. The norm loss
/// from the anti-Hermitian part is absorbed here, which realizes the
/// nonlinear normalization term of the jump-free evolution implicitly.
inline void drift_step(SlaterState& state, const Mat& step_propagator) {
  state.u = step_propagator * state.u;
  detail::restabilize(state.u);
}

/// Per-channel jump probabilities p_i = gamma dt sum_k |<a_i|U_k>|^2.
/// Exact for orthonormal U; the mode overlaps are 2-sparse.
inline RVec jump_probabilities(const SlaterState& state,
                               const std::vector<JumpChannel>& channels, double gamma,
                               double dt) {
  RVec p(static_cast<Eigen::Index>(channels.size()));
  for (size_t c = 0; c < channels.size(); ++c) {
    const auto& ch = channels[c];
    const int f0 = flat_index(ch.rung, ch.leg);
    const int f1 = ch.phase_site;
    const double weight = (std::conj(ch.a(f0)) * state.u.row(f0) +
                           std::conj(ch.a(f1)) * state.u.row(f1))
                              .squaredNorm();
    p(static_cast<Eigen::Index>(c)) = gamma * dt * weight;
  }
  return p;
}

/// Apply one jump L = Phi_p (a a^dag) to the state:
/// pre-orthogonalize the columns against the mode, replace the pivot
/// column by the mode vector, flip the sign of the feedback row, and
/// restore orthonormality. The trailing columns' Gram matrix is exactly
/// I + d d^dag, so for well-conditioned pivots the re-orthonormalization
/// is a closed-form rank-1 update instead of a full QR.
inline void apply_jump(SlaterState& state, const JumpChannel& ch) {
  Mat& u = state.u;
  const Eigen::Index np = u.cols();
  const int f0 = flat_index(ch.rung, ch.leg);
  const int f1 = ch.phase_site;
  Eigen::RowVectorXcd overlap =
      std::conj(ch.a(f0)) * u.row(f0) + std::conj(ch.a(f1)) * u.row(f1);
  if (overlap.squaredNorm() <= 1e-12)
    throw NumericError("impossible jump: mode occupation below threshold (channel rung " +
                       std::to_string(ch.rung + 1) + leg_name(ch.leg) + ")");
  Eigen::Index pivot = -1;
  for (Eigen::Index k = 0; k < np; ++k)
    if (std::abs(overlap(k)) > 1e-12) {
      pivot = k;
      break;
    }
  if (pivot != 0) {
    u.col(0).swap(u.col(pivot));
    std::swap(overlap(0), overlap(pivot));
  }
  if (np > 1) {
    const Eigen::RowVectorXcd c = overlap.tail(np - 1) / overlap(0);
    u.rightCols(np - 1).noalias() -= u.col(0) * c;
    u.col(0).setZero();
    u(f0, 0) = ch.a(f0);
    u(f1, 0) = ch.a(f1);
    u.row(f1) = -u.row(f1);
    const double s = c.squaredNorm();
    if (s > 1e4) {
      // tiny pivot overlap: the updated columns are too skewed for the
      // closed form, restabilize the whole frame instead
      detail::restabilize(u);
    } else if (s > 0) {
      const double beta = (1.0 - 1.0 / std::sqrt(1.0 + s)) / s;
      const Vec d = c.adjoint();
      const Vec w = u.rightCols(np - 1) * d;
      u.rightCols(np - 1).noalias() -= beta * w * d.adjoint();
    }
  } else {
    u.col(0).setZero();
    u(f0, 0) = ch.a(f0);
    u(f1, 0) = ch.a(f1);
    u.row(f1) = -u.row(f1);
  }
}

}  // namespace lse
