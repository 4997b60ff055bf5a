// liouville.hpp — vectorized single-particle Lindbladian: construction,
// spectra, gaps, steady states

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lse/common.hpp"
#include "lse/eig.hpp"
#include "lse/fits.hpp"
#include "lse/model.hpp"

namespace lse {

enum class LiouvilleKind { Ladder, SingleLeg };

/// Dense matrix form of the Liouvillian acting on vectorized density
/// matrices, |rho>> = sum_ij rho_ij |i>|j> with composite index i*d + j:
///   Ltilde = -i (h_eff x I - I x h_eff^*) + gamma sum_ch L x L^*.
struct LiouvillianMatrix {
  Mat m;
  int sp_dim;  // single-particle dimension d; m is d^2 x d^2
  LadderConfig cfg;
  LiouvilleKind kind = LiouvilleKind::Ladder;
  Leg leg = Leg::A;  // meaningful for SingleLeg only
};

inline constexpr std::uint64_t kDefaultMemCapBytes = 8ull << 30;  // 8 GiB

namespace detail {

inline void check_liouvillian_capacity(int sp_dim, std::uint64_t cap_bytes) {
  const std::uint64_t dim = static_cast<std::uint64_t>(sp_dim) * sp_dim;
  // matrix itself plus eigensolver working set
  const std::uint64_t required = 3ull * 16ull * dim * dim;
  if (required > cap_bytes)
    throw CapacityError("Liouvillian of dimension " + std::to_string(dim) + " requires ~" +
                            std::to_string(required) + " bytes, cap is " +
                            std::to_string(cap_bytes) + " bytes",
                        required);
}

/// Shared builder: h_eff plus rank-1 jump matrices given as (mode vector,
/// phase site) pairs. The dissipator of each channel is a rank-1 update
/// in the doubled space because the mode vectors are 2-sparse.
inline Mat build_vectorized(const Mat& heff, const std::vector<std::pair<Vec, int>>& channels,
                            double gamma) {
  const int d = static_cast<int>(heff.rows());
  const std::uint64_t dim = static_cast<std::uint64_t>(d) * d;
  Mat lv = Mat::Zero(dim, dim);
  auto idx = [d](int i, int j) { return static_cast<Eigen::Index>(i) * d + j; };
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const cplx h = heff(i, k);
      if (h == cplx(0, 0)) continue;
      const cplx drift = -kI * h;
      for (int j = 0; j < d; ++j) lv(idx(i, j), idx(k, j)) += drift;
    }
  for (int j = 0; j < d; ++j)
    for (int l = 0; l < d; ++l) {
      const cplx h = heff(j, l);
      if (h == cplx(0, 0)) continue;
      const cplx drift = kI * std::conj(h);
      for (int i = 0; i < d; ++i) lv(idx(i, j), idx(i, l)) += drift;
    }
  for (const auto& [a, p] : channels) {
    std::vector<int> support;
    for (int s = 0; s < d; ++s)
      if (a(s) != cplx(0, 0)) support.push_back(s);
    Vec phased = a;
    phased(p) = -phased(p);
    // gamma * (u v^dag) with u = phased x phased^*, v = a x a^*
    for (int m : support)
      for (int n : support) {
        const cplx u = phased(m) * std::conj(phased(n));
        for (int k : support)
          for (int l : support) {
            const cplx v = a(k) * std::conj(a(l));
            lv(idx(m, n), idx(k, l)) += gamma * u * std::conj(v);
          }
      }
  }
  return lv;
}

}  // namespace detail

inline LiouvillianMatrix build_liouvillian(const LadderConfig& cfg,
                                           std::uint64_t cap_bytes = kDefaultMemCapBytes) {
  cfg.validate();
  detail::check_liouvillian_capacity(cfg.n_sites(), cap_bytes);
  const Mat heff = build_heff(cfg);
  std::vector<std::pair<Vec, int>> channels;
  for (const auto& ch : build_jump_channels(cfg)) channels.emplace_back(ch.a, ch.phase_site);
  return LiouvillianMatrix{detail::build_vectorized(heff, channels, cfg.gamma),
                           cfg.n_sites(), cfg, LiouvilleKind::Ladder, Leg::A};
}

/// Decoupled-limit Liouvillian of one leg alone (N sites, N-1 channels).
/// Only meaningful at delta = 0, where the legs evolve independently.
inline LiouvillianMatrix build_leg_liouvillian(const LadderConfig& cfg, Leg leg,
                                               std::uint64_t cap_bytes = kDefaultMemCapBytes) {
  cfg.validate();
  if (cfg.delta != 0.0)
    throw std::invalid_argument("build_leg_liouvillian: legs only decouple at delta = 0");
  detail::check_liouvillian_capacity(cfg.n_rungs, cap_bytes);
  const int n = cfg.n_rungs;
  const Mat heff_full = build_heff(cfg);
  Mat heff(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) heff(i, j) = heff_full(flat_index(i, leg), flat_index(j, leg));
  std::vector<std::pair<Vec, int>> channels;
  for (const auto& ch : build_jump_channels(cfg)) {
    if (ch.leg != leg) continue;
    Vec a = Vec::Zero(n);
    a(ch.rung) = ch.a(flat_index(ch.rung, leg));
    a(ch.rung + 1) = ch.a(flat_index(ch.rung + 1, leg));
    channels.emplace_back(std::move(a), ch.rung + 1);
  }
  return LiouvillianMatrix{detail::build_vectorized(heff, channels, cfg.gamma),
                           n, cfg, LiouvilleKind::SingleLeg, leg};
}

struct SpectrumResult {
  Vec eigenvalues;
  double gap = 0.0;
  Mat steady_state;             // d x d, Hermitized, trace 1 (empty if skipped)
  RVec site_density;            // diagonal of steady_state
  RVec density_A, density_B;    // per-rung densities (Ladder kind only)
  double steady_eigenvalue_abs = 0.0;
  double steady_min_eigenvalue = 0.0;  // most negative eigenvalue of rho
};

namespace detail {

inline void fill_densities(SpectrumResult& r, const LiouvillianMatrix& lv) {
  const int d = lv.sp_dim;
  r.site_density = r.steady_state.diagonal().real();
  if (lv.kind == LiouvilleKind::Ladder) {
    const int n = lv.cfg.n_rungs;
    r.density_A.resize(n);
    r.density_B.resize(n);
    for (int j = 0; j < n; ++j) {
      r.density_A(j) = r.site_density(flat_index(j, Leg::A));
      r.density_B(j) = r.site_density(flat_index(j, Leg::B));
    }
  } else {
    r.density_A.resize(0);
    r.density_B.resize(0);
  }
  (void)d;
}

inline Mat vector_to_density(const Vec& v, int d) {
  Mat rho(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) rho(i, j) = v(static_cast<Eigen::Index>(i) * d + j);
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  const double tr = rho.trace().real();
  if (std::abs(tr) < 1e-12)
    throw NumericError("steady-state candidate has vanishing trace");
  rho /= tr;
  return rho;
}

inline double gap_from_spectrum(const Vec& values, double tol_zero) {
  double max_re = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (std::abs(values(i)) > tol_zero) max_re = std::max(max_re, values(i).real());
  return std::max(0.0, -max_re);
}

}  // namespace detail

/// Full eigendecomposition. The steady state is the (unique) |lambda| <
/// tol_zero right eigenvector reshaped to d x d, Hermitized and trace
/// normalized. Zero modes: none -> NumericError, several ->
/// DegenerateSteadyState (happens at delta = 0 where the legs decouple).
inline SpectrumResult diagonalize(const LiouvillianMatrix& lv, bool with_steady_state = true,
                                  double tol_zero = 1e-8) {
  const int d = lv.sp_dim;
  SpectrumResult result;
  if (!with_steady_state) {
    result.eigenvalues = eigvals(lv.m);
    result.gap = detail::gap_from_spectrum(result.eigenvalues, tol_zero);
    return result;
  }
  Eigensystem es = eig_right(lv.m);
  result.eigenvalues = es.values;
  result.gap = detail::gap_from_spectrum(es.values, tol_zero);

  std::vector<Eigen::Index> zero_modes;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (std::abs(es.values(i)) < tol_zero) zero_modes.push_back(i);
  if (zero_modes.empty()) throw NumericError("no steady state found (no |lambda| < tol_zero)");
  if (zero_modes.size() > 1)
    throw DegenerateSteadyState("degenerate steady sector: " +
                                    std::to_string(zero_modes.size()) + " zero modes",
                                static_cast<int>(zero_modes.size()));

  const Eigen::Index z = zero_modes.front();
  const Vec v = es.right.col(z);
  const double op_norm = lv.m.cwiseAbs().rowwise().sum().maxCoeff();
  const double residual = (lv.m * v - es.values(z) * v).norm();
  if (residual > 1e-7 * op_norm)
    throw NumericError("steady-state eigenpair residual " + std::to_string(residual) +
                       " exceeds tolerance");
  result.steady_state = detail::vector_to_density(v, d);
  result.steady_eigenvalue_abs = std::abs(es.values(z));
  result.steady_min_eigenvalue =
      eigvals_hermitian(result.steady_state).minCoeff();
  detail::fill_densities(result, lv);
  return result;
}

/// Steady state via LU-based inverse iteration with a tiny shift. Much
/// cheaper than a full eigendecomposition for large dimensions; only
/// valid when the zero mode is unique and separated by the gap.
inline SpectrumResult steady_state_lu(const LiouvillianMatrix& lv, double tol_zero = 1e-8) {
  const int d = lv.sp_dim;
  const Eigen::Index dim = lv.m.rows();
  Mat a = lv.m;
  const double shift = 1e-10;
  for (Eigen::Index i = 0; i < dim; ++i) a(i, i) -= shift;
  std::vector<lapack_int> ipiv(dim);
  lapack_int info = LAPACKE_zgetrf(LAPACK_COL_MAJOR, static_cast<lapack_int>(dim),
                                   static_cast<lapack_int>(dim), a.data(),
                                   static_cast<lapack_int>(dim), ipiv.data());
  if (info != 0) throw NumericError("zgetrf failed, info=" + std::to_string(info));

  // start from vec(I): it always overlaps the steady mode (trace 1)
  Vec v = Vec::Zero(dim);
  for (int i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i) * d + i) = 1.0;
  v.normalize();
  for (int iter = 0; iter < 2; ++iter) {
    info = LAPACKE_zgetrs(LAPACK_COL_MAJOR, 'N', static_cast<lapack_int>(dim), 1, a.data(),
                          static_cast<lapack_int>(dim), ipiv.data(), v.data(),
                          static_cast<lapack_int>(dim));
    if (info != 0) throw NumericError("zgetrs failed, info=" + std::to_string(info));
    v.normalize();
  }
  const Vec lv_v = lv.m * v;
  const cplx rayleigh = v.dot(lv_v);
  if (std::abs(rayleigh) > tol_zero)
    throw NumericError("inverse iteration did not land on a zero mode (|lambda| = " +
                       std::to_string(std::abs(rayleigh)) + ")");
  const double op_norm = lv.m.cwiseAbs().rowwise().sum().maxCoeff();
  if ((lv_v - rayleigh * v).norm() > 1e-7 * op_norm)
    throw NumericError("inverse-iteration residual exceeds tolerance");

  SpectrumResult result;
  result.steady_state = detail::vector_to_density(v, d);
  result.steady_eigenvalue_abs = std::abs(rayleigh);
  result.steady_min_eigenvalue = eigvals_hermitian(result.steady_state).minCoeff();
  detail::fill_densities(result, lv);
  return result;
}

struct GapPoint {
  int n_rungs;
  double delta;
  double gap = 0.0;
  bool ok = false;
  std::string error;
};

struct GapSlope {
  double delta;
  bool ok = false;
  LinFit loglog;  // slope of ln(gap) vs ln(N)
};

struct GapScanResult {
  std::vector<GapPoint> points;
  std::vector<GapSlope> slopes;
};

/// Gap over an (N, delta) grid; per-point failures are recorded and the
/// scan continues. Also fits the log-log slope of gap vs N per delta.
inline GapScanResult gap_scan(LadderConfig base, const std::vector<int>& n_list,
                              const std::vector<double>& delta_list,
                              std::uint64_t cap_bytes = kDefaultMemCapBytes) {
  GapScanResult scan;
  for (double delta : delta_list) {
    std::vector<double> ok_n, ok_gap;
    for (int n : n_list) {
      GapPoint point{n, delta};
      try {
        LadderConfig cfg = base;
        cfg.n_rungs = n;
        cfg.delta = delta;
        LiouvillianMatrix lv = build_liouvillian(cfg, cap_bytes);
        const Vec values = eigvals(std::move(lv.m));
        point.gap = detail::gap_from_spectrum(values, 1e-8);
        point.ok = true;
        if (point.gap > 0) {
          ok_n.push_back(n);
          ok_gap.push_back(point.gap);
        }
      } catch (const std::exception& e) {
        point.error = e.what();
      }
      scan.points.push_back(std::move(point));
    }
    GapSlope slope{delta};
    if (ok_n.size() >= 3) {
      slope.loglog = scaling_fit(ok_n, ok_gap, ScalingModel::PowerLaw).line;
      slope.ok = true;
    }
    scan.slopes.push_back(slope);
  }
  return scan;
}

struct SpectralRangePoint {
  int n_rungs;
  double max_abs_re = 0.0;
  bool ok = false;
  std::string error;
};

inline std::vector<SpectralRangePoint> spectral_range(
    LadderConfig base, const std::vector<int>& n_list,
    std::uint64_t cap_bytes = kDefaultMemCapBytes) {
  std::vector<SpectralRangePoint> result;
  for (int n : n_list) {
    SpectralRangePoint point{n};
    try {
      LadderConfig cfg = base;
      cfg.n_rungs = n;
      LiouvillianMatrix lv = build_liouvillian(cfg, cap_bytes);
      const Vec values = eigvals(std::move(lv.m));
      point.max_abs_re = values.real().cwiseAbs().maxCoeff();
      point.ok = true;
    } catch (const std::exception& e) {
      point.error = e.what();
    }
    result.push_back(std::move(point));
  }
  return result;
}

}  // namespace lse
