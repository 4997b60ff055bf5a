// oracle.hpp — exact Fock-space machinery for tiny ladders: second-quantized
// operators, vectorized Liouvillian, exact evolution, Slater embedding.
// Ground truth for the single-particle and trajectory engines; dense only.

#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "lse/common.hpp"
#include "lse/model.hpp"

namespace lse::oracle {

/// Occupation-number basis for a fixed particle-number sector (or the
/// full space with n_particles = -1). Bit k of a state word is flattened
/// site k+1; creation strings are mode-index ordered, so c_k^dag acting
/// on a state picks up (-1)^(number of occupied modes below k).
struct FockBasis {
  int n_sites = 0;
  int n_particles = -1;
  std::vector<std::uint32_t> states;  // ascending

  static FockBasis make(int n_sites, int n_particles = -1) {
    if (n_sites < 1 || n_sites > 24)
      throw std::invalid_argument("FockBasis: site count out of supported range");
    FockBasis basis;
    basis.n_sites = n_sites;
    basis.n_particles = n_particles;
    const std::uint32_t end = 1u << n_sites;
    for (std::uint32_t s = 0; s < end; ++s)
      if (n_particles < 0 || std::popcount(s) == n_particles) basis.states.push_back(s);
    return basis;
  }

  int dim() const { return static_cast<int>(states.size()); }

  int index_of(std::uint32_t s) const {
    const auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s)
      throw std::invalid_argument("FockBasis: state outside basis");
    return static_cast<int>(it - states.begin());
  }

  std::uint32_t word_from_sites(const std::vector<int>& occupied) const {
    std::uint32_t s = 0;
    for (int site : occupied) {
      if (site < 0 || site >= n_sites) throw std::invalid_argument("site out of range");
      s |= 1u << site;
    }
    return s;
  }
};

namespace detail {

inline int jw_sign(std::uint32_t state, int mode) {
  const std::uint32_t below = state & ((1u << mode) - 1u);
  return std::popcount(below) % 2 == 0 ? 1 : -1;
}

}  // namespace detail

/// Matrix of sum_kl h_kl c_k^dag c_l on the basis.
inline Mat op_quadratic(const FockBasis& basis, const Mat& h) {
  const int d = basis.dim();
  const int n = basis.n_sites;
  Mat m = Mat::Zero(d, d);
  for (int col = 0; col < d; ++col) {
    const std::uint32_t s = basis.states[col];
    for (int l = 0; l < n; ++l) {
      if (!(s & (1u << l))) continue;
      const int sign_l = detail::jw_sign(s, l);
      const std::uint32_t s1 = s ^ (1u << l);
      for (int k = 0; k < n; ++k) {
        const cplx hkl = h(k, l);
        if (hkl == cplx(0, 0)) continue;
        if (s1 & (1u << k)) continue;
        const int sign_k = detail::jw_sign(s1, k);
        const std::uint32_t s2 = s1 | (1u << k);
        m(basis.index_of(s2), col) += static_cast<double>(sign_l * sign_k) * hkl;
      }
    }
  }
  return m;
}

/// Diagonal matrix of exp(i pi n_p): -1 on states with site p occupied.
inline Mat op_phase(const FockBasis& basis, int p) {
  const int d = basis.dim();
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i)
    m(i, i) = (basis.states[i] & (1u << p)) ? -1.0 : 1.0;
  return m;
}

/// xi^dag xi for the mode xi^dag = sum_k a_k c_k^dag; a projector on any
/// particle-number sector.
inline Mat op_mode_projector(const FockBasis& basis, const Vec& a) {
  return op_quadratic(basis, a * a.adjoint());
}

inline Mat op_number_total(const FockBasis& basis) {
  const int d = basis.dim();
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = std::popcount(basis.states[i]);
  return m;
}

struct FockOperators {
  Mat h0;
  Mat heff;
  std::vector<Mat> jump_ops;         // L = phase * projector, fixed channel order
  std::vector<Mat> mode_projectors;  // xi^dag xi per channel
};

inline FockOperators build_fock_operators(const LadderConfig& cfg, const FockBasis& basis) {
  if (basis.n_sites != cfg.n_sites())
    throw std::invalid_argument("build_fock_operators: basis size mismatch");
  FockOperators ops;
  ops.h0 = op_quadratic(basis, build_h0(cfg));
  ops.heff = op_quadratic(basis, build_heff(cfg));
  for (const auto& ch : build_jump_channels(cfg)) {
    Mat proj = op_mode_projector(basis, ch.a);
    ops.jump_ops.push_back(op_phase(basis, ch.phase_site) * proj);
    ops.mode_projectors.push_back(std::move(proj));
  }
  return ops;
}

/// Dense vectorized Liouvillian on the sector, same pairing convention
/// as the single-particle module: |rho>> index i*d + j.
inline Mat vectorized_liouvillian(const Mat& heff, const std::vector<Mat>& jumps, double gamma,
                                  std::uint64_t cap_bytes = 8ull << 30) {
  const int d = static_cast<int>(heff.rows());
  const std::uint64_t dim = static_cast<std::uint64_t>(d) * d;
  const std::uint64_t required = 16ull * dim * dim;
  if (required > cap_bytes)
    throw CapacityError("vectorized Liouvillian of dimension " + std::to_string(dim) +
                            " requires " + std::to_string(required) + " bytes, cap is " +
                            std::to_string(cap_bytes),
                        required);
  Mat lv = Mat::Zero(dim, dim);
  auto idx = [d](int i, int j) { return static_cast<Eigen::Index>(i) * d + j; };
  struct Entry {
    int r, c;
    cplx v;
  };
  std::vector<Entry> nz;
  auto collect = [&](const Mat& m) {
    nz.clear();
    for (int c = 0; c < d; ++c)
      for (int r = 0; r < d; ++r)
        if (m(r, c) != cplx(0, 0)) nz.push_back({r, c, m(r, c)});
  };
  collect(heff);
  for (const auto& e : nz) {
    const cplx left = -kI * e.v;
    const cplx right = kI * std::conj(e.v);
    for (int j = 0; j < d; ++j) {
      lv(idx(e.r, j), idx(e.c, j)) += left;
      lv(idx(j, e.r), idx(j, e.c)) += right;
    }
  }
  for (const auto& jump : jumps) {
    collect(jump);
    for (const auto& e1 : nz)
      for (const auto& e2 : nz)
        lv(idx(e1.r, e2.r), idx(e1.c, e2.c)) += gamma * e1.v * std::conj(e2.v);
  }
  return lv;
}

inline Vec vectorize_density(const Mat& rho) {
  const int d = static_cast<int>(rho.rows());
  Vec v(static_cast<Eigen::Index>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v(static_cast<Eigen::Index>(i) * d + j) = rho(i, j);
  return v;
}

inline Mat devectorize_density(const Vec& v, int d) {
  Mat rho(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) rho(i, j) = v(static_cast<Eigen::Index>(i) * d + j);
  return rho;
}

enum class EvolveMethod { MatrixExp, AdaptiveRK };

struct ExactEvolution {
  std::vector<double> times;
  std::vector<Mat> rho;
};

namespace detail {

/// Dormand-Prince 5(4) with standard step control.
inline Vec integrate_dopri5(const Mat& lv, Vec y, double t0, double t1, double tol) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640,
                          e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
  const double span = t1 - t0;
  if (span <= 0) return y;
  double t = t0;
  double h = span / 16.0;
  Vec k1 = lv * y;
  while (t < t1 - 1e-14 * span) {
    h = std::min(h, t1 - t);
    const Vec k2 = lv * (y + h * a21 * k1);
    const Vec k3 = lv * (y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = lv * (y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = lv * (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = lv * (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = lv * y_new;
    const double err =
        (h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7)).norm();
    const double scale = tol * std::max(1.0, y.norm());
    if (err <= scale) {
      t += h;
      y = y_new;
      k1 = k7;
    }
    const double factor = err > 0 ? 0.9 * std::pow(scale / err, 0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
    if (h < 1e-13 * span)
      throw NumericError("adaptive integrator step underflow, achieved error " +
                         std::to_string(err));
  }
  return y;
}

}  // namespace detail

/// |rho(t)>> = exp(Ltilde t) |rho0>> on the time grid, by repeated dense
/// exponential (uniform grids reuse one exponential) or adaptive RK.
inline ExactEvolution exact_evolve(const Mat& liouvillian, const Mat& rho0,
                                   const std::vector<double>& t_grid,
                                   EvolveMethod method = EvolveMethod::MatrixExp,
                                   double rk_tol = 1e-10) {
  const int d = static_cast<int>(rho0.rows());
  if (std::abs(rho0.trace().real() - 1.0) > 1e-10)
    throw std::invalid_argument("exact_evolve: rho0 must have unit trace");
  if (t_grid.empty() || t_grid.front() < 0)
    throw std::invalid_argument("exact_evolve: bad time grid");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (t_grid[i] <= t_grid[i - 1])
      throw std::invalid_argument("exact_evolve: time grid must increase");

  ExactEvolution evo;
  Vec v = vectorize_density(rho0);
  double t_prev = 0.0;
  bool uniform = true;
  const double step0 = t_grid.front() == 0 && t_grid.size() > 1
                           ? t_grid[1] - t_grid[0]
                           : t_grid.front();
  std::vector<double> intervals;
  for (size_t i = 0; i < t_grid.size(); ++i) {
    intervals.push_back(t_grid[i] - (i == 0 ? 0.0 : t_grid[i - 1]));
    if (std::abs(intervals.back() - step0) > 1e-12 && intervals.back() != 0.0) uniform = false;
  }

  Mat step_exp;
  if (method == EvolveMethod::MatrixExp && uniform && step0 > 0)
    step_exp = Mat(liouvillian * step0).exp();

  for (size_t i = 0; i < t_grid.size(); ++i) {
    const double dt = t_grid[i] - t_prev;
    if (dt > 0) {
      if (method == EvolveMethod::MatrixExp) {
        if (uniform && step0 > 0)
          v = step_exp * v;
        else
          v = Mat(liouvillian * dt).exp() * v;
      } else {
        v = detail::integrate_dopri5(liouvillian, std::move(v), t_prev, t_grid[i], rk_tol);
      }
    }
    t_prev = t_grid[i];
    evo.times.push_back(t_grid[i]);
    evo.rho.push_back(devectorize_density(v, d));
  }
  return evo;
}

inline double density(const FockBasis& basis, const Mat& rho, int site) {
  double n = 0;
  for (int i = 0; i < basis.dim(); ++i)
    if (basis.states[i] & (1u << site)) n += rho(i, i).real();
  return n;
}

inline cplx two_point(const FockBasis& basis, const Mat& rho, int i, int j) {
  Mat h = Mat::Zero(basis.n_sites, basis.n_sites);
  h(i, j) = 1.0;
  return (rho * op_quadratic(basis, h)).trace();
}

inline double density_density(const FockBasis& basis, const Mat& rho, int i, int j) {
  double n = 0;
  const std::uint32_t mask = (1u << i) | (1u << j);
  for (int k = 0; k < basis.dim(); ++k)
    if ((basis.states[k] & mask) == mask) n += rho(k, k).real();
  return n;
}

inline double purity(const Mat& rho) { return (rho * rho).trace().real(); }

/// Expand a Slater coefficient matrix into the occupation basis. The
/// amplitude on a bitstring with occupied rows i_1 < ... < i_Np is the
/// determinant of the corresponding row submatrix of U.
inline Vec embed_slater(const FockBasis& basis, const Mat& u) {
  const int np = static_cast<int>(u.cols());
  if (basis.n_particles != np)
    throw std::invalid_argument("embed_slater: particle number mismatch");
  if (basis.n_sites != u.rows())
    throw std::invalid_argument("embed_slater: site count mismatch");
  Vec psi(basis.dim());
  Mat minor(np, np);
  for (int b = 0; b < basis.dim(); ++b) {
    const std::uint32_t s = basis.states[b];
    int row = 0;
    for (int site = 0; site < basis.n_sites; ++site)
      if (s & (1u << site)) minor.row(row++) = u.row(site);
    psi(b) = minor.determinant();
  }
  return psi;
}

}  // namespace lse::oracle
