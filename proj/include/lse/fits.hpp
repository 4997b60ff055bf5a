// fits.hpp — least-squares fits used for scaling analyses

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lse/common.hpp"

namespace lse {

struct LinFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
  double slope_se = 0.0;      // standard error of the slope
  double intercept_se = 0.0;
  int n = 0;
};

namespace detail {

inline void check_abscissas(const std::vector<double>& xs) {
  if (xs.size() < 2) throw std::invalid_argument("fit: need at least 2 points");
  const double lo = *std::min_element(xs.begin(), xs.end());
  const double hi = *std::max_element(xs.begin(), xs.end());
  if (!(hi > lo)) throw std::invalid_argument("fit: degenerate abscissas");
}

}  // namespace detail

/// Ordinary least squares y = slope*x + intercept. R^2 is reported as 1
/// when the data are exactly constant and exactly reproduced (plateau
/// input), 0 for constant data with nonzero residual.
inline LinFit linear_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("fit: size mismatch");
  detail::check_abscissas(xs);
  const int n = static_cast<int>(xs.size());
  double sx = 0, sy = 0;
  for (int i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LinFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0, ss_tot = 0;
  for (int i = 0; i < n; ++i) {
    const double pred = fit.slope * xs[i] + fit.intercept;
    ss_res += (ys[i] - pred) * (ys[i] - pred);
    ss_tot += (ys[i] - my) * (ys[i] - my);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res > 0 ? 0.0 : 1.0);
  if (n > 2) {
    const double sigma2 = ss_res / (n - 2);
    fit.slope_se = std::sqrt(sigma2 / sxx);
    fit.intercept_se = std::sqrt(sigma2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

/// Weighted least squares with known per-point standard deviations;
/// parameter errors come from the normal-equation covariance.
inline LinFit weighted_linear_fit(const std::vector<double>& xs,
                                  const std::vector<double>& ys,
                                  const std::vector<double>& sigmas) {
  if (xs.size() != ys.size() || xs.size() != sigmas.size())
    throw std::invalid_argument("fit: size mismatch");
  detail::check_abscissas(xs);
  const int n = static_cast<int>(xs.size());
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    if (!(sigmas[i] > 0)) throw std::invalid_argument("fit: sigmas must be positive");
    const double w = 1.0 / (sigmas[i] * sigmas[i]);
    s += w;
    sx += w * xs[i];
    sy += w * ys[i];
    sxx += w * xs[i] * xs[i];
    sxy += w * xs[i] * ys[i];
  }
  const double det = s * sxx - sx * sx;
  if (!(det > 0)) throw std::invalid_argument("fit: degenerate abscissas");
  LinFit fit;
  fit.n = n;
  fit.slope = (s * sxy - sx * sy) / det;
  fit.intercept = (sxx * sy - sx * sxy) / det;
  fit.slope_se = std::sqrt(s / det);
  fit.intercept_se = std::sqrt(sxx / det);
  double ss_res = 0, ss_tot = 0;
  const double my = sy / s;
  for (int i = 0; i < n; ++i) {
    const double w = 1.0 / (sigmas[i] * sigmas[i]);
    const double pred = fit.slope * xs[i] + fit.intercept;
    ss_res += w * (ys[i] - pred) * (ys[i] - pred);
    ss_tot += w * (ys[i] - my) * (ys[i] - my);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res > 0 ? 0.0 : 1.0);
  return fit;
}

enum class ScalingModel { Plateau, Log, PowerLaw };

struct ScalingFit {
  ScalingModel model;
  // Plateau: value = mean. Log: value = slope*ln(N) + intercept.
  // PowerLaw: value = exp(intercept) * N^slope.
  double mean = 0.0;
  double max_rel_deviation = 0.0;
  LinFit line;
};

/// Fit (N, value) points in the model's linearizing coordinates.
/// PowerLaw and Log require positive N; PowerLaw requires positive values.
inline ScalingFit scaling_fit(const std::vector<double>& ns,
                              const std::vector<double>& values, ScalingModel model) {
  if (ns.size() != values.size()) throw std::invalid_argument("fit: size mismatch");
  if (ns.size() < 3) throw std::invalid_argument("scaling_fit: need at least 3 points");
  ScalingFit result;
  result.model = model;
  if (model == ScalingModel::Plateau) {
    double sum = 0;
    for (double v : values) sum += v;
    result.mean = sum / values.size();
    for (double v : values)
      result.max_rel_deviation =
          std::max(result.max_rel_deviation,
                   std::abs(v - result.mean) / std::max(std::abs(result.mean), 1e-300));
    return result;
  }
  std::vector<double> xs(ns.size()), ys(values.size());
  for (size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0)) throw std::invalid_argument("scaling_fit: N must be positive");
    xs[i] = std::log(ns[i]);
    if (model == ScalingModel::PowerLaw) {
      if (!(values[i] > 0))
        throw std::invalid_argument("scaling_fit: power law needs positive values");
      ys[i] = std::log(values[i]);
    } else {
      ys[i] = values[i];
    }
  }
  result.line = linear_fit(xs, ys);
  return result;
}

}  // namespace lse
