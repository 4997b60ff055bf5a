// common.hpp — shared types, ladder geometry, error hierarchy

#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace lse {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr const char* kVersion = "0.1.0";

/// A requested object would not fit under the configured memory cap.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(std::string what, std::uint64_t required_bytes)
      : std::runtime_error(std::move(what)), required_bytes_(required_bytes) {}
  std::uint64_t required_bytes() const { return required_bytes_; }

 private:
  std::uint64_t required_bytes_;
};

/// A numerical routine failed or produced results outside its contract.
class NumericError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Steady-state extraction found several candidate zero modes.
class DegenerateSteadyState : public NumericError {
 public:
  DegenerateSteadyState(std::string what, int count)
      : NumericError(std::move(what)), count_(count) {}
  int count() const { return count_; }

 private:
  int count_;
};

enum class Leg : int { A = 0, B = 1 };

inline char leg_name(Leg leg) { return leg == Leg::A ? 'A' : 'B'; }

// Flattened site layout: rung-major, leg A before leg B.
// 0-based internally; in file formats and docs rungs/sites are 1-based.
inline int flat_index(int rung, Leg leg) { return 2 * rung + static_cast<int>(leg); }
inline int rung_of(int flat) { return flat / 2; }
inline Leg leg_of(int flat) { return static_cast<Leg>(flat % 2); }

struct LadderConfig {
  int n_rungs = 2;      // N
  double t = 1.0;       // intrachain hopping
  double delta = 0.0;   // interchain hopping
  double gamma = 0.5;   // dissipation strength

  int n_sites() const { return 2 * n_rungs; }
  int n_channels() const { return 2 * (n_rungs - 1); }

  void validate() const {
    if (n_rungs < 2) throw std::invalid_argument("LadderConfig: need at least 2 rungs");
    if (!std::isfinite(t) || !std::isfinite(delta) || !std::isfinite(gamma))
      throw std::invalid_argument("LadderConfig: parameters must be finite");
    if (delta < 0.0) throw std::invalid_argument("LadderConfig: delta must be >= 0");
    if (gamma < 0.0) throw std::invalid_argument("LadderConfig: gamma must be >= 0");
  }
};

}  // namespace lse
