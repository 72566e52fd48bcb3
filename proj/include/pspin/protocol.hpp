// Measurement/feedback protocol parameters shared by the Gaussian and the
// exact engines: step length, measurement resolution, schedule and the
// feedback rotation conditioned on an outcome.
#pragma once

#include "pspin/model.hpp"

#include <Eigen/Geometry>

#include <cstdint>
#include <random>

namespace pspin {

using Rng = std::mt19937_64;

enum class Schedule { constant, adiabatic };

struct ProtocolConfig {
  ModelParams params;
  double dt = 0.01;
  /// Measurement resolution in units of projection noise, sigma = mu sqrt(J).
  double mu = 25.0;
  std::int64_t n_steps = 1;
  std::uint64_t seed = 0;
  Schedule schedule = Schedule::constant;
  /// Passage time T of the adiabatic schedule s(t) = t/T.
  double total_time = 0.0;
  /// Replace every outcome by its mean and drop all fluctuations.
  bool noiseless = false;

  double sigma() const { return mu * std::sqrt(params.J()); }

  /// Mixing parameter used during step `step` (0-based).
  double s_at(std::int64_t step) const {
    if (schedule == Schedule::constant) return params.s;
    const double s = static_cast<double>(step) * dt / total_time;
    return s > 1.0 ? 1.0 : s;
  }

  /// W = (dt s)^(1/(p-1)), the scale converting outcome noise into feedback noise.
  double feedback_scale(double s) const { return std::pow(dt * s, 1.0 / (params.p - 1)); }

  void validate() const {
    params.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
    if (schedule == Schedule::adiabatic && !(total_time > 0.0)) {
      throw std::invalid_argument("adiabatic schedule needs a positive passage time");
    }
  }
};

/// Angles of U = exp(i (alpha Jy + beta Jz)) = e^{i varphi Jx} e^{i gamma Jz} e^{-i varphi Jx}.
struct FeedbackAngles {
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;
  double varphi = 0.0;

  /// Action of U on the mean spin vector: a rotation by -gamma about
  /// (0, alpha, beta)/gamma, which reproduces the classical flow to first order in dt.
  Eigen::Matrix3d rotation() const {
    if (gamma == 0.0) return Eigen::Matrix3d::Identity();
    return Eigen::AngleAxisd(-gamma, Eigen::Vector3d(0.0, alpha / gamma, beta / gamma)).toRotationMatrix();
  }
};

/// alpha = dt (1-s), beta = dt s (m/J)^(p-1), gamma = |(alpha, beta)|,
/// varphi = atan2(alpha, beta) (= arcsin(alpha/gamma) for beta >= 0).
FeedbackAngles feedback_angles(double m, const ProtocolConfig& config, double s);

inline FeedbackAngles feedback_angles(double m, const ProtocolConfig& config) {
  return feedback_angles(m, config, config.params.s);
}

}  // namespace pspin
