// Large-N simulator of the measurement/feedback protocol in the co-moving
// Holstein-Primakoff picture. The state is a Gaussian on the tangent plane
// of the mean spin: a Bloch vector, an orthonormal frame (e1, e2, e_r) with
// e_r along the mean, and the 2x2 covariance of the quadratures (J1, J2)
// in spin units (J/2 times identity for a coherent state).
//
// One protocol step is built compositionally:
//   1. Gaussian conditioning on the Jz outcome. The measured quadrature is
//      updated as a Kalman filter; the conjugate quadrature receives the
//      backaction J^2 |c|^2 / (4 sigma^2) that keeps pure states pure. The
//      mean moves along the tangent-plane geodesic of the Kalman shift.
//   2. The feedback rotation U(m), which carries the mean and the frame
//      rigidly, so the covariance entries are unchanged in the co-moving frame.
#pragma once

#include "pspin/model.hpp"
#include "pspin/protocol.hpp"

#include <cstdint>

namespace pspin {

struct GaussianSpinState {
  BlochVector mean = BlochVector::UnitZ();
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  /// Columns e1, e2, e_r.
  Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();

  /// Spin coherent state pointing along `direction`, covariance (J/2) I in
  /// the spherical frame (e_phi, -e_theta, e_r).
  static GaussianSpinState coherent(const BlochVector& direction, double J);

  /// Components of the z axis on (e1, e2): Jz - <Jz> = c1 dJ1 + c2 dJ2.
  Eigen::Vector2d z_projection() const { return frame.row(2).head<2>().transpose(); }

  /// Projection noise (Delta Jz^2) in spin units.
  double var_jz() const {
    const Eigen::Vector2d c = z_projection();
    return c.dot(cov * c);
  }
};

/// The spherical frame (e_phi, -e_theta, e_r) at direction x. At the poles
/// the azimuth is taken as 0.
Eigen::Matrix3d spherical_frame(const BlochVector& x);

/// Covariance re-expressed in the tangent basis of `target` (congruence
/// transform). Both frames must share e_r.
Eigen::Matrix2d covariance_in_frame(const GaussianSpinState& state, const Eigen::Matrix3d& target);

struct NoiseDraw {
  double eta1 = 0.0;
  double eta2 = 0.0;
  double m = 0.0;
  /// m - <Jz>.
  double m_theta = 0.0;
};

/// Measurement constants for one step.
struct MeasurementModel {
  double sigma = 1.0;
  /// W = (dt s)^(1/(p-1)).
  double feedback_scale = 0.0;
  double J = 0.5;

  static MeasurementModel from(const ProtocolConfig& config, double s) {
    return {config.sigma(), config.feedback_scale(s), config.params.J()};
  }
};

/// m ~ Normal(J Z, sigma^2 + (Delta Jz^2)), eta1 = m_theta / sigma^2, eta2 = W m_theta / J.
NoiseDraw sample_measurement(const GaussianSpinState& state, const MeasurementModel& model, Rng& rng);

/// The draw obtained when the outcome equals its mean.
NoiseDraw noiseless_draw(const GaussianSpinState& state, const MeasurementModel& model);

/// Conditioning on the outcome alone (no feedback).
GaussianSpinState condition_on_outcome(const GaussianSpinState& state, const NoiseDraw& draw, double sigma, double J);

/// Full protocol step (conditioning followed by the feedback rotation).
GaussianSpinState protocol_step(const GaussianSpinState& state, const NoiseDraw& draw, const ProtocolConfig& config,
                                double s);

BlochVector step_mean(const GaussianSpinState& state, const NoiseDraw& draw, const ProtocolConfig& config, double s);

struct CovarianceUpdate {
  Eigen::Matrix2d cov;
  Eigen::Matrix3d frame;
};
CovarianceUpdate step_covariance(const GaussianSpinState& state, const NoiseDraw& draw, const ProtocolConfig& config,
                                 double s);

/// Closed-form one-step map of the mean written in the spherical frame,
/// with normalized covariance entries v12 = V12/J and v22 = V22/J and the
/// first-order gain eta1 = m_theta/sigma^2. It agrees with `step_mean`
/// up to terms of second order in eta1 and of relative order V/sigma^2.
BlochVector closed_form_step_mean(const BlochVector& x, double v12, double v22, double eta1,
                                  const FeedbackAngles& angles);

struct RunDiagnostics {
  std::int64_t renormalizations = 0;
  double min_cov_eigenvalue = 0.0;
};

/// n_steps protocol steps from a coherent state at x0. Records the mean,
/// czz = Z^2 + (Delta Jz^2)/J^2 and the outcome of the step that produced
/// each point (NaN at t = 0). Deterministic for a given RNG state.
Trajectory run_trajectory(const BlochVector& x0, const ProtocolConfig& config, Rng& rng,
                          RunDiagnostics* diagnostics = nullptr);

/// Same, seeding the RNG from config.seed.
Trajectory run_trajectory(const BlochVector& x0, const ProtocolConfig& config);

/// Adiabatic passage s(t) = t/T from the coherent state along +y.
/// The config's schedule, total_time and n_steps are overridden.
Trajectory adiabatic_run(const ProtocolConfig& config, double total_time, Rng& rng);

struct NoiseObjective {
  double sigma1_sq = 0.0;
  double sigma2_sq = 0.0;
  double f = 0.0;
};

/// Variances of eta1 and eta2 at (Delta Jz^2) = J/2 and sigma = mu sqrt(J).
NoiseObjective noise_objective(double mu, const ProtocolConfig& config);

/// mu_opt = sqrt(1 + sqrt(1 + W^2)) / (2 W), W = (dt s)^(1/(p-1)).
double optimal_mu(double dt, double s, int p);

struct MuScan {
  Eigen::VectorXd mu;
  Eigen::VectorXd f;
  double argmin = 0.0;
  double f_min = 0.0;
  int local_minima = 0;
  bool interior = false;
};

/// Log-spaced scan of the noise objective over [mu_lo, mu_hi], refined by
/// golden-section search around the best grid point.
MuScan scan_noise_objective(const ProtocolConfig& config, double mu_lo = 1e-2, double mu_hi = 1e4, int points = 2001);

}  // namespace pspin
