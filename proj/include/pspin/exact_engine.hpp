// Exact quantum trajectories of the protocol in the (N+1)-dimensional
// symmetric subspace. Amplitudes are stored as c_M for M = J, J-1, ..., -J
// (index k <-> M = J - k).
#pragma once

#include "pspin/model.hpp"
#include "pspin/protocol.hpp"

#include <complex>
#include <cstdint>

namespace pspin {

class DickeState {
 public:
  DickeState() = default;
  DickeState(std::int64_t n_particles, Eigen::VectorXcd amplitudes);

  std::int64_t n_particles() const { return n_; }
  double J() const { return 0.5 * static_cast<double>(n_); }
  Eigen::Index dim() const { return amplitudes_.size(); }
  double M(Eigen::Index k) const { return J() - static_cast<double>(k); }

  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Eigen::VectorXcd& amplitudes() { return amplitudes_; }
  double norm() const { return amplitudes_.norm(); }

  /// |J, M0>.
  static DickeState basis(std::int64_t n_particles, Eigen::Index k);

 private:
  std::int64_t n_ = 0;
  Eigen::VectorXcd amplitudes_;
};

/// Dense collective spin matrices in the Dicke basis.
struct CollectiveOps {
  Eigen::MatrixXcd Jx, Jy, Jz;
  static CollectiveOps build(std::int64_t n_particles);
};

/// sqrt(J(J+1) - M(M+1)) for each index k (zero at M = J).
Eigen::VectorXd raising_coefficients(std::int64_t n_particles);

/// Coherent state e^{-i phi Jz} e^{-i theta Jy} |J, J>.
DickeState scs_state(double theta, double phi, std::int64_t n_particles);

struct KrausResult {
  Eigen::VectorXcd amplitudes;
  /// Born probability density P(m).
  double prob = 0.0;
};

/// K_m c = (2 pi sigma^2)^(-1/4) exp(-(Jz - m)^2 / (4 sigma^2)) c.
KrausResult kraus_apply(const DickeState& state, double m, double sigma);

/// Exact draw from the Born density: M with probability |c_M|^2, then m = M + sigma xi.
double sample_outcome(const DickeState& state, double sigma, Rng& rng);

/// exp(i dt (1-s) Jy + i dt s (m/J)^(p-1) Jz) via Hermitian eigendecomposition.
Eigen::MatrixXcd feedback_unitary(double m, const ProtocolConfig& config, double s);

inline Eigen::MatrixXcd feedback_unitary(double m, const ProtocolConfig& config) {
  return feedback_unitary(m, config, config.params.s);
}

struct Expectations {
  double X = 0.0, Y = 0.0, Z = 0.0;
  double var_jz = 0.0;
  double czz = 0.0;

  BlochVector bloch() const { return {X, Y, Z}; }
};

Expectations expectations(const DickeState& state);

/// Protocol stepper for one particle number. Precomputes the eigenbasis of
/// Jx so the feedback e^{i varphi Jx} e^{i gamma Jz} e^{-i varphi Jx} costs a
/// few matrix-vector products per step. Const methods are thread safe.
class ExactEngine {
 public:
  explicit ExactEngine(std::int64_t n_particles);

  std::int64_t n_particles() const { return n_; }

  /// In-place application of U(m) given its angles.
  void apply_feedback(DickeState& state, const FeedbackAngles& angles) const;

  /// Sample m, apply the Kraus operator, renormalize, apply U(m). Returns m.
  double qfc_step(DickeState& state, const ProtocolConfig& config, double s, Rng& rng) const;

  /// n_steps protocol steps from the coherent state along x0.
  Trajectory run_trajectory(const BlochVector& x0, const ProtocolConfig& config, Rng& rng) const;

 private:
  std::int64_t n_;
  Eigen::MatrixXd jx_vectors_;
  Eigen::VectorXd jx_values_;
  Eigen::VectorXd m_values_;
};

}  // namespace pspin
