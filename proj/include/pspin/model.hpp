// Core value types shared by every module: model parameters, Bloch vectors
// and recorded trajectories.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace pspin {

template <typename Scalar>
using BlochVectorT = Eigen::Matrix<Scalar, 3, 1>;
using BlochVector = BlochVectorT<double>;

/// Raised when an integrator or engine leaves its numerically valid regime.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Interaction degree p, mixing parameter s and particle number N (J = N/2).
struct ModelParams {
  int p = 2;
  double s = 0.0;
  std::int64_t N = 1;

  double J() const { return 0.5 * static_cast<double>(N); }

  void validate() const {
    if (p < 2) throw std::invalid_argument("interaction degree p must be >= 2");
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("mixing parameter s must lie in [0,1]");
    if (N < 1) throw std::invalid_argument("particle number N must be >= 1");
  }
};

/// Equilibrium and dynamical critical points of one p-spin model.
struct CriticalPoints {
  double s_onset = 0.0;
  double s_eq = 0.0;
  double s_dpt = 0.0;
};

/// Stroboscopic record of a run. Column k of `points` is the normalized
/// mean spin at `times[k]`; `czz` holds <Jz^2>/J^2 and `outcomes` the
/// measurement record (NaN where no measurement was made).
struct Trajectory {
  Eigen::VectorXd times;
  Eigen::Matrix3Xd points;
  Eigen::VectorXd czz;
  Eigen::VectorXd outcomes;

  Trajectory() = default;
  explicit Trajectory(Eigen::Index n_points)
      : times(n_points), points(3, n_points), czz(n_points),
        outcomes(Eigen::VectorXd::Constant(n_points, std::numeric_limits<double>::quiet_NaN())) {}

  Eigen::Index size() const { return times.size(); }
  double duration() const { return size() > 0 ? times(size() - 1) - times(0) : 0.0; }
  BlochVector point(Eigen::Index k) const { return points.col(k); }
  BlochVector final_point() const { return points.col(size() - 1); }

  /// Same length and time stamps (to 1e-9) as `other`.
  bool same_grid(const Trajectory& other) const {
    if (size() != other.size()) return false;
    return size() == 0 || (times - other.times).cwiseAbs().maxCoeff() < 1e-9;
  }
};

template <typename Scalar>
BlochVectorT<Scalar> bloch_from_angles(Scalar theta, Scalar phi) {
  using std::cos;
  using std::sin;
  return {sin(theta) * cos(phi), sin(theta) * sin(phi), cos(theta)};
}

/// Polar and azimuthal angle of a (not necessarily unit) vector.
template <typename Derived>
std::pair<typename Derived::Scalar, typename Derived::Scalar> bloch_angles(const Eigen::MatrixBase<Derived>& x) {
  using std::acos;
  using std::atan2;
  using Scalar = typename Derived::Scalar;
  const Scalar r = x.norm();
  Scalar c = r > Scalar(0) ? x(2) / r : Scalar(1);
  c = c > Scalar(1) ? Scalar(1) : (c < Scalar(-1) ? Scalar(-1) : c);
  return {acos(c), atan2(x(1), x(0))};
}

}  // namespace pspin
