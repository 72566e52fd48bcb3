// Classical mean-field flow of the p-spin model on the unit sphere,
//
//   dX/dt = -(1-s) Z + s Z^(p-1) Y,   dY/dt = -s Z^(p-1) X,   dZ/dt = (1-s) X,
//
// together with its tangent map, fixed points, separatrix and the energy
// matching condition that locates the dynamical critical point of the
// pole initial condition.
#pragma once

#include "pspin/model.hpp"
#include "pspin/numerics.hpp"
#include "pspin/spin_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pspin {

template <typename Scalar>
BlochVectorT<Scalar> flow_rhs(const BlochVectorT<Scalar>& x, Scalar s, int p) {
  const Scalar zp = s * ipow(x(2), p - 1);
  return {-(Scalar(1) - s) * x(2) + zp * x(1), -zp * x(0), (Scalar(1) - s) * x(0)};
}

inline BlochVector flow_rhs(const BlochVector& x, const ModelParams& params) {
  return flow_rhs<double>(x, params.s, params.p);
}

/// Classical energy per spin, -(1-s) Y - (s/p) Z^p. Conserved by the flow.
template <typename Scalar>
Scalar classical_energy(const BlochVectorT<Scalar>& x, Scalar s, int p) {
  return -(Scalar(1) - s) * x(1) - s / Scalar(p) * ipow(x(2), p);
}

template <typename Scalar>
BlochVectorT<Scalar> rk4_step(const BlochVectorT<Scalar>& x, Scalar s, int p, Scalar dt) {
  const BlochVectorT<Scalar> k1 = flow_rhs<Scalar>(x, s, p);
  const BlochVectorT<Scalar> k2 = flow_rhs<Scalar>(x + dt / 2 * k1, s, p);
  const BlochVectorT<Scalar> k3 = flow_rhs<Scalar>(x + dt / 2 * k2, s, p);
  const BlochVectorT<Scalar> k4 = flow_rhs<Scalar>(x + dt * k3, s, p);
  return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
}

/// Number of stroboscopic steps covering [0, t_max] at spacing dt.
inline std::int64_t step_count(double dt, double t_max) {
  return static_cast<std::int64_t>(std::llround(t_max / dt));
}

/// Fixed-step RK4 with renormalization onto the sphere after every step.
/// The czz channel is the factorized Z^2; outcomes stay NaN.
inline Trajectory integrate(const BlochVector& x0, const ModelParams& params, double dt, double t_max) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be positive");
  if (!(t_max >= dt)) throw std::invalid_argument("integrate: t_max must be at least dt");
  const std::int64_t n = step_count(dt, t_max);
  Trajectory traj(n + 1);
  BlochVector x = x0.normalized();
  for (std::int64_t k = 0; k <= n; ++k) {
    if (k > 0) {
      x = rk4_step<double>(x, params.s, params.p, dt);
      if (!x.allFinite()) throw NumericalFailure("integrate: non-finite state");
      x.normalize();
    }
    traj.times(k) = static_cast<double>(k) * dt;
    traj.points.col(k) = x;
    traj.czz(k) = x(2) * x(2);
  }
  return traj;
}

/// Jacobian of the flow at a fixed point with vanishing x-component.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> tangent_map(const BlochVectorT<Scalar>& x, Scalar s, int p) {
  using std::abs;
  if (abs(x(0)) > Scalar(1e-8)) throw std::domain_error("tangent_map: fixed point must have X = 0");
  if (flow_rhs<Scalar>(x, s, p).norm() > Scalar(1e-8)) throw std::domain_error("tangent_map: point is not a fixed point");
  const Scalar zp1 = s * ipow(x(2), p - 1);
  Eigen::Matrix<Scalar, 3, 3> m;
  m << Scalar(0), zp1, -(Scalar(1) - s) + s * Scalar(p - 1) * ipow(x(2), p - 2) * x(1),
      -zp1, Scalar(0), Scalar(0),
      Scalar(1) - s, Scalar(0), Scalar(0);
  return m;
}

inline Eigen::Matrix3d tangent_map(const BlochVector& x, const ModelParams& params) {
  return tangent_map<double>(x, params.s, params.p);
}

/// Largest real part among the tangent-map eigenvalues; positive means unstable.
inline double max_growth_rate(const BlochVector& fixed_point, const ModelParams& params) {
  const Eigen::Matrix3d m = tangent_map(fixed_point, params);
  return Eigen::EigenSolver<Eigen::Matrix3d>(m, false).eigenvalues().real().maxCoeff();
}

/// Fixed points of the flow. All lie on the X = 0 great circle, where
/// (Y, Z) = (cos a, sin a) and the flow reduces to one scalar equation in a.
inline std::vector<BlochVector> fixed_points(const ModelParams& params, int samples = 20000) {
  const double s = params.s;
  const int p = params.p;
  auto f = [&](double a) {
    const double z = std::sin(a);
    return -(1.0 - s) * z + s * ipow(z, p - 1) * std::cos(a);
  };
  std::vector<BlochVector> out{BlochVector(0, 1, 0), BlochVector(0, -1, 0)};
  const double two_pi = 2.0 * std::numbers::pi;
  const double h = two_pi / samples;
  for (int k = 0; k < samples; ++k) {
    const double a0 = k * h;
    const double a1 = a0 + h;
    // a = 0 and a = pi are the two points already listed.
    if (k == 0 || k == samples / 2 || k == samples / 2 - 1 || k == samples - 1) continue;
    const double f0 = f(a0);
    const double f1 = f(a1);
    double a;
    if (f0 == 0.0) {
      a = a0;
    } else if ((f0 < 0.0) != (f1 < 0.0)) {
      a = bisect<double>(f, a0, a1);
    } else {
      continue;
    }
    out.emplace_back(0.0, std::cos(a), std::sin(a));
  }
  return out;
}

/// z-component of the unstable extremum whose energy level carries the
/// separatrix relevant for the pole initial condition.
template <typename Scalar = double>
Scalar separatrix_z(int p, Scalar s) {
  const Scalar sb = onset_point<Scalar>(p);
  if (p == 2) {
    if (!(s > sb)) throw std::domain_error("separatrix_z: s must exceed the onset point");
    return Scalar(0);
  }
  if (s < sb) throw std::domain_error("separatrix_z: s must not be below the onset point");
  if (s >= Scalar(1)) return Scalar(0);
  const auto roots = extrema<Scalar>(s, p);
  // Rounding can hide the double root exactly at onset.
  if (roots.size() < 2) return std::sqrt(detail::polynomial_turning_point<Scalar>(p));
  return roots[1];
}

/// Closed form of the p = 3 separatrix point.
template <typename Scalar = double>
Scalar separatrix_z_p3(Scalar s) {
  using std::sqrt;
  const Scalar r = (Scalar(1) - s) / s;
  // The discriminant vanishes at onset and rounds negative there.
  const Scalar disc = std::max(Scalar(0), Scalar(1) - Scalar(4) * r * r);
  return sqrt(Scalar(0.5) - Scalar(0.5) * sqrt(disc));
}

/// Solves V(Z_sp; s) = V(Z0 = 1; s) for s by bisection.
template <typename Scalar = double>
Scalar dpt_critical_point(int p) {
  auto mismatch = [p](Scalar s) {
    const Scalar zsp = separatrix_z<Scalar>(p, s);
    return potential_on_meridian<Scalar>(zsp, s, p) - potential_on_meridian<Scalar>(Scalar(1), s, p);
  };
  const Scalar lo = onset_point<Scalar>(p);
  // The p = 2 separatrix needs s strictly above onset.
  const Scalar lo_eval = p == 2 ? lo + Scalar(1e-9) : lo;
  return bisect<Scalar>(mismatch, lo_eval, Scalar(1));
}

/// Cruder estimate that matches the pole energy to that of (0, 1, 0):
/// -(1-s) = -s/p, hence s = p/(p+1).
template <typename Scalar = double>
Scalar dpt_pole_estimate(int p) {
  auto mismatch = [p](Scalar s) {
    return potential_on_meridian<Scalar>(Scalar(0), s, p) - potential_on_meridian<Scalar>(Scalar(1), s, p);
  };
  return bisect<Scalar>(mismatch, Scalar(0), Scalar(1));
}

inline CriticalPoints critical_points(int p) {
  return {onset_point<double>(p), equilibrium_critical_point<double>(p), dpt_critical_point<double>(p)};
}

struct LongTimeAverages {
  double z_inf = 0.0;
  double czz_inf = 0.0;
};

/// Trapezoidal time averages of Z and czz over [burn_in, t_end].
inline LongTimeAverages long_time_averages(const Trajectory& traj, double burn_in = 0.0) {
  const Eigen::Index n = traj.size();
  if (n < 2 || !(traj.times(n - 1) > burn_in)) {
    throw std::invalid_argument("long_time_averages: trajectory must extend beyond burn_in");
  }
  Eigen::Index k0 = 0;
  while (k0 < n && traj.times(k0) < burn_in) ++k0;
  if (k0 >= n - 1) throw std::invalid_argument("long_time_averages: fewer than two samples after burn_in");
  double z = 0.0;
  double c = 0.0;
  for (Eigen::Index k = k0; k + 1 < n; ++k) {
    const double h = traj.times(k + 1) - traj.times(k);
    z += 0.5 * h * (traj.points(2, k) + traj.points(2, k + 1));
    c += 0.5 * h * (traj.czz(k) + traj.czz(k + 1));
  }
  const double span = traj.times(n - 1) - traj.times(k0);
  return {z / span, c / span};
}

}  // namespace pspin
