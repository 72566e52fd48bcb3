// Static properties of the mean-field p-spin family
//
//   H = -(1-s) Jy - s/(p J^(p-1)) Jz^p
//
// in the large-J limit: the semiclassical energy V(u, phi) with u = cos(theta),
// its extrema, the ground-state order parameter, the equilibrium critical point
// and the onset of new extrema. Everything is templated on the scalar type so
// the same code can be evaluated in extended precision.
#pragma once

#include "pspin/model.hpp"
#include "pspin/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pspin {

template <typename Scalar>
Scalar pseudo_potential(Scalar u, Scalar phi, Scalar s, int p) {
  using std::abs;
  using std::sin;
  using std::sqrt;
  if (!(abs(u) <= Scalar(1))) throw std::domain_error("pseudo_potential: |u| must not exceed 1");
  return -(Scalar(1) - s) * sqrt(Scalar(1) - u * u) * sin(phi) - s / Scalar(p) * ipow(u, p);
}

inline double pseudo_potential(double u, double phi, const ModelParams& params) {
  return pseudo_potential<double>(u, phi, params.s, params.p);
}

/// V(u) on the phi = pi/2 meridian, where every minimum lives.
template <typename Scalar>
Scalar potential_on_meridian(Scalar u, Scalar s, int p) {
  return pseudo_potential<Scalar>(u, std::numbers::pi_v<Scalar> / Scalar(2), s, p);
}

/// u^{2(p-1)} - u^{2(p-2)} + ((1-s)/s)^2; zero at every nontrivial extremum.
template <typename Scalar>
Scalar extremum_residual(Scalar u, Scalar s, int p) {
  const Scalar r = (Scalar(1) - s) / s;
  return ipow(u, 2 * (p - 1)) - ipow(u, 2 * (p - 2)) + r * r;
}

namespace detail {

// g(v) = v^{p-1} - v^{p-2} + r^2 on v = u^2 in [0, 1]. For p >= 3 it
// decreases on [0, v*] and increases on [v*, 1] with v* = (p-2)/(p-1).
template <typename Scalar>
Scalar extremum_polynomial(Scalar v, Scalar r2, int p) {
  return ipow(v, p - 1) - ipow(v, p - 2) + r2;
}

template <typename Scalar>
Scalar polynomial_turning_point(int p) {
  return Scalar(p - 2) / Scalar(p - 1);
}

}  // namespace detail

/// Smallest s at which nontrivial extrema exist, s_b = 1/(1 + sqrt(-min g0)).
template <typename Scalar = double>
Scalar onset_point(int p) {
  using std::sqrt;
  if (p < 2) throw std::invalid_argument("onset_point: p must be >= 2");
  const Scalar vstar = detail::polynomial_turning_point<Scalar>(p);
  const Scalar gmin = detail::extremum_polynomial<Scalar>(vstar, Scalar(0), p);
  return Scalar(1) / (Scalar(1) + sqrt(-gmin));
}

/// u = 0 followed by the nontrivial extrema in (0, 1], ascending.
template <typename Scalar>
std::vector<Scalar> extrema(Scalar s, int p) {
  using std::sqrt;
  std::vector<Scalar> roots{Scalar(0)};
  if (p < 2) throw std::invalid_argument("extrema: p must be >= 2");
  if (s <= Scalar(0)) return roots;

  const Scalar r = (Scalar(1) - s) / s;
  const Scalar r2 = r * r;
  auto g = [&](Scalar v) { return detail::extremum_polynomial<Scalar>(v, r2, p); };

  std::vector<Scalar> vs;
  if (p == 2) {
    const Scalar v = Scalar(1) - r2;
    if (v > Scalar(0)) vs.push_back(v);
  } else {
    const Scalar vstar = detail::polynomial_turning_point<Scalar>(p);
    const Scalar gmin = g(vstar);
    if (gmin == Scalar(0)) {
      vs.push_back(vstar);
    } else if (gmin < Scalar(0)) {
      if (r2 > Scalar(0)) vs.push_back(bisect<Scalar>(g, Scalar(0), vstar));
      vs.push_back(bisect<Scalar>(g, vstar, Scalar(1)));
    }
  }
  for (Scalar v : vs) roots.push_back(sqrt(v));
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
  return roots;
}

inline std::vector<double> extrema(const ModelParams& params) { return extrema<double>(params.s, params.p); }

/// Position of the global minimum of V(u) on u in [0, 1]. Exact ties are
/// resolved towards the nontrivial (larger) root.
template <typename Scalar>
Scalar order_parameter(Scalar s, int p) {
  const auto candidates = extrema<Scalar>(s, p);
  Scalar best_u = candidates.front();
  Scalar best_v = potential_on_meridian<Scalar>(best_u, s, p);
  for (Scalar u : candidates) {
    const Scalar v = potential_on_meridian<Scalar>(u, s, p);
    if (v <= best_v) {
      best_v = v;
      best_u = u;
    }
  }
  return best_u;
}

inline double order_parameter(const ModelParams& params) { return order_parameter<double>(params.s, params.p); }

/// s at which the largest nontrivial extremum first satisfies
/// V(u~) <= -(1-s), i.e. becomes the global minimum.
template <typename Scalar = double>
Scalar equilibrium_critical_point(int p) {
  const Scalar sb = onset_point<Scalar>(p);
  // p = 2: the new extremum is the global minimum from the moment it exists.
  if (p == 2) return sb;
  auto gap = [p](Scalar s) {
    const auto roots = extrema<Scalar>(s, p);
    // Rounding can hide the degenerate pair exactly at s_b.
    if (roots.size() < 2) return Scalar(1);
    return potential_on_meridian<Scalar>(roots.back(), s, p) + (Scalar(1) - s);
  };
  return bisect<Scalar>(gap, sb, Scalar(1));
}

/// Total dephasing rate kappa/4 + lambda^2/kappa of linear measurement feedback.
inline double dephasing_rate(double kappa, double lambda) {
  if (!(kappa > 0.0)) throw std::domain_error("dephasing_rate: kappa must be positive");
  if (lambda < 0.0) throw std::domain_error("dephasing_rate: lambda must be non-negative");
  return kappa / 4.0 + lambda * lambda / kappa;
}

}  // namespace pspin
