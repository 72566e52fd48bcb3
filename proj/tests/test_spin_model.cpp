#include "pspin/spin_model.hpp"

#include <doctest.h>

#include <numbers>

using namespace pspin;
using doctest::Approx;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("pseudo-potential at simple points") {
  for (int p : {2, 3, 4}) {
    for (double s : {0.0, 0.3, 0.65, 1.0}) {
      CHECK(pseudo_potential(0.0, kPi / 2, s, p) == Approx(-(1.0 - s)).epsilon(1e-15));
    }
  }
  CHECK(pseudo_potential(1.0, kPi / 2, 1.0, 2) == Approx(-0.5).epsilon(1e-15));
  // -0.35 * 0.8 - 0.325 * 0.36, exact decimal arithmetic.
  CHECK(pseudo_potential(0.6, kPi / 2, 0.65, 2) == Approx(-0.397).epsilon(1e-14));
  CHECK(pseudo_potential(0.6, kPi / 2, ModelParams{2, 0.65, 10}) == Approx(-0.397).epsilon(1e-14));
}

TEST_CASE("pseudo-potential rejects |u| > 1") {
  CHECK_THROWS_AS(pseudo_potential(1.0 + 1e-9, 0.0, 0.5, 2), std::domain_error);
  CHECK_THROWS_AS(pseudo_potential(-2.0, 0.0, 0.5, 3), std::domain_error);
}

TEST_CASE("pseudo-potential parity on the meridian") {
  for (double s : {0.2, 0.7, 0.9}) {
    for (double u = 0.05; u < 1.0; u += 0.05) {
      CHECK(potential_on_meridian(u, s, 2) == Approx(potential_on_meridian(-u, s, 2)).epsilon(1e-14));
      CHECK(potential_on_meridian(u, s, 4) == Approx(potential_on_meridian(-u, s, 4)).epsilon(1e-14));
      CHECK(potential_on_meridian(u, s, 3) != Approx(potential_on_meridian(-u, s, 3)).epsilon(1e-6));
    }
  }
}

TEST_CASE("extrema at the p = 2 threshold collapse onto u = 0") {
  const auto r = extrema<double>(0.5, 2);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == 0.0);
}

TEST_CASE("extrema for p = 2 match the closed form") {
  // sqrt(1 - ((1-s)/s)^2) at s = 0.8, 30-digit reference.
  const auto r = extrema<double>(0.8, 2);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == Approx(0.968245836551854221).epsilon(1e-14));
}

TEST_CASE("no nontrivial extrema for p = 3 below onset") {
  const auto r = extrema<double>(0.6, 3);
  REQUIRE(r.size() == 1);
  CHECK(r[0] == 0.0);
  CHECK(extrema<double>(0.0, 3).size() == 1);
}

TEST_CASE("every returned extremum satisfies the extremum condition") {
  for (int p : {2, 3, 4}) {
    for (double s = 0.5; s <= 1.0; s += 0.01) {
      const auto r = extrema<double>(s, p);
      CHECK(r.front() == 0.0);
      for (std::size_t i = 1; i < r.size(); ++i) {
        CHECK(std::abs(extremum_residual(r[i], s, p)) < 1e-12);
        CHECK(r[i] > 0.0);
        CHECK(r[i] <= 1.0);
      }
    }
  }
}

TEST_CASE("long double extrema agree with double") {
  const auto d = extrema<double>(0.8, 3);
  const auto l = extrema<long double>(0.8L, 3);
  REQUIRE(d.size() == l.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i] == Approx(static_cast<double>(l[i])).epsilon(1e-13));
}

TEST_CASE("order parameter") {
  for (double s = 0.0; s < 0.5; s += 0.05) CHECK(order_parameter<double>(s, 2) == 0.0);
  CHECK(order_parameter<double>(1.0, 2) == Approx(1.0));
  CHECK(order_parameter<double>(0.697831 - 1e-4, 3) == 0.0);
  CHECK(order_parameter<double>(0.697831 + 1e-4, 3) > 0.8);
  CHECK(order_parameter(ModelParams{4, 0.9, 1}) > 0.9);
}

TEST_CASE("order parameter is continuous for p = 2 and jumps for p = 3, 4") {
  auto max_jump = [](int p) {
    double prev = order_parameter<double>(0.4, p), worst = 0.0;
    for (double s = 0.4 + 1e-4; s <= 1.0; s += 1e-4) {
      const double u = order_parameter<double>(s, p);
      worst = std::max(worst, std::abs(u - prev));
      prev = u;
    }
    return worst;
  };
  // sqrt growth right after s = 0.5 bounds the p = 2 step by ~sqrt(8e-4).
  CHECK(max_jump(2) < 0.03);
  CHECK(max_jump(3) > 0.5);
  CHECK(max_jump(4) > 0.5);
}

TEST_CASE("onset points") {
  CHECK(onset_point(2) == Approx(0.5).epsilon(1e-14));
  CHECK(onset_point(3) == Approx(2.0 / 3.0).epsilon(1e-14));
  // (3/23)(9 - 2 sqrt 3)
  CHECK(onset_point(4) == Approx(0.722073702373336358).epsilon(1e-13));
  CHECK(std::abs(onset_point(4) - 0.722073) < 1e-4);
}

TEST_CASE("equilibrium critical points") {
  CHECK(std::abs(equilibrium_critical_point(2) - 0.5) < 1e-6);
  CHECK(std::abs(equilibrium_critical_point(3) - 0.697831) < 1e-6);
  CHECK(std::abs(equilibrium_critical_point(4) - 0.771429) < 1e-6);
  // 30-digit references from an independent bisection.
  CHECK(equilibrium_critical_point(3) == Approx(0.697830520748037756).epsilon(1e-12));
  CHECK(equilibrium_critical_point(4) == Approx(27.0 / 35.0).epsilon(1e-12));
  CHECK(static_cast<double>(equilibrium_critical_point<long double>(3)) == Approx(0.697830520748037756).epsilon(1e-13));
}

TEST_CASE("equilibrium point never precedes onset") {
  CHECK(equilibrium_critical_point(2) == Approx(onset_point(2)));
  for (int p : {3, 4, 5}) CHECK(equilibrium_critical_point(p) > onset_point(p) + 1e-3);
}

TEST_CASE("dephasing rate") {
  CHECK(dephasing_rate(3.0, 0.0) == Approx(0.75));
  CHECK(dephasing_rate(2.0 * 1.7, 1.7) == Approx(1.7));
  CHECK(dephasing_rate(1e-9, 1.0) > 1e8);
  CHECK(dephasing_rate(1e9, 1.0) > 1e8);
  CHECK_THROWS_AS(dephasing_rate(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(dephasing_rate(-1.0, 1.0), std::domain_error);
}

TEST_CASE("dephasing rate is convex with minimum at kappa = 2 lambda") {
  const double lambda = 0.8, h = 1e-3;
  for (double k = 0.2; k < 5.0; k += 0.1) {
    const double second = dephasing_rate(k + h, lambda) - 2.0 * dephasing_rate(k, lambda) + dephasing_rate(k - h, lambda);
    CHECK(second > 0.0);
  }
  const double kopt = 2.0 * lambda;
  CHECK(dephasing_rate(kopt, lambda) < dephasing_rate(kopt * 1.01, lambda));
  CHECK(dephasing_rate(kopt, lambda) < dephasing_rate(kopt * 0.99, lambda));
}
