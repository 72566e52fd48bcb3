#include "pspin/exact_engine.hpp"

#include <doctest.h>

#include <numbers>

using namespace pspin;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;
using cd = std::complex<double>;

double expect(const DickeState& st, const Eigen::MatrixXcd& op) {
  return (st.amplitudes().adjoint() * op * st.amplitudes())(0).real();
}

ProtocolConfig make_config(int p, double s, std::int64_t N, double mu = 1.0, double dt = 0.01) {
  ProtocolConfig c;
  c.params = ModelParams{p, s, N};
  c.dt = dt;
  c.mu = mu;
  return c;
}

}  // namespace

TEST_CASE("coherent states") {
  const auto up = scs_state(0.0, 0.0, 10);
  CHECK(std::abs(up.amplitudes()(0)) == Approx(1.0));
  CHECK(up.amplitudes().tail(10).norm() < 1e-15);

  const auto down = scs_state(kPi, 0.0, 10);
  CHECK(std::abs(down.amplitudes()(10)) == Approx(1.0));

  // Along +y for N = 4: <Y> = 1 and Var(Jz) = J/2 = 1.
  const Expectations e = expectations(scs_state(kPi / 2, kPi / 2, 4));
  CHECK(e.Y == Approx(1.0));
  CHECK(std::abs(e.X) < 1e-14);
  CHECK(std::abs(e.Z) < 1e-14);
  CHECK(e.var_jz == Approx(1.0));

  for (auto [theta, phi] : {std::pair{0.3, 1.1}, std::pair{2.0, -2.5}, std::pair{1.2, 4.0}}) {
    for (std::int64_t n : {1, 7, 60, 400}) {
      const auto st = scs_state(theta, phi, n);
      CHECK(st.norm() == Approx(1.0));
      const Expectations ex = expectations(st);
      CHECK((ex.bloch() - bloch_from_angles(theta, phi)).norm() < 1e-10);
      CHECK(ex.var_jz == Approx(0.25 * n * std::sin(theta) * std::sin(theta)).epsilon(1e-9));
    }
  }
}

TEST_CASE("expectations match the dense operators") {
  const std::int64_t n = 9;
  const auto ops = CollectiveOps::build(n);
  Rng rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXcd c(n + 1);
  for (auto& v : c) v = cd(g(rng), g(rng));
  const DickeState st(n, c / c.norm());
  const Expectations e = expectations(st);
  const double J = st.J();
  CHECK(e.X == Approx(expect(st, ops.Jx) / J));
  CHECK(e.Y == Approx(expect(st, ops.Jy) / J));
  CHECK(e.Z == Approx(expect(st, ops.Jz) / J));
  CHECK(e.czz == Approx(expect(st, ops.Jz * ops.Jz) / (J * J)));
  CHECK_THROWS_AS(DickeState(n, Eigen::VectorXcd::Zero(n)), std::invalid_argument);
}

TEST_CASE("collective operators obey the angular momentum algebra") {
  const cd i(0.0, 1.0);
  for (std::int64_t n : {1, 2, 17, 128, 512}) {
    const auto ops = CollectiveOps::build(n);
    const double J = 0.5 * n;
    const double tol = 1e-10 * std::max(1.0, J * J);
    CHECK((ops.Jx * ops.Jy - ops.Jy * ops.Jx - i * ops.Jz).cwiseAbs().maxCoeff() < tol);
    CHECK((ops.Jy * ops.Jz - ops.Jz * ops.Jy - i * ops.Jx).cwiseAbs().maxCoeff() < tol);
    CHECK((ops.Jz * ops.Jx - ops.Jx * ops.Jz - i * ops.Jy).cwiseAbs().maxCoeff() < tol);
    const Eigen::MatrixXcd casimir = ops.Jx * ops.Jx + ops.Jy * ops.Jy + ops.Jz * ops.Jz;
    CHECK((casimir - J * (J + 1.0) * Eigen::MatrixXcd::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff() < tol);
  }
}

TEST_CASE("Kraus operators form a POVM") {
  // sum over a fine m grid of K_m^dagger K_m dm = identity, checked on each Dicke state.
  const std::int64_t n = 6;
  const double sigma = 0.8;
  for (Eigen::Index k = 0; k <= n; ++k) {
    const auto st = DickeState::basis(n, k);
    double total = 0.0;
    const double h = 0.01;
    for (double m = -3.0 - 10 * sigma; m <= 3.0 + 10 * sigma; m += h) total += kraus_apply(st, m, sigma).prob * h;
    CHECK(total == Approx(1.0).epsilon(1e-8));
  }
  CHECK_THROWS_AS(kraus_apply(DickeState::basis(n, 0), 0.0, 0.0), std::domain_error);
}

TEST_CASE("outcome density of a coherent state is single peaked") {
  const auto st = scs_state(kPi / 3, 0.4, 200);
  const double sigma = std::sqrt(100.0);
  const double peak = st.J() * std::cos(kPi / 3);
  double prev = 0.0;
  bool rising = true;
  int turns = 0;
  for (double m = peak - 80.0; m <= peak + 80.0; m += 0.5) {
    const double pr = kraus_apply(st, m, sigma).prob;
    if (rising && pr < prev) {
      rising = false;
      ++turns;
      CHECK(std::abs(m - 0.5 - peak) < 1.0);
    } else if (!rising && pr > prev) {
      ++turns;
    }
    prev = pr;
  }
  CHECK(turns == 1);
}

TEST_CASE("sampled outcome variance") {
  // N = 100, mu = 1: 50 at the pole and 50 + J/2 on the equator.
  const double sigma = std::sqrt(50.0);
  const int n = 100000;
  Rng rng(77);
  for (auto [theta, expected] : {std::pair{0.0, 50.0}, std::pair{kPi / 2, 75.0}}) {
    const auto st = scs_state(theta, 0.0, 100);
    double s1 = 0.0, s2 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double m = sample_outcome(st, sigma, rng);
      s1 += m;
      s2 += m * m;
    }
    const double mean = s1 / n;
    const double var = (s2 - n * mean * mean) / (n - 1);
    CHECK(std::abs(var - expected) < 3.0 * expected * std::sqrt(2.0 / (n - 1)));
    CHECK(std::abs(mean - 50.0 * std::cos(theta)) < 3.0 * std::sqrt(expected / n));
  }
}

TEST_CASE("feedback unitary") {
  const ProtocolConfig c = make_config(3, 0.6, 20, 1.0, 0.2);
  const Eigen::MatrixXcd u = feedback_unitary(4.0, c);
  CHECK((u.adjoint() * u - Eigen::MatrixXcd::Identity(21, 21)).cwiseAbs().maxCoeff() < 1e-12);

  // s = 0 and dt = 2 pi: a full turn about y, identity up to the sign (-1)^N.
  const Eigen::MatrixXcd full = feedback_unitary(0.0, make_config(2, 0.0, 20, 1.0, 2 * kPi));
  CHECK((full - Eigen::MatrixXcd::Identity(21, 21)).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::MatrixXcd odd = feedback_unitary(0.0, make_config(2, 0.0, 7, 1.0, 2 * kPi));
  CHECK((odd + Eigen::MatrixXcd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-10);

  // m = 0 removes the Jz part: U = exp(i dt (1-s) Jy), which rotates the pole towards -x.
  const auto ops = CollectiveOps::build(20);
  const ProtocolConfig c2 = make_config(2, 0.5, 20, 1.0, 0.4);
  const DickeState pole = scs_state(0.0, 0.0, 20);
  const DickeState rotated(20, feedback_unitary(0.0, c2) * pole.amplitudes());
  const Expectations e = expectations(rotated);
  CHECK(e.X == Approx(-std::sin(0.2)));
  CHECK(std::abs(e.Y) < 1e-12);
  CHECK(e.Z == Approx(std::cos(0.2)));
  (void)ops;
}

TEST_CASE("fast feedback path equals the dense unitary") {
  for (int p : {2, 3, 4}) {
    const ProtocolConfig c = make_config(p, 0.7, 30, 1.0, 0.3);
    const ExactEngine engine(30);
    for (double m : {-14.0, -3.0, 0.0, 6.5, 15.0}) {
      const DickeState st = scs_state(1.1, -0.7, 30);
      DickeState fast = st;
      engine.apply_feedback(fast, feedback_angles(m, c));
      const Eigen::VectorXcd dense = feedback_unitary(m, c) * st.amplitudes();
      CHECK((fast.amplitudes() - dense).norm() < 1e-9);
    }
  }
}

TEST_CASE("conjugation by U reproduces the SO(3) rotation of the mean spin") {
  const ProtocolConfig c = make_config(3, 0.55, 40, 1.0, 0.5);
  const ExactEngine engine(40);
  for (double m : {-12.0, 5.0, 20.0}) {
    const DickeState st = scs_state(0.9, 2.2, 40);
    DickeState out = st;
    const FeedbackAngles a = feedback_angles(m, c);
    engine.apply_feedback(out, a);
    CHECK((expectations(out).bloch() - a.rotation() * expectations(st).bloch()).norm() < 1e-10);
  }
}

TEST_CASE("protocol step") {
  const ExactEngine engine(50);
  Rng rng(3);
  DickeState st = scs_state(0.7, 0.3, 50);
  const ProtocolConfig c = make_config(2, 0.6, 50, 2.0);
  for (int k = 0; k < 200; ++k) {
    engine.qfc_step(st, c, 0.6, rng);
    CHECK(std::abs(st.norm() - 1.0) < 1e-12);
  }

  // Very weak measurement at s = 0 is a pure rotation about y.
  DickeState a = scs_state(0.7, 0.3, 50);
  const ProtocolConfig weak = make_config(2, 0.0, 50, 1e9, 0.05);
  const BlochVector before = expectations(a).bloch();
  engine.qfc_step(a, weak, 0.0, rng);
  const Eigen::Matrix3d r = feedback_angles(0.0, weak).rotation();
  CHECK((expectations(a).bloch() - r * before).norm() < 1e-8);

  // A sharp measurement collapses onto a few Jz eigenstates.
  DickeState b = scs_state(kPi / 2, 0.0, 50);
  const ProtocolConfig sharp = make_config(2, 0.0, 50, 0.01, 1e-9);
  engine.qfc_step(b, sharp, 0.0, rng);
  CHECK(expectations(b).var_jz < 0.05);
}

TEST_CASE("exact trajectories") {
  const ExactEngine engine(40);
  ProtocolConfig c = make_config(2, 0.6, 40, 1.0);
  c.n_steps = 100;
  Rng r1(8), r2(8);
  const Trajectory a = engine.run_trajectory(BlochVector(0.1, 0.2, 0.9), c, r1);
  const Trajectory b = engine.run_trajectory(BlochVector(0.1, 0.2, 0.9), c, r2);
  CHECK(a.size() == 101);
  CHECK(a.points == b.points);
  CHECK(a.points.colwise().norm().maxCoeff() <= 1.0 + 1e-12);
  CHECK(std::isnan(a.outcomes(0)));

  ProtocolConfig wrong = c;
  wrong.params.N = 41;
  CHECK_THROWS_AS(engine.run_trajectory(BlochVector::UnitZ(), wrong, r1), std::invalid_argument);
  ProtocolConfig quiet = c;
  quiet.noiseless = true;
  CHECK_THROWS_AS(engine.run_trajectory(BlochVector::UnitZ(), quiet, r1), std::invalid_argument);
}
