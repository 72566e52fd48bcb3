#include "pspin/exact_engine.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pspin {

namespace {

using cd = std::complex<double>;

void check_particles(std::int64_t n) {
  if (n < 1) throw std::invalid_argument("particle number must be >= 1");
}

}  // namespace

DickeState::DickeState(std::int64_t n_particles, Eigen::VectorXcd amplitudes)
    : n_(n_particles), amplitudes_(std::move(amplitudes)) {
  check_particles(n_);
  if (amplitudes_.size() != n_ + 1) throw std::invalid_argument("DickeState: amplitude count must be N + 1");
}

DickeState DickeState::basis(std::int64_t n_particles, Eigen::Index k) {
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(n_particles + 1);
  c(k) = 1.0;
  return DickeState(n_particles, std::move(c));
}

Eigen::VectorXd raising_coefficients(std::int64_t n_particles) {
  check_particles(n_particles);
  const double J = 0.5 * static_cast<double>(n_particles);
  Eigen::VectorXd a(n_particles + 1);
  for (Eigen::Index k = 0; k <= n_particles; ++k) {
    const double M = J - static_cast<double>(k);
    a(k) = std::sqrt(std::max(0.0, J * (J + 1.0) - M * (M + 1.0)));
  }
  return a;
}

CollectiveOps CollectiveOps::build(std::int64_t n_particles) {
  const Eigen::VectorXd a = raising_coefficients(n_particles);
  const Eigen::Index d = n_particles + 1;
  const double J = 0.5 * static_cast<double>(n_particles);
  Eigen::MatrixXd jp = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index k = 1; k < d; ++k) jp(k - 1, k) = a(k);

  CollectiveOps ops;
  ops.Jx = (0.5 * (jp + jp.transpose())).cast<cd>();
  ops.Jy = cd(0.0, -0.5) * (jp - jp.transpose()).cast<cd>();
  ops.Jz = Eigen::MatrixXcd::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) ops.Jz(k, k) = J - static_cast<double>(k);
  return ops;
}

DickeState scs_state(double theta, double phi, std::int64_t n_particles) {
  check_particles(n_particles);
  const double J = 0.5 * static_cast<double>(n_particles);
  const double lc = std::log(std::abs(std::cos(0.5 * theta)));
  const double ls = std::log(std::abs(std::sin(0.5 * theta)));
  const double lg = std::lgamma(static_cast<double>(n_particles) + 1.0);
  Eigen::VectorXcd c(n_particles + 1);
  for (Eigen::Index k = 0; k <= n_particles; ++k) {
    const double up = static_cast<double>(n_particles - k);  // J + M
    const double down = static_cast<double>(k);              // J - M
    double logmag = 0.5 * (lg - std::lgamma(up + 1.0) - std::lgamma(down + 1.0));
    // 0 * log(0) contributes nothing.
    if (up > 0.0) logmag += up * lc;
    if (down > 0.0) logmag += down * ls;
    const double M = J - static_cast<double>(k);
    const double sign = (std::cos(0.5 * theta) < 0.0 && static_cast<std::int64_t>(up) % 2 == 1 ? -1.0 : 1.0) *
                        (std::sin(0.5 * theta) < 0.0 && k % 2 == 1 ? -1.0 : 1.0);
    c(k) = sign * std::exp(logmag) * std::polar(1.0, -M * phi);
  }
  c /= c.norm();
  return DickeState(n_particles, std::move(c));
}

KrausResult kraus_apply(const DickeState& state, double m, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("kraus_apply: sigma must be positive");
  const double pref = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.25);
  KrausResult r;
  r.amplitudes = state.amplitudes();
  for (Eigen::Index k = 0; k < state.dim(); ++k) {
    const double d = state.M(k) - m;
    r.amplitudes(k) *= pref * std::exp(-d * d / (4.0 * sigma * sigma));
  }
  r.prob = r.amplitudes.squaredNorm();
  return r;
}

double sample_outcome(const DickeState& state, double sigma, Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd w = state.amplitudes().cwiseAbs2();
  const double u = uniform(rng) * w.sum();
  double acc = 0.0;
  Eigen::Index k = 0;
  for (; k + 1 < w.size(); ++k) {
    acc += w(k);
    if (u < acc) break;
  }
  return state.M(k) + sigma * normal(rng);
}

Eigen::MatrixXcd feedback_unitary(double m, const ProtocolConfig& config, double s) {
  const FeedbackAngles a = feedback_angles(m, config, s);
  const CollectiveOps ops = CollectiveOps::build(config.params.N);
  const Eigen::MatrixXcd generator = a.alpha * ops.Jy + a.beta * ops.Jz;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(generator);
  if (eig.info() != Eigen::Success) throw NumericalFailure("feedback_unitary: eigensolver failed");
  const Eigen::VectorXcd phases = eig.eigenvalues().unaryExpr([](double l) { return std::polar(1.0, l); });
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

Expectations expectations(const DickeState& state) {
  const Eigen::VectorXcd& c = state.amplitudes();
  const double J = state.J();
  const Eigen::VectorXd a = raising_coefficients(state.n_particles());
  cd jplus = 0.0;
  double jz = 0.0, jz2 = 0.0;
  for (Eigen::Index k = 0; k < state.dim(); ++k) {
    const double M = state.M(k);
    const double w = std::norm(c(k));
    jz += M * w;
    jz2 += M * M * w;
    if (k > 0) jplus += std::conj(c(k - 1)) * a(k) * c(k);
  }
  Expectations e;
  e.X = jplus.real() / J;
  e.Y = jplus.imag() / J;
  e.Z = jz / J;
  e.var_jz = jz2 - jz * jz;
  e.czz = jz2 / (J * J);
  return e;
}

ExactEngine::ExactEngine(std::int64_t n_particles) : n_(n_particles) {
  check_particles(n_);
  const CollectiveOps ops = CollectiveOps::build(n_);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ops.Jx.real());
  if (eig.info() != Eigen::Success) throw NumericalFailure("ExactEngine: Jx eigensolver failed");
  jx_vectors_ = eig.eigenvectors();
  jx_values_ = eig.eigenvalues();
  m_values_.resize(n_ + 1);
  for (Eigen::Index k = 0; k <= n_; ++k) m_values_(k) = 0.5 * static_cast<double>(n_) - static_cast<double>(k);
}

void ExactEngine::apply_feedback(DickeState& state, const FeedbackAngles& angles) const {
  if (angles.gamma == 0.0) return;
  auto x_rotate = [&](const Eigen::VectorXcd& v, double angle) {
    // e^{i angle Jx} v
    Eigen::VectorXcd w = jx_vectors_.transpose() * v;
    w.array() *= (jx_values_.array() * angle).unaryExpr([](double t) { return std::polar(1.0, t); });
    return Eigen::VectorXcd(jx_vectors_ * w);
  };
  Eigen::VectorXcd v = x_rotate(state.amplitudes(), -angles.varphi);
  v.array() *= (m_values_.array() * angles.gamma).unaryExpr([](double t) { return std::polar(1.0, t); });
  state.amplitudes() = x_rotate(v, angles.varphi);
}

double ExactEngine::qfc_step(DickeState& state, const ProtocolConfig& config, double s, Rng& rng) const {
  if (state.n_particles() != n_) throw std::invalid_argument("qfc_step: particle number mismatch");
  const double sigma = config.sigma();
  const double m = sample_outcome(state, sigma, rng);
  KrausResult k = kraus_apply(state, m, sigma);
  if (!(k.prob > 0.0)) throw NumericalFailure("qfc_step: outcome has vanishing probability");
  state.amplitudes() = k.amplitudes / std::sqrt(k.prob);
  apply_feedback(state, feedback_angles(m, config, s));
  return m;
}

Trajectory ExactEngine::run_trajectory(const BlochVector& x0, const ProtocolConfig& config, Rng& rng) const {
  config.validate();
  if (config.noiseless) throw std::invalid_argument("exact engine has no noiseless mode");
  if (config.params.N != n_) throw std::invalid_argument("run_trajectory: particle number mismatch");
  const auto [theta, phi] = bloch_angles(x0);
  DickeState state = scs_state(theta, phi, n_);
  Trajectory traj(config.n_steps + 1);
  auto record = [&](std::int64_t k, double m) {
    const Expectations e = expectations(state);
    traj.times(k) = static_cast<double>(k) * config.dt;
    traj.points.col(k) = e.bloch();
    traj.czz(k) = e.czz;
    traj.outcomes(k) = m;
  };
  record(0, std::numeric_limits<double>::quiet_NaN());
  for (std::int64_t k = 0; k < config.n_steps; ++k) {
    const double m = qfc_step(state, config, config.s_at(k), rng);
    record(k + 1, m);
  }
  return traj;
}

}  // namespace pspin
