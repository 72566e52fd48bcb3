#include "pspin/gaussian_engine.hpp"

#include "pspin/numerics.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <limits>

namespace pspin {

FeedbackAngles feedback_angles(double m, const ProtocolConfig& config, double s) {
  const double J = config.params.J();
  FeedbackAngles a;
  a.alpha = config.dt * (1.0 - s);
  a.beta = config.dt * s * ipow(m / J, config.params.p - 1);
  a.gamma = std::hypot(a.alpha, a.beta);
  a.varphi = a.gamma > 0.0 ? std::atan2(a.alpha, a.beta) : 0.0;
  return a;
}

Eigen::Matrix3d spherical_frame(const BlochVector& x) {
  const auto [theta, phi] = bloch_angles(x);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double cp = std::cos(phi), sp = std::sin(phi);
  Eigen::Matrix3d f;
  f.col(0) << -sp, cp, 0.0;
  f.col(1) << -ct * cp, -ct * sp, st;
  f.col(2) << st * cp, st * sp, ct;
  return f;
}

GaussianSpinState GaussianSpinState::coherent(const BlochVector& direction, double J) {
  GaussianSpinState st;
  st.mean = direction.normalized();
  st.frame = spherical_frame(st.mean);
  st.cov = 0.5 * J * Eigen::Matrix2d::Identity();
  return st;
}

Eigen::Matrix2d covariance_in_frame(const GaussianSpinState& state, const Eigen::Matrix3d& target) {
  // Plane coordinates transform with B = target_plane^T * frame_plane.
  const Eigen::Matrix2d b = target.leftCols<2>().transpose() * state.frame.leftCols<2>();
  return b * state.cov * b.transpose();
}

NoiseDraw sample_measurement(const GaussianSpinState& state, const MeasurementModel& model, Rng& rng) {
  const double sd = std::sqrt(model.sigma * model.sigma + state.var_jz());
  std::normal_distribution<double> normal(0.0, 1.0);
  NoiseDraw d;
  d.m_theta = sd * normal(rng);
  d.m = model.J * state.mean(2) + d.m_theta;
  d.eta1 = d.m_theta / (model.sigma * model.sigma);
  d.eta2 = model.feedback_scale * d.m_theta / model.J;
  return d;
}

NoiseDraw noiseless_draw(const GaussianSpinState& state, const MeasurementModel& model) {
  NoiseDraw d;
  d.m = model.J * state.mean(2);
  return d;
}

GaussianSpinState condition_on_outcome(const GaussianSpinState& state, const NoiseDraw& draw, double sigma, double J) {
  GaussianSpinState out = state;
  const Eigen::Vector2d c = state.z_projection();
  const Eigen::Vector2d vc = state.cov * c;
  const double sigma2 = sigma * sigma;
  const double denom = sigma2 + c.dot(vc);

  // Backaction on the conjugate quadrature; [J1, J2] = i J_r with J_r = J |mean|.
  const double jr = J * state.mean.norm();
  Eigen::Vector2d conj(-c(1), c(0));
  out.cov = state.cov - vc * vc.transpose() / denom + (jr * jr / (4.0 * sigma2)) * conj * conj.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();

  const Eigen::Vector2d shift = vc * (draw.m_theta / denom);
  const Eigen::Vector3d tangent = (state.frame.leftCols<2>() * shift) / J;
  const double len = tangent.norm();
  if (len > 0.0) {
    const double radius = state.mean.norm();
    const Eigen::Vector3d axis = state.frame.col(2).cross(tangent) / len;
    const Eigen::Matrix3d r = Eigen::AngleAxisd(len / radius, axis).toRotationMatrix();
    out.mean = r * state.mean;
    out.frame = r * state.frame;
  }
  return out;
}

GaussianSpinState protocol_step(const GaussianSpinState& state, const NoiseDraw& draw, const ProtocolConfig& config,
                                double s) {
  GaussianSpinState out = config.noiseless ? state : condition_on_outcome(state, draw, config.sigma(), config.params.J());
  const Eigen::Matrix3d r = feedback_angles(draw.m, config, s).rotation();
  out.mean = r * out.mean;
  out.frame = r * out.frame;
  return out;
}

BlochVector step_mean(const GaussianSpinState& state, const NoiseDraw& draw, const ProtocolConfig& config, double s) {
  return protocol_step(state, draw, config, s).mean;
}

CovarianceUpdate step_covariance(const GaussianSpinState& state, const NoiseDraw& draw, const ProtocolConfig& config,
                                 double s) {
  const GaussianSpinState next = protocol_step(state, draw, config, s);
  if (!(next.cov.diagonal().array() > 0.0).all() && !config.noiseless) {
    throw NumericalFailure("step_covariance: covariance lost positive definiteness");
  }
  return {next.cov, next.frame};
}

BlochVector closed_form_step_mean(const BlochVector& x, double v12, double v22, double eta1,
                                  const FeedbackAngles& angles) {
  const double X = x(0), Y = x(1), Z = x(2);
  const double cg = std::cos(angles.gamma), sg = std::sin(angles.gamma);
  const double cf = std::cos(angles.varphi), sf = std::sin(angles.varphi);
  const double radial = 1.0 - eta1 * v22 * Z;
  const double kick = Z + eta1 * v22 * (1.0 - Z * Z);
  const double cyy = cg * cf * cf + sf * sf;
  const double czz = cf * cf + cg * sf * sf;
  const double cyz = cf * sf * (1.0 - cg);

  BlochVector out;
  out(0) = radial * (cg * X + cf * sg * Y) + v12 * eta1 * (cf * sg * X - cg * Y) - kick * sf * sg;
  out(1) = radial * (-cf * sg * X + cyy * Y) + v12 * eta1 * (cyy * X + cf * sg * Y) + kick * cyz;
  out(2) = radial * (sf * sg * X + cyz * Y) + v12 * eta1 * (cyz * X - sf * sg * Y) + kick * czz;
  return out;
}

Trajectory run_trajectory(const BlochVector& x0, const ProtocolConfig& config, Rng& rng,
                          RunDiagnostics* diagnostics) {
  config.validate();
  const double J = config.params.J();
  GaussianSpinState state = GaussianSpinState::coherent(x0, J);
  if (config.noiseless) state.cov.setZero();

  RunDiagnostics diag;
  diag.min_cov_eigenvalue = std::numeric_limits<double>::infinity();
  Trajectory traj(config.n_steps + 1);
  auto record = [&](std::int64_t k, double m) {
    traj.times(k) = static_cast<double>(k) * config.dt;
    traj.points.col(k) = state.mean;
    traj.czz(k) = state.mean(2) * state.mean(2) + state.var_jz() / (J * J);
    traj.outcomes(k) = m;
  };
  record(0, std::numeric_limits<double>::quiet_NaN());

  for (std::int64_t k = 0; k < config.n_steps; ++k) {
    const double s = config.s_at(k);
    const MeasurementModel model = MeasurementModel::from(config, s);
    const NoiseDraw draw = config.noiseless ? noiseless_draw(state, model) : sample_measurement(state, model, rng);
    state = protocol_step(state, draw, config, s);

    const double norm = state.mean.norm();
    if (!std::isfinite(norm) || !state.cov.allFinite()) throw NumericalFailure("run_trajectory: non-finite state");
    if (norm > 1.0 + 1e-9) {
      state.mean /= norm;
      ++diag.renormalizations;
    }
    if (!config.noiseless) {
      const double lo = std::min(state.cov(0, 0), state.cov(1, 1));
      if (!(lo > 0.0)) throw NumericalFailure("run_trajectory: covariance lost positive definiteness");
      diag.min_cov_eigenvalue = std::min(diag.min_cov_eigenvalue, lo);
    }
    record(k + 1, draw.m);
  }
  if (diagnostics) *diagnostics = diag;
  return traj;
}

Trajectory run_trajectory(const BlochVector& x0, const ProtocolConfig& config) {
  Rng rng(config.seed);
  return run_trajectory(x0, config, rng);
}

Trajectory adiabatic_run(const ProtocolConfig& config, double total_time, Rng& rng) {
  ProtocolConfig c = config;
  c.schedule = Schedule::adiabatic;
  c.total_time = total_time;
  c.n_steps = std::llround(total_time / config.dt);
  return run_trajectory(BlochVector::UnitY(), c, rng);
}

NoiseObjective noise_objective(double mu, const ProtocolConfig& config) {
  if (!(mu > 0.0)) throw std::domain_error("noise_objective: mu must be positive");
  const double J = config.params.J();
  const double sigma2 = mu * mu * J;
  const double w = config.feedback_scale(config.params.s);
  const double total = sigma2 + 0.5 * J;
  NoiseObjective o;
  o.sigma1_sq = total / (sigma2 * sigma2);
  o.sigma2_sq = w * w / (J * J) * total;
  o.f = o.sigma1_sq + o.sigma2_sq;
  return o;
}

double optimal_mu(double dt, double s, int p) {
  if (!(s > 0.0)) throw std::domain_error("optimal_mu: s must be positive");
  if (!(dt > 0.0)) throw std::domain_error("optimal_mu: dt must be positive");
  const double w = std::pow(dt * s, 1.0 / (p - 1));
  return std::sqrt(1.0 + std::sqrt(1.0 + w * w)) / (2.0 * w);
}

MuScan scan_noise_objective(const ProtocolConfig& config, double mu_lo, double mu_hi, int points) {
  MuScan scan;
  scan.mu = Eigen::VectorXd::LinSpaced(points, std::log(mu_lo), std::log(mu_hi)).array().exp();
  scan.f.resize(points);
  for (int i = 0; i < points; ++i) scan.f(i) = noise_objective(scan.mu(i), config).f;

  Eigen::Index best = 0;
  scan.f.minCoeff(&best);
  for (int i = 1; i + 1 < points; ++i) {
    if (scan.f(i) < scan.f(i - 1) && scan.f(i) <= scan.f(i + 1)) ++scan.local_minima;
  }
  scan.interior = best > 0 && best < points - 1;

  // Golden-section refinement in log(mu) on the neighbouring grid cells.
  double a = std::log(scan.mu(std::max<Eigen::Index>(best - 1, 0)));
  double b = std::log(scan.mu(std::min<Eigen::Index>(best + 1, points - 1)));
  auto f = [&](double lm) { return noise_objective(std::exp(lm), config).f; };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  scan.argmin = std::exp(0.5 * (a + b));
  scan.f_min = f(0.5 * (a + b));
  return scan;
}

}  // namespace pspin
