#include "pspin/analysis.hpp"

#include "pspin/exact_engine.hpp"
#include "pspin/gaussian_engine.hpp"
#include "pspin/meanfield.hpp"
#include "pspin/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>

namespace pspin {

namespace {

constexpr double kDegenerateVariance = 1e-12;
constexpr double kDegenerateMeanGap = 1e-6;

void require_same_grid(const Trajectory& a, const Trajectory& b) {
  if (!a.same_grid(b)) throw std::invalid_argument("trajectories do not share a time grid");
}

Eigen::VectorXd polar_angles(const Trajectory& traj) {
  Eigen::VectorXd theta(traj.size());
  for (Eigen::Index k = 0; k < traj.size(); ++k) theta(k) = bloch_angles(traj.points.col(k)).first;
  return theta;
}

}  // namespace

double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("pearson: length mismatch");
  if (a.size() < 2) throw std::invalid_argument("pearson: need at least two samples");
  const double n = static_cast<double>(a.size());
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::ArrayXd da = a.array() - ma;
  const Eigen::ArrayXd db = b.array() - mb;
  const double va = da.square().sum() / n;
  const double vb = db.square().sum() / n;
  const bool a_flat = va < kDegenerateVariance;
  const bool b_flat = vb < kDegenerateVariance;
  if (a_flat && b_flat) return std::abs(ma - mb) < kDegenerateMeanGap ? 1.0 : 0.0;
  if (a_flat || b_flat) return 0.0;
  const double r = (da * db).sum() / n / std::sqrt(va * vb);
  return std::clamp(r, -1.0, 1.0);
}

double similarity(const Trajectory& ref, const Trajectory& sim) {
  require_same_grid(ref, sim);
  double prod = 1.0;
  for (int c = 0; c < 3; ++c) prod *= pearson(ref.points.row(c).transpose(), sim.points.row(c).transpose());
  return std::abs(prod);
}

Eigen::VectorXd unwrapped_azimuth(const Trajectory& traj) {
  const double two_pi = 2.0 * std::numbers::pi;
  Eigen::VectorXd phi(traj.size());
  double offset = 0.0;
  for (Eigen::Index k = 0; k < traj.size(); ++k) {
    const double raw = std::atan2(traj.points(1, k), traj.points(0, k));
    if (k > 0) {
      const double prev = phi(k - 1) - offset;
      const double jump = raw - prev;
      offset -= two_pi * std::round(jump / two_pi);
    }
    phi(k) = raw + offset;
  }
  return phi;
}

double similarity_angular(const Trajectory& ref, const Trajectory& sim) {
  require_same_grid(ref, sim);
  return std::abs(pearson(polar_angles(ref), polar_angles(sim)) * pearson(unwrapped_azimuth(ref), unwrapped_azimuth(sim)));
}

double average_similarity(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("average_similarity: empty grid");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

std::vector<BlochVector> sphere_grid(int n) {
  if (n < 1) throw std::invalid_argument("sphere_grid: n must be >= 1");
  std::vector<BlochVector> pts;
  pts.reserve(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double u = -1.0 + (i + 0.5) * 2.0 / n;
    for (int j = 0; j < n; ++j) {
      const double phi = (j + 0.5) * 2.0 * std::numbers::pi / n;
      pts.push_back(bloch_from_angles(std::acos(u), phi));
    }
  }
  return pts;
}

double SimilarityGrid::average() const {
  std::vector<double> v;
  v.reserve(cells.size());
  for (const auto& c : cells) v.push_back(c.S);
  return average_similarity(v);
}

TrajectorySource classical_source() {
  return [](const BlochVector& x0, const ProtocolConfig& config, std::uint64_t) {
    return integrate(x0, config.params, config.dt, static_cast<double>(config.n_steps) * config.dt);
  };
}

TrajectorySource gaussian_source() {
  return [](const BlochVector& x0, const ProtocolConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    return run_trajectory(x0, config, rng);
  };
}

TrajectorySource exact_source(std::int64_t n_particles) {
  auto engine = std::make_shared<const ExactEngine>(n_particles);
  return [engine](const BlochVector& x0, const ProtocolConfig& config, std::uint64_t seed) {
    Rng rng(seed);
    return engine->run_trajectory(x0, config, rng);
  };
}

SimilarityGrid similarity_grid(const TrajectorySource& engine, const ProtocolConfig& config, int n_sim, int workers) {
  const auto grid = sphere_grid(n_sim);
  const TrajectorySource reference = classical_source();
  auto results = parallel_map(grid.size(), workers, [&](std::size_t k) {
    const Trajectory ref = reference(grid[k], config, 0);
    const Trajectory sim = engine(grid[k], config, task_seed(config.seed, k));
    const auto [theta, phi] = bloch_angles(grid[k]);
    return SimilarityCell{theta, phi, similarity(ref, sim)};
  });
  SimilarityGrid out;
  out.n_sim = n_sim;
  out.params = config.params;
  out.cells = collect(std::move(results));
  return out;
}

bool near_fixed_point_or_separatrix(const BlochVector& x0, const ModelParams& params, double radius) {
  const BlochVector x = x0.normalized();
  std::vector<double> levels;
  for (const BlochVector& fp : fixed_points(params)) {
    if (std::acos(std::clamp(x.dot(fp), -1.0, 1.0)) < radius) return true;
    if (max_growth_rate(fp, params) > 1e-9) levels.push_back(classical_energy<double>(fp, params.s, params.p));
  }
  if (levels.empty()) return false;

  const Eigen::Vector3d e1 = x.unitOrthogonal();
  const Eigen::Vector3d e2 = x.cross(e1);
  const int n_dir = 90;
  const int n_rad = 30;
  for (double level : levels) {
    const double e0 = classical_energy<double>(x, params.s, params.p) - level;
    if (e0 == 0.0) return true;
    for (int a = 0; a < n_dir; ++a) {
      const double ang = 2.0 * std::numbers::pi * a / n_dir;
      const Eigen::Vector3d dir = std::cos(ang) * e1 + std::sin(ang) * e2;
      for (int r = 1; r <= n_rad; ++r) {
        const double rr = radius * r / n_rad;
        const BlochVector y = std::cos(rr) * x + std::sin(rr) * dir;
        const double e = classical_energy<double>(y, params.s, params.p) - level;
        if ((e < 0.0) != (e0 < 0.0) || e == 0.0) return true;
      }
    }
  }
  return false;
}

DptScan dpt_scan(const TrajectorySource& engine, std::span<const double> s_grid, const ProtocolConfig& config,
                 double burn_in, int workers) {
  for (std::size_t i = 1; i < s_grid.size(); ++i) {
    if (!(s_grid[i] > s_grid[i - 1])) throw std::invalid_argument("dpt_scan: s grid must be increasing");
  }
  auto results = parallel_map(s_grid.size(), workers, [&](std::size_t i) {
    ProtocolConfig c = config;
    c.params.s = s_grid[i];
    const Trajectory traj = engine(BlochVector::UnitZ(), c, task_seed(config.seed, i));
    return long_time_averages(traj, burn_in);
  });
  DptScan scan;
  scan.params = config.params;
  const auto n = static_cast<Eigen::Index>(s_grid.size());
  scan.s.resize(n);
  scan.z_inf.resize(n);
  scan.czz_inf.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    scan.s(i) = s_grid[i];
    if (results[i].ok()) {
      scan.z_inf(i) = results[i].value->z_inf;
      scan.czz_inf(i) = results[i].value->czz_inf;
    } else {
      scan.z_inf(i) = scan.czz_inf(i) = std::numeric_limits<double>::quiet_NaN();
      scan.errors.push_back("s=" + std::to_string(s_grid[i]) + ": " + results[i].error);
    }
  }
  return scan;
}

CriticalPointEstimate estimate_critical_point(const DptScan& scan, double min_peak_ratio) {
  const Eigen::Index n = scan.s.size();
  if (n < 5) throw std::invalid_argument("estimate_critical_point: need at least 5 scan points");
  const Eigen::Index nd = n - 1;
  Eigen::VectorXd slope(nd), mid(nd);
  for (Eigen::Index i = 0; i < nd; ++i) {
    mid(i) = 0.5 * (scan.s(i) + scan.s(i + 1));
    const double d = (scan.z_inf(i + 1) - scan.z_inf(i)) / (scan.s(i + 1) - scan.s(i));
    slope(i) = std::isfinite(d) ? std::abs(d) : 0.0;
  }
  Eigen::Index peak = 0;
  const double peak_value = slope.maxCoeff(&peak);

  std::vector<double> sorted(slope.data(), slope.data() + nd);
  std::nth_element(sorted.begin(), sorted.begin() + nd / 2, sorted.end());
  const double median = sorted[nd / 2];

  CriticalPointEstimate est;
  est.peak_ratio = median > 0.0 ? peak_value / median : std::numeric_limits<double>::infinity();
  est.detected = peak_value > 0.0 && est.peak_ratio >= min_peak_ratio;
  est.s_c = mid(peak);
  if (peak > 0 && peak + 1 < nd) {
    const double y0 = slope(peak - 1), y1 = slope(peak), y2 = slope(peak + 1);
    const double curvature = y0 - 2.0 * y1 + y2;
    if (curvature < 0.0) {
      const double offset = std::clamp(0.5 * (y0 - y2) / curvature, -0.5, 0.5);
      const double h = offset < 0.0 ? mid(peak) - mid(peak - 1) : mid(peak + 1) - mid(peak);
      est.s_c = mid(peak) + offset * h;
    }
  }
  return est;
}

Histogram make_histogram(std::span<const double> samples, int bins, double lo, double hi) {
  if (bins < 1) throw std::invalid_argument("make_histogram: bins must be >= 1");
  Histogram h;
  h.edges = Eigen::VectorXd::LinSpaced(bins + 1, lo, hi);
  h.counts = Eigen::VectorXd::Zero(bins);
  const double tol = 1e-6 * (hi - lo);
  for (double x : samples) {
    if (!(x >= lo - tol && x <= hi + tol)) throw std::invalid_argument("make_histogram: sample outside range");
    auto b = static_cast<Eigen::Index>(std::floor((x - lo) / (hi - lo) * bins));
    h.counts(std::clamp<Eigen::Index>(b, 0, bins - 1)) += 1.0;
  }
  h.total = static_cast<double>(samples.size());
  return h;
}

double shannon_entropy(const Eigen::Ref<const Eigen::VectorXd>& p) {
  if ((p.array() < 0.0).any() || std::abs(p.sum() - 1.0) > 1e-9) {
    throw std::invalid_argument("shannon_entropy: input is not a normalized distribution");
  }
  double s = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) s -= p(i) * std::log(p(i));
  }
  return s;
}

double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p, const Eigen::Ref<const Eigen::VectorXd>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: binning mismatch");
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    if (q(i) == 0.0) return std::numeric_limits<double>::infinity();
    d += p(i) * std::log(p(i) / q(i));
  }
  return d;
}

double js_divergence(const Eigen::Ref<const Eigen::VectorXd>& p1, const Eigen::Ref<const Eigen::VectorXd>& p2) {
  if (p1.size() != p2.size()) throw std::invalid_argument("js_divergence: binning mismatch");
  const Eigen::VectorXd m = 0.5 * (p1 + p2);
  const double js = shannon_entropy(m) - 0.5 * (shannon_entropy(p1) + shannon_entropy(p2));
  return std::clamp(js, 0.0, std::log(2.0));
}

double js_uniform_vs_two_deltas(int bins) {
  if (bins < 2) throw std::invalid_argument("js_uniform_vs_two_deltas: need at least two bins");
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(bins, 1.0 / bins);
  Eigen::VectorXd deltas = Eigen::VectorXd::Zero(bins);
  deltas(0) = deltas(bins - 1) = 0.5;
  return js_divergence(uniform, deltas);
}

SymmetryStatistics symmetry_statistics(std::span<const double> final_z, int bins) {
  if (final_z.empty()) throw std::invalid_argument("symmetry_statistics: empty sample set");
  SymmetryStatistics st;
  st.histogram = make_histogram(final_z, bins);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(bins, 1.0 / bins);
  st.js_to_uniform = js_divergence(st.histogram.probabilities(), uniform);
  st.js_reference = bins >= 2 ? js_uniform_vs_two_deltas(bins) : 0.0;
  const auto positive = std::count_if(final_z.begin(), final_z.end(), [](double z) { return z > 0.0; });
  st.sign_balance = static_cast<double>(positive) / static_cast<double>(final_z.size());
  return st;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lambda = (en + 0.12 + 0.11 / en) * d;

  KsResult r;
  r.statistic = d;
  // Kolmogorov survival function Q(lambda) = 2 sum (-1)^(j-1) exp(-2 j^2 lambda^2).
  double sum = 0.0, sign = 1.0, prev = 0.0;
  r.p_value = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = sign * 2.0 * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) <= 1e-3 * prev || std::abs(term) <= 1e-8 * sum) {
      r.p_value = std::clamp(sum, 0.0, 1.0);
      return r;
    }
    sign = -sign;
    prev = std::abs(term);
  }
  return r;
}

Eigen::MatrixXd qc_heatmap(const TrajectorySource& engine, int p, std::span<const double> s_grid,
                           std::span<const std::int64_t> n_grid, const ProtocolConfig& config, int n_sim,
                           int workers) {
  if (s_grid.empty() || n_grid.empty()) throw std::invalid_argument("qc_heatmap: grids must be nonempty");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(s_grid.size()), static_cast<Eigen::Index>(n_grid.size()));
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      ProtocolConfig c = config;
      c.params.p = p;
      c.params.s = s_grid[i];
      c.params.N = n_grid[j];
      c.seed = task_seed(config.seed, i * n_grid.size() + j);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = similarity_grid(engine, c, n_sim, workers).average();
    }
  }
  return out;
}

}  // namespace pspin
