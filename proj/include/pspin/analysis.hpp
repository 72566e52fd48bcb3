// Derived metrics: phase-space similarity, DPT scans and critical-point
// extraction, outcome histograms with entropy / Jensen-Shannon distances,
// two-sample Kolmogorov-Smirnov tests and quantum-to-classical heat maps.
#pragma once

#include "pspin/model.hpp"
#include "pspin/protocol.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pspin {

// ---------------------------------------------------------------- similarity

/// Pearson correlation. Zero-variance inputs (below 1e-12): both degenerate
/// gives 1 if the means agree to 1e-6 and 0 otherwise; one degenerate gives 0.
double pearson(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// |cor(X, X') cor(Y, Y') cor(Z, Z')| over the common time grid.
double similarity(const Trajectory& ref, const Trajectory& sim);

/// |cor(theta, theta') cor(phi, phi')| with phi unwrapped continuously.
double similarity_angular(const Trajectory& ref, const Trajectory& sim);

/// phi(t) = atan2(Y, X) with 2 pi jumps removed.
Eigen::VectorXd unwrapped_azimuth(const Trajectory& traj);

double average_similarity(std::span<const double> values);

/// n x n equal-area grid: cos(theta) and phi at cell centres.
std::vector<BlochVector> sphere_grid(int n);

struct SimilarityCell {
  double theta = 0.0;
  double phi = 0.0;
  double S = 0.0;
};

struct SimilarityGrid {
  int n_sim = 0;
  std::vector<SimilarityCell> cells;
  ModelParams params;

  double average() const;
};

/// Trajectory generator: initial direction, protocol configuration and a
/// task seed (ignored by deterministic engines).
using TrajectorySource = std::function<Trajectory(const BlochVector&, const ProtocolConfig&, std::uint64_t)>;

TrajectorySource classical_source();
TrajectorySource gaussian_source();
/// Exact engine for one particle number; the Jx eigenbasis is built once here.
TrajectorySource exact_source(std::int64_t n_particles);

/// Similarity of `engine` against the classical flow on an n_sim x n_sim grid.
SimilarityGrid similarity_grid(const TrajectorySource& engine, const ProtocolConfig& config, int n_sim,
                               int workers = 1);

/// True when the geodesic ball of `radius` around x contains a fixed point
/// or crosses the energy level of an unstable fixed point.
bool near_fixed_point_or_separatrix(const BlochVector& x, const ModelParams& params, double radius);

// -------------------------------------------------------------------- DPT

struct CriticalPointEstimate {
  double s_c = 0.0;
  bool detected = false;
  /// max |dZ/ds| divided by the median |dZ/ds|.
  double peak_ratio = 0.0;
};

struct DptScan {
  Eigen::VectorXd s;
  Eigen::VectorXd z_inf;
  Eigen::VectorXd czz_inf;
  ModelParams params;
  std::vector<std::string> errors;
};

/// For each s, runs `engine` from the +z pole for config.n_steps steps and
/// takes long-time averages after `burn_in`.
DptScan dpt_scan(const TrajectorySource& engine, std::span<const double> s_grid, const ProtocolConfig& config,
                 double burn_in = 0.0, int workers = 1);

/// Location of the largest |discrete derivative| of Z_inf(s), refined by a
/// parabola through the neighbouring derivative magnitudes. A peak that is
/// not at least `min_peak_ratio` times the median slope is reported as
/// "no transition detected".
CriticalPointEstimate estimate_critical_point(const DptScan& scan, double min_peak_ratio = 4.0);

// ----------------------------------------------------- entropy & histograms

struct Histogram {
  Eigen::VectorXd edges;
  Eigen::VectorXd counts;
  double total = 0.0;

  Eigen::Index bins() const { return counts.size(); }
  Eigen::VectorXd probabilities() const { return counts / total; }
};

Histogram make_histogram(std::span<const double> samples, int bins, double lo = -1.0, double hi = 1.0);

/// -sum p ln p with 0 ln 0 = 0. Throws when p does not sum to 1 (1e-9).
double shannon_entropy(const Eigen::Ref<const Eigen::VectorXd>& p);

/// sum p ln(p/q), nonnegative.
double kl_divergence(const Eigen::Ref<const Eigen::VectorXd>& p, const Eigen::Ref<const Eigen::VectorXd>& q);

/// S[(P1+P2)/2] - (S[P1] + S[P2])/2, in [0, ln 2].
double js_divergence(const Eigen::Ref<const Eigen::VectorXd>& p1, const Eigen::Ref<const Eigen::VectorXd>& p2);

/// Jensen-Shannon divergence between the uniform distribution on `bins`
/// bins and equal point masses in the two extreme bins.
double js_uniform_vs_two_deltas(int bins);

struct SymmetryStatistics {
  Histogram histogram;
  double js_to_uniform = 0.0;
  /// Normalization of js_to_uniform for this binning.
  double js_reference = 0.0;
  double sign_balance = 0.0;
};

SymmetryStatistics symmetry_statistics(std::span<const double> final_z, int bins = 50);

// ---------------------------------------------------------------- KS test

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test with the asymptotic distribution.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// -------------------------------------------------------- quantum-classical

/// Average similarity for every (s, N); rows follow s_grid, columns N_grid.
Eigen::MatrixXd qc_heatmap(const TrajectorySource& engine, int p, std::span<const double> s_grid,
                           std::span<const std::int64_t> n_grid, const ProtocolConfig& config, int n_sim,
                           int workers = 1);

}  // namespace pspin
