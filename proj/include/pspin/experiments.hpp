// Batch experiments behind the command line: configuration, seeded sweeps
// over (p, s, N) and artifact emission with a reproducibility manifest.
#pragma once

#include "pspin/analysis.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pspin {

enum class Engine { gaussian, exact, classical };
enum class Experiment { phase_portrait, similarity, dpt_scan, symmetry, optimal_mu, critical_points, qc_heatmap };

std::string to_string(Engine e);
std::string to_string(Experiment e);
Engine parse_engine(const std::string& name);
Experiment parse_experiment(const std::string& name);

/// Invalid run configuration (exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  Experiment experiment = Experiment::critical_points;
  Engine engine = Engine::gaussian;

  std::vector<int> p = {2};
  std::vector<double> s = {0.65};
  std::vector<std::int64_t> n_particles = {1000000};

  double dt = 0.01;
  double mu = 25.0;
  /// Run length; `steps`, when set, takes precedence over t_max / dt.
  double t_max = 500.0;
  std::optional<std::int64_t> steps;

  /// dpt-scan grid.
  double s_min = 0.5;
  double s_max = 0.95;
  double s_step = 0.01;
  double burn_in = 0.0;

  /// similarity / qc-heatmap grid side and phase-portrait trajectory count.
  int n_sim = 40;
  int n_cond = 80;

  /// symmetry runs and adiabatic passage time.
  int runs = 500;
  double passage_time = 1000.0;
  int bins = 50;

  std::uint64_t seed = 1;
  int workers = 1;
  std::filesystem::path out = "out";
  bool paper_scale = false;
  std::int64_t exact_cap = 1024;

  std::int64_t n_steps() const;
  std::vector<double> s_grid() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Desk-scale defaults for one experiment: sizes that finish in minutes on
/// one core.
RunConfig default_config(Experiment experiment);

/// Full-size grids, run counts and durations (--paper-scale).
void apply_paper_scale(RunConfig& config);

struct RunReport {
  int exit_code = 0;
  std::vector<std::string> artifacts;
  std::vector<std::string> task_errors;
  /// Human-readable summary lines (also stored in the manifest).
  std::vector<std::string> summary;
};

/// Runs the experiment and writes its CSV files plus manifest.json into
/// config.out. Exit codes: 0 success, 2 invalid config, 3 numerical failure
/// in at least one task (remaining tasks still run).
RunReport run(const RunConfig& config);

std::string software_version();

}  // namespace pspin
