#include "pspin/experiments.hpp"

#include "pspin/gaussian_engine.hpp"
#include "pspin/io.hpp"
#include "pspin/meanfield.hpp"
#include "pspin/parallel.hpp"
#include "pspin/spin_model.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#ifndef PSPIN_VERSION
#define PSPIN_VERSION "0.0.0"
#endif

namespace pspin {

namespace {

using Json = nlohmann::ordered_json;

constexpr std::pair<Engine, const char*> kEngines[] = {
    {Engine::gaussian, "gaussian"}, {Engine::exact, "exact"}, {Engine::classical, "classical"}};

constexpr std::pair<Experiment, const char*> kExperiments[] = {
    {Experiment::phase_portrait, "phase-portrait"}, {Experiment::similarity, "similarity"},
    {Experiment::dpt_scan, "dpt-scan"},             {Experiment::symmetry, "symmetry"},
    {Experiment::optimal_mu, "optimal-mu"},         {Experiment::critical_points, "critical-points"},
    {Experiment::qc_heatmap, "qc-heatmap"}};

std::string fmt(const char* pattern, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, x);
  return buf;
}

std::string tag(int p, double s, std::int64_t n) {
  return "p" + std::to_string(p) + "_s" + fmt("%g", s) + "_N" + std::to_string(n);
}

/// Bookkeeping shared by all experiments.
struct Context {
  const RunConfig& config;
  RunReport report;
  Json results = Json::object();
  Json job_seeds = Json::array();
  std::uint64_t next_job = 0;

  std::uint64_t job_seed(const std::string& label) {
    const std::uint64_t seed = task_seed(config.seed, next_job++);
    job_seeds.push_back({{"job", label}, {"seed", seed}});
    return seed;
  }

  template <typename Fn>
  void write(const std::string& name, Fn&& writer) {
    auto os = io::open_output(config.out / name);
    writer(os);
    report.artifacts.push_back(name);
  }

  void fail(const std::string& label, const std::string& what) { report.task_errors.push_back(label + ": " + what); }
  void say(std::string line) { report.summary.push_back(std::move(line)); }
};

ProtocolConfig protocol(const RunConfig& rc, int p, double s, std::int64_t n) {
  ProtocolConfig c;
  c.params = {p, s, n};
  c.dt = rc.dt;
  c.mu = rc.mu;
  c.n_steps = rc.n_steps();
  return c;
}

TrajectorySource source(const RunConfig& rc, std::int64_t n) {
  switch (rc.engine) {
    case Engine::gaussian:
      return gaussian_source();
    case Engine::exact:
      return exact_source(n);
    case Engine::classical:
      return classical_source();
  }
  throw ConfigError("unknown engine");
}

/// Fibonacci lattice: n nearly uniform directions on the sphere.
std::vector<BlochVector> fibonacci_sphere(int n) {
  std::vector<BlochVector> pts;
  pts.reserve(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (k + 0.5) * 2.0 / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    pts.emplace_back(r * std::cos(golden * k), r * std::sin(golden * k), z);
  }
  return pts;
}

void phase_portrait(Context& ctx) {
  const RunConfig& rc = ctx.config;
  const auto starts = fibonacci_sphere(rc.n_cond);
  for (int p : rc.p) {
    for (double s : rc.s) {
      for (std::int64_t n : rc.n_particles) {
        const std::string label = tag(p, s, n);
        ProtocolConfig c = protocol(rc, p, s, n);
        c.seed = ctx.job_seed(label);
        try {
          const TrajectorySource engine = source(rc, n);
          auto results = parallel_map(starts.size(), rc.workers,
                                      [&](std::size_t k) { return engine(starts[k], c, task_seed(c.seed, k)); });
          for (std::size_t k = 0; k < results.size(); ++k) {
            const std::string name = "portrait_" + label + "/traj_" + std::to_string(k) + ".csv";
            if (!results[k].ok()) {
              ctx.fail(name, results[k].error);
              continue;
            }
            ctx.write(name, [&](std::ostream& os) { io::write_trajectory_csv(os, *results[k].value); });
          }
        } catch (const std::exception& e) {
          ctx.fail(label, e.what());
        }
      }
    }
  }
}

void similarity(Context& ctx) {
  const RunConfig& rc = ctx.config;
  for (int p : rc.p) {
    for (double s : rc.s) {
      for (std::int64_t n : rc.n_particles) {
        const std::string label = tag(p, s, n);
        ProtocolConfig c = protocol(rc, p, s, n);
        c.seed = ctx.job_seed(label);
        try {
          const SimilarityGrid grid = similarity_grid(source(rc, n), c, rc.n_sim, rc.workers);
          ctx.write("similarity_" + label + ".csv", [&](std::ostream& os) { io::write_similarity_csv(os, grid); });
          const double mean = grid.average();
          ctx.results[label] = {{"S_bar", mean}};
          ctx.say(label + " S_bar=" + fmt("%.6f", mean));
        } catch (const std::exception& e) {
          ctx.fail(label, e.what());
        }
      }
    }
  }
}

void dpt(Context& ctx) {
  const RunConfig& rc = ctx.config;
  const std::vector<double> grid = rc.s_grid();
  for (int p : rc.p) {
    for (std::int64_t n : rc.n_particles) {
      const std::string label = "p" + std::to_string(p) + "_N" + std::to_string(n);
      ProtocolConfig c = protocol(rc, p, grid.front(), n);
      c.seed = ctx.job_seed(label);
      try {
        const DptScan scan = dpt_scan(source(rc, n), grid, c, rc.burn_in, rc.workers);
        for (const auto& e : scan.errors) ctx.fail(label, e);
        ctx.write("dpt_" + label + ".csv", [&](std::ostream& os) { io::write_dpt_csv(os, scan); });
        Json entry = {{"s_dpt_reference", dpt_critical_point<double>(p)}};
        if (scan.errors.empty()) {
          const CriticalPointEstimate est = estimate_critical_point(scan);
          entry["s_c"] = est.s_c;
          entry["detected"] = est.detected;
          entry["peak_ratio"] = est.peak_ratio;
          ctx.say(label + (est.detected ? " s_c=" + fmt("%.6f", est.s_c) : std::string(" no transition detected")));
        }
        ctx.results[label] = entry;
      } catch (const std::exception& e) {
        ctx.fail(label, e.what());
      }
    }
  }
}

void symmetry(Context& ctx) {
  const RunConfig& rc = ctx.config;
  for (int p : rc.p) {
    for (std::int64_t n : rc.n_particles) {
      const std::string label = "p" + std::to_string(p) + "_N" + std::to_string(n);
      ProtocolConfig c = protocol(rc, p, 0.0, n);
      c.schedule = Schedule::adiabatic;
      c.total_time = rc.passage_time;
      c.n_steps = rc.steps ? *rc.steps : std::llround(rc.passage_time / rc.dt);
      c.seed = ctx.job_seed(label);
      try {
        const TrajectorySource engine = source(rc, n);
        auto results = parallel_map(static_cast<std::size_t>(rc.runs), rc.workers, [&](std::size_t k) {
          return engine(BlochVector::UnitY(), c, task_seed(c.seed, k)).final_point()(2);
        });
        std::vector<double> final_z;
        for (std::size_t k = 0; k < results.size(); ++k) {
          if (results[k].ok()) {
            final_z.push_back(*results[k].value);
          } else {
            ctx.fail(label + " run " + std::to_string(k), results[k].error);
          }
        }
        const SymmetryStatistics st = symmetry_statistics(final_z, rc.bins);
        ctx.write("symmetry_" + label + ".csv", [&](std::ostream& os) { io::write_histogram_csv(os, st.histogram); });
        const auto extreme = std::count_if(final_z.begin(), final_z.end(), [](double z) { return std::abs(z) > 0.9; });
        ctx.results[label] = {{"runs", final_z.size()},
                              {"js_to_uniform", st.js_to_uniform},
                              {"js_reference", st.js_reference},
                              {"sign_balance", st.sign_balance},
                              {"fraction_abs_z_above_0.9", static_cast<double>(extreme) / final_z.size()}};
        ctx.say(label + " sign_balance=" + fmt("%.4f", st.sign_balance) + " js_to_uniform=" +
                fmt("%.4f", st.js_to_uniform) + " J0=" + fmt("%.4f", st.js_reference));
      } catch (const std::exception& e) {
        ctx.fail(label, e.what());
      }
    }
  }
}

void optimal(Context& ctx) {
  const RunConfig& rc = ctx.config;
  ctx.write("optimal_mu.csv", [&](std::ostream& os) {
    os << "p,s,mu_closed_form,mu_scan,ratio,interior,local_minima\n";
    for (int p : rc.p) {
      for (double s : rc.s) {
        const std::string label = "p" + std::to_string(p) + "_s" + fmt("%g", s);
        try {
          ProtocolConfig c = protocol(rc, p, s, rc.n_particles.front());
          const double closed = optimal_mu(rc.dt, s, p);
          const MuScan scan = scan_noise_objective(c);
          const double ratio = closed / scan.argmin;
          os << p << ',' << io::format_double(s) << ',' << io::format_double(closed) << ','
             << io::format_double(scan.argmin) << ',' << io::format_double(ratio) << ','
             << (scan.interior ? 1 : 0) << ',' << scan.local_minima << '\n';
          ctx.results[label] = {{"mu_closed_form", closed},
                                {"mu_scan", scan.argmin},
                                {"ratio", ratio},
                                {"unique_interior_minimum", scan.interior && scan.local_minima == 1}};
          ctx.say(label + " mu_closed_form=" + fmt("%.6g", closed) + " mu_scan=" + fmt("%.6g", scan.argmin) +
                  " ratio=" + fmt("%.6g", ratio));
        } catch (const std::exception& e) {
          ctx.fail(label, e.what());
        }
      }
    }
  });
}

void critical(Context& ctx) {
  ctx.write("critical_points.csv", [&](std::ostream& os) {
    os << "p,s_onset,s_eq,s_dpt,s_dpt_pole_estimate\n";
    for (int p : ctx.config.p) {
      const std::string label = "p" + std::to_string(p);
      try {
        const CriticalPoints cp = critical_points(p);
        const double pole = dpt_pole_estimate<double>(p);
        os << p << ',' << io::format_double(cp.s_onset) << ',' << io::format_double(cp.s_eq) << ','
           << io::format_double(cp.s_dpt) << ',' << io::format_double(pole) << '\n';
        ctx.results[label] = {{"s_onset", cp.s_onset}, {"s_eq", cp.s_eq}, {"s_dpt", cp.s_dpt}, {"s_dpt_pole_estimate", pole}};
        ctx.say(label + " s_onset=" + fmt("%.6f", cp.s_onset) + " s_eq=" + fmt("%.6f", cp.s_eq) +
                " s_dpt=" + fmt("%.6f", cp.s_dpt));
      } catch (const std::exception& e) {
        ctx.fail(label, e.what());
      }
    }
  });
}

void heatmap(Context& ctx) {
  const RunConfig& rc = ctx.config;
  if (rc.engine == Engine::exact) throw ConfigError("qc-heatmap sweeps N and needs the gaussian or classical engine");
  for (int p : rc.p) {
    const std::string label = "p" + std::to_string(p);
    ProtocolConfig c = protocol(rc, p, rc.s.front(), rc.n_particles.front());
    c.seed = ctx.job_seed(label);
    try {
      const Eigen::MatrixXd m = qc_heatmap(source(rc, 0), p, rc.s, rc.n_particles, c, rc.n_sim, rc.workers);
      ctx.write("heatmap_" + label + ".csv",
                [&](std::ostream& os) { io::write_heatmap_csv(os, rc.s, rc.n_particles, m); });
    } catch (const std::exception& e) {
      ctx.fail(label, e.what());
    }
  }
}

Json config_json(const RunConfig& rc) {
  Json j = {{"experiment", to_string(rc.experiment)},
            {"engine", to_string(rc.engine)},
            {"p", rc.p},
            {"s", rc.s},
            {"n_particles", rc.n_particles},
            {"dt", rc.dt},
            {"mu", rc.mu},
            {"t_max", rc.t_max},
            {"steps", rc.n_steps()},
            {"s_min", rc.s_min},
            {"s_max", rc.s_max},
            {"s_step", rc.s_step},
            {"burn_in", rc.burn_in},
            {"n_sim", rc.n_sim},
            {"n_cond", rc.n_cond},
            {"runs", rc.runs},
            {"passage_time", rc.passage_time},
            {"bins", rc.bins},
            {"seed", rc.seed},
            {"workers", rc.workers},
            {"out", rc.out.string()},
            {"paper_scale", rc.paper_scale},
            {"exact_cap", rc.exact_cap}};
  return j;
}

}  // namespace

std::string software_version() { return PSPIN_VERSION; }

std::string to_string(Engine e) {
  for (const auto& [k, name] : kEngines) {
    if (k == e) return name;
  }
  return "unknown";
}

std::string to_string(Experiment e) {
  for (const auto& [k, name] : kExperiments) {
    if (k == e) return name;
  }
  return "unknown";
}

Engine parse_engine(const std::string& name) {
  for (const auto& [k, n] : kEngines) {
    if (name == n) return k;
  }
  throw ConfigError("unknown engine '" + name + "'");
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& [k, n] : kExperiments) {
    if (name == n) return k;
  }
  throw ConfigError("unknown experiment '" + name + "'");
}

std::int64_t RunConfig::n_steps() const { return steps ? *steps : std::llround(t_max / dt); }

std::vector<double> RunConfig::s_grid() const {
  std::vector<double> grid;
  const auto n = static_cast<std::int64_t>(std::floor((s_max - s_min) / s_step + 1e-9));
  for (std::int64_t k = 0; k <= n; ++k) grid.push_back(s_min + static_cast<double>(k) * s_step);
  return grid;
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(!p.empty() && !s.empty() && !n_particles.empty(), "p, s and n-particles lists must be nonempty");
  for (int v : p) require(v >= 2, "p must be >= 2");
  for (double v : s) require(v >= 0.0 && v <= 1.0, "s must lie in [0,1]");
  for (std::int64_t v : n_particles) require(v >= 1, "n-particles must be >= 1");
  require(dt > 0.0, "dt must be positive");
  require(mu > 0.0, "mu must be positive");
  require(n_steps() >= 1, "run length must be at least one step");
  require(runs >= 1, "runs must be >= 1");
  require(workers >= 1, "workers must be >= 1");
  require(n_sim >= 1 && n_cond >= 1, "grid sizes must be >= 1");
  require(bins >= 1, "bins must be >= 1");
  if (experiment == Experiment::dpt_scan) {
    require(s_step > 0.0 && s_min >= 0.0 && s_max <= 1.0 && s_max > s_min, "invalid s grid");
    require(s_grid().size() >= 5, "dpt-scan needs at least 5 grid points");
    require(burn_in >= 0.0 && burn_in < static_cast<double>(n_steps()) * dt, "burn-in must be shorter than the run");
  }
  if (experiment == Experiment::symmetry) {
    require(passage_time > 0.0, "passage time must be positive");
    require(engine != Engine::classical, "symmetry runs need a stochastic engine");
  }
  if (engine == Engine::exact) {
    for (std::int64_t v : n_particles) {
      require(v <= exact_cap, "exact engine limited to N <= " + std::to_string(exact_cap));
    }
  }
}

RunConfig default_config(Experiment experiment) {
  RunConfig rc;
  rc.experiment = experiment;
  switch (experiment) {
    case Experiment::phase_portrait:
    case Experiment::similarity:
      rc.p = {2};
      rc.s = {0.65};
      rc.mu = 25.0;
      rc.t_max = 500.0;
      break;
    case Experiment::dpt_scan:
      rc.t_max = 200.0;
      break;
    case Experiment::symmetry:
      rc.mu = 45.0;
      rc.n_particles = {100000};
      rc.passage_time = 1000.0;
      break;
    case Experiment::optimal_mu:
      rc.s = {0.25, 0.5, 0.75, 1.0};
      break;
    case Experiment::critical_points:
      rc.p = {2, 3, 4};
      break;
    case Experiment::qc_heatmap:
      rc.s = {0.55, 0.65, 0.75};
      rc.n_particles = {1000, 10000, 100000, 1000000};
      rc.n_sim = 10;
      rc.t_max = 300.0;
      break;
  }
  return rc;
}

void apply_paper_scale(RunConfig& rc) {
  rc.paper_scale = true;
  switch (rc.experiment) {
    case Experiment::phase_portrait:
    case Experiment::similarity:
      rc.n_sim = 700;
      rc.t_max = 3500.0;
      break;
    case Experiment::qc_heatmap:
      rc.n_sim = 700;
      rc.t_max = 3500.0;
      break;
    case Experiment::symmetry:
      rc.runs = 8000;
      rc.passage_time = 1e4;
      break;
    default:
      break;
  }
}

RunReport run(const RunConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{config, {}};
  try {
    config.validate();
    std::filesystem::create_directories(config.out);
    switch (config.experiment) {
      case Experiment::phase_portrait:
        phase_portrait(ctx);
        break;
      case Experiment::similarity:
        similarity(ctx);
        break;
      case Experiment::dpt_scan:
        dpt(ctx);
        break;
      case Experiment::symmetry:
        symmetry(ctx);
        break;
      case Experiment::optimal_mu:
        optimal(ctx);
        break;
      case Experiment::critical_points:
        critical(ctx);
        break;
      case Experiment::qc_heatmap:
        heatmap(ctx);
        break;
    }
  } catch (const ConfigError& e) {
    ctx.report.exit_code = 2;
    ctx.report.task_errors.push_back(std::string("config: ") + e.what());
    return ctx.report;
  }
  if (!ctx.report.task_errors.empty()) ctx.report.exit_code = 3;

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json manifest = {{"software", "pspin"},
                   {"version", software_version()},
                   {"config", config_json(config)},
                   {"seed", config.seed},
                   {"task_seeds", ctx.job_seeds},
                   {"task_seed_rule", "task k of a job uses seed_job ^ splitmix64(k)"},
                   {"results", ctx.results},
                   {"artifacts", ctx.report.artifacts},
                   {"task_errors", ctx.report.task_errors},
                   {"wall_time_s", wall}};
  auto os = io::open_output(config.out / "manifest.json");
  os << manifest.dump(2) << '\n';
  return ctx.report;
}

}  // namespace pspin
