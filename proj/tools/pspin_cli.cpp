// pspin: batch front-end for the p-spin feedback simulator.
//
//   pspin critical-points --p 2 3 4
//   pspin dpt-scan --engine classical --p 2 --s-step 0.002 --out scan
//   pspin symmetry --n-particles 1000 100000 --runs 500 --workers 4
//
// Options may also come from an INI file given with --config; a section
// named after the subcommand holds its keys and flags override the file.
#include "pspin/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <memory>

namespace {

struct Subcommand {
  pspin::RunConfig config;
  std::string engine = "gaussian";
  std::int64_t steps = 0;
  CLI::Option* steps_opt = nullptr;
  std::map<std::string, CLI::Option*> scaled;
};

void add_options(CLI::App* sub, Subcommand& sc) {
  auto& c = sc.config;
  sc.engine = pspin::to_string(c.engine);
  sub->add_option("--engine", sc.engine, "gaussian | exact | classical")
      ->check(CLI::IsMember({"gaussian", "exact", "classical"}))
      ->capture_default_str();
  sub->add_option("--p", c.p, "interaction degrees")->expected(1, -1)->capture_default_str();
  sub->add_option("--s", c.s, "mixing parameters")->expected(1, -1)->capture_default_str();
  sub->add_option("--n-particles,-N", c.n_particles, "particle numbers")->expected(1, -1)->capture_default_str();
  sub->add_option("--dt", c.dt, "protocol time step")->capture_default_str();
  sub->add_option("--mu", c.mu, "measurement resolution sigma / sqrt(J)")->capture_default_str();
  sc.scaled["t-max"] = sub->add_option("--t-max", c.t_max, "run length")->capture_default_str();
  sc.steps_opt = sub->add_option("--steps", sc.steps, "number of protocol steps (overrides --t-max)");
  sub->add_option("--seed", c.seed, "run seed")->capture_default_str();
  sc.scaled["runs"] = sub->add_option("--runs", c.runs, "trajectories per symmetry run")->capture_default_str();
  sub->add_option("--workers,-j", c.workers, "worker threads")->capture_default_str();
  sub->add_option("--out,-o", c.out, "output directory")->capture_default_str();
  sub->add_flag("--paper-scale", c.paper_scale, "full-size grids, run counts and durations");
  sub->add_option("--s-min", c.s_min, "dpt-scan grid start")->capture_default_str();
  sub->add_option("--s-max", c.s_max, "dpt-scan grid end")->capture_default_str();
  sub->add_option("--s-step", c.s_step, "dpt-scan grid step")->capture_default_str();
  sub->add_option("--burn-in", c.burn_in, "time discarded before averaging")->capture_default_str();
  sc.scaled["n-sim"] = sub->add_option("--n-sim", c.n_sim, "initial-condition grid side")->capture_default_str();
  sub->add_option("--n-cond", c.n_cond, "phase-portrait trajectories")->capture_default_str();
  sc.scaled["passage-time"] =
      sub->add_option("--passage-time", c.passage_time, "adiabatic passage time T")->capture_default_str();
  sub->add_option("--bins", c.bins, "histogram bins")->capture_default_str();
  sub->add_option("--exact-cap", c.exact_cap, "largest N accepted by the exact engine")->capture_default_str();
}

/// --paper-scale fills in every size that was not given explicitly.
void finalize(Subcommand& sc) {
  auto& c = sc.config;
  if (c.paper_scale) {
    pspin::RunConfig scaled = c;
    pspin::apply_paper_scale(scaled);
    if (sc.scaled["t-max"]->count() == 0) c.t_max = scaled.t_max;
    if (sc.scaled["runs"]->count() == 0) c.runs = scaled.runs;
    if (sc.scaled["n-sim"]->count() == 0) c.n_sim = scaled.n_sim;
    if (sc.scaled["passage-time"]->count() == 0) c.passage_time = scaled.passage_time;
  }
  if (sc.steps_opt->count() > 0) c.steps = sc.steps;
  c.engine = pspin::parse_engine(sc.engine);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Measurement-based feedback simulator for mean-field p-spin models"};
  app.set_version_flag("--version", pspin::software_version());
  app.set_config("--config", "", "INI file; a section per subcommand");
  app.require_subcommand(1);

  const pspin::Experiment experiments[] = {
      pspin::Experiment::phase_portrait, pspin::Experiment::similarity,     pspin::Experiment::dpt_scan,
      pspin::Experiment::symmetry,       pspin::Experiment::optimal_mu,     pspin::Experiment::critical_points,
      pspin::Experiment::qc_heatmap};
  std::vector<std::pair<CLI::App*, std::unique_ptr<Subcommand>>> subs;
  for (auto e : experiments) {
    auto sc = std::make_unique<Subcommand>();
    sc->config = pspin::default_config(e);
    auto* sub = app.add_subcommand(pspin::to_string(e));
    add_options(sub, *sc);
    subs.emplace_back(sub, std::move(sc));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  for (auto& [sub, sc] : subs) {
    if (!sub->parsed()) continue;
    try {
      finalize(*sc);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "pspin: %s\n", e.what());
      return 2;
    }
    const pspin::RunReport report = pspin::run(sc->config);
    for (const auto& line : report.summary) std::cout << line << '\n';
    for (const auto& err : report.task_errors) std::cerr << "pspin: " << err << '\n';
    return report.exit_code;
  }
  return 2;
}
