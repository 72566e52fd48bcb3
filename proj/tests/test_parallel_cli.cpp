#include "pspin/experiments.hpp"
#include "pspin/parallel.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

using namespace pspin;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "pspin_tests" / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json manifest(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "manifest.json")); }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(PSPIN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig small_dpt(const fs::path& out, int workers) {
  RunConfig rc = default_config(Experiment::dpt_scan);
  rc.p = {2, 3};
  rc.n_particles = {1000};
  rc.t_max = 20.0;
  rc.s_min = 0.5;
  rc.s_max = 0.6;
  rc.s_step = 0.02;
  rc.workers = workers;
  rc.out = out;
  return rc;
}

}  // namespace

TEST_CASE("parallel_map keeps task order for any worker count") {
  for (int workers : {1, 2, 3, 8}) {
    const auto r = collect(parallel_map(100, workers, [](std::size_t i) { return 3 * static_cast<int>(i) + 1; }));
    REQUIRE(r.size() == 100);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == 3 * static_cast<int>(i) + 1);
  }
  CHECK(parallel_map(0, 4, [](std::size_t) { return 0; }).empty());
}

TEST_CASE("a failing task does not affect the others") {
  auto r = parallel_map(10, 3, [](std::size_t i) {
    if (i == 4) throw std::runtime_error("boom");
    return static_cast<double>(i);
  });
  for (std::size_t i = 0; i < 10; ++i) {
    if (i == 4) {
      CHECK_FALSE(r[i].ok());
      CHECK(r[i].error == "boom");
    } else {
      CHECK(*r[i].value == static_cast<double>(i));
    }
  }
  CHECK_THROWS_AS(collect(std::move(r)), std::runtime_error);
}

TEST_CASE("task seeds") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(task_seed(7, k));
  CHECK(seen.size() == 1000);
  CHECK(task_seed(7, 3) == task_seed(7, 3));
  CHECK(task_seed(7, 3) != task_seed(8, 3));
  // Reference output of splitmix64 for state 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("names and config validation") {
  for (auto e : {Experiment::phase_portrait, Experiment::similarity, Experiment::dpt_scan, Experiment::symmetry,
                 Experiment::optimal_mu, Experiment::critical_points, Experiment::qc_heatmap}) {
    CHECK(parse_experiment(to_string(e)) == e);
  }
  CHECK(parse_engine("exact") == Engine::exact);
  CHECK_THROWS_AS(parse_engine("quantum"), ConfigError);

  RunConfig rc = default_config(Experiment::dpt_scan);
  rc.s_step = -0.1;
  CHECK_THROWS_AS(rc.validate(), ConfigError);
  rc = default_config(Experiment::similarity);
  rc.engine = Engine::exact;
  CHECK_THROWS_AS(rc.validate(), ConfigError);
  rc = default_config(Experiment::symmetry);
  rc.engine = Engine::classical;
  CHECK_THROWS_AS(rc.validate(), ConfigError);
  rc = default_config(Experiment::dpt_scan);
  CHECK(rc.s_grid().size() == 46);
  CHECK(rc.s_grid().back() == Approx(0.95));
  rc.steps = 300;
  CHECK(rc.n_steps() == 300);
}

TEST_CASE("full-scale option enlarges the runs") {
  RunConfig rc = default_config(Experiment::symmetry);
  apply_paper_scale(rc);
  CHECK(rc.runs == 8000);
  CHECK(rc.passage_time == 1e4);
  RunConfig sim = default_config(Experiment::similarity);
  apply_paper_scale(sim);
  CHECK(sim.n_sim == 700);
}

TEST_CASE("critical-points run writes the table and a manifest") {
  RunConfig rc = default_config(Experiment::critical_points);
  rc.out = scratch("critical");
  const RunReport rep = run(rc);
  CHECK(rep.exit_code == 0);
  CHECK(rep.summary.size() == 3);
  const auto m = manifest(rc.out);
  CHECK(m["results"]["p2"]["s_dpt"].get<double>() == Approx(2.0 / 3.0).epsilon(1e-6));
  CHECK(m["results"]["p3"]["s_dpt"].get<double>() == Approx(0.745921).epsilon(1e-6));
  CHECK(m["results"]["p4"]["s_eq"].get<double>() == Approx(27.0 / 35.0).epsilon(1e-9));
  CHECK(m["artifacts"][0] == "critical_points.csv");
  CHECK(m["config"]["experiment"] == "critical-points");
  CHECK(m.contains("wall_time_s"));
  const std::string csv = slurp(rc.out / "critical_points.csv");
  CHECK(csv.rfind("p,s_onset,s_eq,s_dpt,s_dpt_pole_estimate\n", 0) == 0);
}

TEST_CASE("runs are byte-identical across repeats and worker counts") {
  const RunConfig a = small_dpt(scratch("dpt_a"), 1);
  const RunConfig b = small_dpt(scratch("dpt_b"), 1);
  const RunConfig c = small_dpt(scratch("dpt_c"), 3);
  REQUIRE(run(a).exit_code == 0);
  REQUIRE(run(b).exit_code == 0);
  REQUIRE(run(c).exit_code == 0);
  for (const char* name : {"dpt_p2_N1000.csv", "dpt_p3_N1000.csv"}) {
    const std::string first = slurp(a.out / name);
    CHECK(first.rfind("s,Z_inf,Czz_inf\n", 0) == 0);
    CHECK(first == slurp(b.out / name));
    CHECK(first == slurp(c.out / name));
  }
  CHECK(manifest(a.out)["task_seeds"] == manifest(c.out)["task_seeds"]);

  RunConfig other = small_dpt(scratch("dpt_d"), 1);
  other.seed = 2;
  REQUIRE(run(other).exit_code == 0);
  CHECK(slurp(a.out / "dpt_p2_N1000.csv") != slurp(other.out / "dpt_p2_N1000.csv"));
}

TEST_CASE("CSV schemas") {
  RunConfig sim = default_config(Experiment::similarity);
  sim.n_particles = {1000};
  sim.n_sim = 3;
  sim.t_max = 2.0;
  sim.out = scratch("similarity");
  REQUIRE(run(sim).exit_code == 0);
  const auto m = manifest(sim.out);
  const std::string name = m["artifacts"][0].get<std::string>();
  CHECK(slurp(sim.out / name).rfind("theta,phi,S\n", 0) == 0);

  RunConfig portrait = default_config(Experiment::phase_portrait);
  portrait.engine = Engine::exact;
  portrait.n_particles = {20};
  portrait.n_cond = 2;
  portrait.t_max = 0.05;
  portrait.out = scratch("portrait");
  const RunReport rep = run(portrait);
  REQUIRE(rep.exit_code == 0);
  REQUIRE(rep.artifacts.size() == 2);
  const std::string traj = slurp(portrait.out / rep.artifacts[0]);
  CHECK(traj.rfind("t,X,Y,Z,czz,m\n", 0) == 0);
  CHECK(std::count(traj.begin(), traj.end(), '\n') == 7);

  RunConfig sym = default_config(Experiment::symmetry);
  sym.n_particles = {1000};
  sym.runs = 20;
  sym.passage_time = 5.0;
  sym.bins = 10;
  sym.out = scratch("symmetry");
  const RunReport srep = run(sym);
  REQUIRE(srep.exit_code == 0);
  const std::string hist = slurp(sym.out / srep.artifacts[0]);
  CHECK(hist.rfind("bin_lo,bin_hi,count\n", 0) == 0);
  CHECK(std::count(hist.begin(), hist.end(), '\n') == 11);

  RunConfig heat = default_config(Experiment::qc_heatmap);
  heat.s = {0.65};
  heat.n_particles = {100, 1000};
  heat.n_sim = 2;
  heat.t_max = 1.0;
  heat.out = scratch("heatmap");
  const RunReport hrep = run(heat);
  REQUIRE(hrep.exit_code == 0);
  const std::string hm = slurp(heat.out / "heatmap_p2.csv");
  CHECK(hm.rfind("s,N,S_bar\n", 0) == 0);
  CHECK(std::count(hm.begin(), hm.end(), '\n') == 3);
}

TEST_CASE("exit codes from run()") {
  RunConfig bad = default_config(Experiment::dpt_scan);
  bad.out = scratch("bad");
  bad.s_max = 0.4;
  CHECK(run(bad).exit_code == 2);
  CHECK_FALSE(fs::exists(bad.out / "manifest.json"));

  // s = 0 turns the feedback off, so the noise objective has no minimum.
  RunConfig none = default_config(Experiment::optimal_mu);
  none.s = {0.0, 0.5};
  none.out = scratch("no_optimum");
  const RunReport rep = run(none);
  CHECK(rep.exit_code == 3);
  CHECK(rep.task_errors.size() == 1);
  const auto m = manifest(none.out);
  CHECK(m["task_errors"].size() == 1);
  CHECK(slurp(none.out / "optimal_mu.csv").find("0.5") != std::string::npos);
}

TEST_CASE("command line") {
  const fs::path out = scratch("cli");
  CHECK(run_cli("critical-points --p 2 3 --out " + out.string()) == 0);
  CHECK(fs::exists(out / "manifest.json"));
  CHECK(manifest(out)["config"]["p"].size() == 2);

  CHECK(run_cli("dpt-scan --s-step -1 --out " + (out / "x").string()) == 2);
  CHECK(run_cli("critical-points --no-such-flag") == 2);
  CHECK(run_cli("similarity --engine quantum") == 2);
  CHECK(run_cli("") == 2);
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("optimal-mu --s 0 --out " + (out / "y").string()) == 3);

  const fs::path ini = scratch("ini") / "run.ini";
  fs::create_directories(ini.parent_path());
  std::ofstream(ini) << "[optimal-mu]\ns = 0.5\ndt = 0.02\n";
  CHECK(run_cli("--config " + ini.string() + " optimal-mu --out " + (out / "z").string()) == 0);
  const auto m = manifest(out / "z");
  CHECK(m["config"]["dt"].get<double>() == 0.02);
  CHECK(m["config"]["s"][0].get<double>() == 0.5);
}
