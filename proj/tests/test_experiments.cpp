#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qtopc/experiments.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qtopc;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "qtopc_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig fast_forced() {
  ExperimentConfig c;
  c.preset = "two-level";
  c.mode = "forced-nominal";
  c.runs = 1;
  c.seed = 4242;
  return c;
}
} // namespace

TEST_CASE("config files parse sections and comments") {
  fs::path dir = scratch("config");
  fs::path file = dir / "run.cfg";
  {
    std::ofstream out(file);
    out << "# campaign setup\n"
        << "preset = two-level\n"
        << "lambda0 = 0.05\n"
        << "; alt comment style\n"
        << "[true]\n"
        << "operator = sigma_y\n"
        << "gamma = 0.1\n"
        << "[solver]\n"
        << "max_switches = 2\n";
  }
  auto kv = parse_config_file(file.string());
  CHECK(kv.at("preset") == "two-level");
  CHECK(kv.at("lambda0") == "0.05");
  CHECK(kv.at("true.operator") == "sigma_y");
  CHECK(kv.at("true.gamma") == "0.1");
  CHECK(kv.at("solver.max_switches") == "2");

  ExperimentConfig c = ExperimentConfig::from_kv(kv);
  CHECK(c.lambda0 == doctest::Approx(0.05));
  CHECK(c.true_operator == "sigma_y");
  CHECK(c.solver_params.max_switches == 2);

  fs::path bad = dir / "bad.cfg";
  std::ofstream(bad) << "no equals sign here\n";
  CHECK_THROWS(parse_config_file(bad.string()));
  CHECK_THROWS(parse_config_file((dir / "missing.cfg").string()));
}

TEST_CASE("config round-trips through the key-value form") {
  ExperimentConfig c = fast_forced();
  c.true_operator = "depolarizing";
  c.true_gamma = 0.17;
  c.delta_bar = 0.003;
  c.solver_params.segment_count = 24;
  c.stop_at_final_period = false;
  ExperimentConfig back = ExperimentConfig::from_kv(c.to_kv());
  CHECK(back.to_kv() == c.to_kv());
}

TEST_CASE("forced campaigns emit files and are byte-reproducible") {
  fs::path dir1 = scratch("forced1"), dir2 = scratch("forced2");
  ExperimentConfig c = fast_forced();
  c.out_dir = dir1.string();
  CampaignSummary s1 = run_experiment(c);
  c.out_dir = dir2.string();
  CampaignSummary s2 = run_experiment(c);

  CHECK(fs::exists(dir1 / "summary.json"));
  CHECK(fs::exists(dir1 / "series.csv"));
  CHECK(fs::exists(dir1 / "run_00000.csv"));
  CHECK(slurp(dir1 / "summary.json") == slurp(dir2 / "summary.json"));
  CHECK(slurp(dir1 / "run_00000.csv") == slurp(dir2 / "run_00000.csv"));

  CHECK(s1.runs == 1);
  CHECK(s1.mean_final_infidelity == doctest::Approx(s2.mean_final_infidelity));
  CHECK(s1.mean_final_infidelity < 1e-2);
  // cost series monotone nonincreasing for the nominal-outcome run
  for (std::size_t i = 1; i < s1.mean_cost_series.size(); ++i)
    CHECK(s1.mean_cost_series[i] <= s1.mean_cost_series[i - 1] + 1e-9);

  std::string header = slurp(dir1 / "run_00000.csv").substr(0, 32);
  CHECK(header.rfind("step,time,cost,fidelity,outcome", 0) == 0);
}

TEST_CASE("the open-loop baseline is much worse than closed-loop control") {
  fs::path dir = scratch("baseline");
  ExperimentConfig base = fast_forced();
  base.mode = "open-loop-baseline";
  base.true_operator = "sigma_y";
  base.true_gamma = 0.25;
  base.runs = 20;
  base.out_dir = (dir / "open").string();
  CampaignSummary open = run_experiment(base);

  ExperimentConfig fb = fast_forced();
  fb.true_operator = "sigma_y";
  fb.true_gamma = 0.25;
  fb.out_dir = (dir / "forced").string();
  CampaignSummary forced = run_experiment(fb);

  CHECK(open.mean_final_infidelity > 10.0 * forced.mean_final_infidelity);
}

TEST_CASE("invalid modes, presets and output paths are rejected") {
  ExperimentConfig c = fast_forced();
  c.mode = "sideways";
  CHECK_THROWS(run_experiment(c));

  c = fast_forced();
  c.preset = "four-level";
  CHECK_THROWS(run_experiment(c));

  c = fast_forced();
  c.preset = "three-level";
  c.true_operator = "sigma_y"; // two-level operator on a three-level system
  c.true_gamma = 0.1;
  CHECK_THROWS(run_experiment(c));

  c = fast_forced();
  c.out_dir = "/proc/qtopc_not_writable";
  CHECK_THROWS(run_experiment(c));
}

TEST_CASE("campaign standard error shrinks like one over sqrt runs") {
  fs::path dir = scratch("stderr");
  std::vector<double> se;
  for (int runs : {100, 400, 1600}) {
    ExperimentConfig c = fast_forced();
    c.mode = "open-loop-baseline";
    c.true_operator = "sigma_y";
    c.true_gamma_min = 0.0;
    c.true_gamma_max = 0.25;
    c.runs = runs;
    c.write_runs = false;
    c.out_dir = (dir / std::to_string(runs)).string();
    CampaignSummary s = run_experiment(c);
    CHECK(s.stderr_final_infidelity ==
          doctest::Approx(s.stddev_final_infidelity / std::sqrt(runs)));
    se.push_back(s.stderr_final_infidelity);
  }
  CHECK(se[0] / se[1] == doctest::Approx(2.0).epsilon(0.25));
  CHECK(se[1] / se[2] == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("worker count follows the environment cap and does not change results") {
  fs::path dir = scratch("threads");
  ExperimentConfig c = fast_forced();
  c.mode = "monte-carlo";
  c.true_operator = "sigma_y";
  c.true_gamma = 0.1;
  c.runs = 8;

  setenv("QTOPC_THREADS", "1", 1);
  CHECK(worker_count() == 1);
  c.out_dir = (dir / "serial").string();
  run_experiment(c);

  setenv("QTOPC_THREADS", "4", 1);
  CHECK(worker_count() == 4);
  c.out_dir = (dir / "parallel").string();
  run_experiment(c);
  unsetenv("QTOPC_THREADS");

  CHECK(slurp(dir / "serial" / "summary.json") ==
        slurp(dir / "parallel" / "summary.json"));
}

TEST_CASE("custom presets accept explicit matrices") {
  fs::path dir = scratch("custom");
  ExperimentConfig c = fast_forced();
  c.preset = "custom";
  c.custom_dim = 2;
  c.custom_h0 = "1, 0, 0, -1";            // sigma_z
  c.custom_h_control = "0, 1, 1, 0";      // sigma_x
  c.custom_initial = "1, 0";
  c.custom_target = "0, 1";
  c.solver_params.segment_count = 20;
  c.out_dir = dir.string();
  CampaignSummary s = run_experiment(c);
  CHECK(s.mean_final_infidelity < 1e-2);

  ExperimentConfig imag = c;
  imag.custom_h0 = "0, -1i, 1i, 0"; // sigma_y drift parses complex entries
  imag.out_dir = (dir / "imag").string();
  CHECK_NOTHROW(run_experiment(imag));

  ExperimentConfig bad = c;
  bad.custom_h0 = "1, 0, 0"; // wrong entry count
  CHECK_THROWS(run_experiment(bad));
}

TEST_CASE("fixed-POVM campaigns produce bubble data with a dominant path") {
  fs::path dir = scratch("fixedpovm");
  ExperimentConfig c = fast_forced();
  c.mode = "fixed-povm";
  c.runs = 40;
  c.out_dir = dir.string();
  CampaignSummary s = run_experiment(c);

  CHECK(fs::exists(dir / "bubbles.csv"));
  std::string bubbles = slurp(dir / "bubbles.csv");
  CHECK(bubbles.rfind("time,fidelity,count", 0) == 0);

  REQUIRE(!s.path_frequency.empty());
  int best = 0, second = 0;
  for (const auto& [path, count] : s.path_frequency) {
    if (count >= best) {
      second = best;
      best = count;
    } else if (count > second) {
      second = count;
    }
  }
  CHECK(best > second);
  CHECK(s.mean_final_infidelity < 0.1);
}

TEST_CASE("reproduce rejects unknown identifiers") {
  fs::path dir = scratch("reproduce");
  CHECK_THROWS_AS(reproduce("table9", dir.string()), std::invalid_argument);
}
