#include "qtopc/experiments.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

using qtopc::ExperimentConfig;
using ordered_json = nlohmann::ordered_json;

namespace {

struct CommonOpts {
  std::optional<std::string> config_path;
  std::map<std::string, std::string> overrides;
};

// Every ExperimentConfig key is also a CLI flag; CLI values win over the file.
void add_config_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "key=value config file");
  static const char* keys[] = {
      "preset",          "mode",           "true.operator", "true.gamma",
      "true.gamma_min",  "true.gamma_max", "nominal.operator",
      "nominal.gamma",   "delta_bar",      "uncertainty_mode",
      "sample_nominal_gamma", "lambda0",   "ts",            "steps",
      "runs",            "seed",           "out",           "t_max",
      "write_runs",      "stop_at_final_period",
      "solver.segment_count", "solver.max_switches",
      "solver.t_f_tol",  "solver.max_iterations", "solver.nm_max_evals",
      "solver.nm_restarts", "solver.in_loop_max_iterations"};
  for (const char* key : keys) {
    std::string flag = "--" + std::string(key);
    for (auto& ch : flag)
      if (ch == '.' || ch == '_') ch = '-';
    cmd->add_option_function<std::string>(
        flag, [&opts, key](const std::string& v) { opts.overrides[key] = v; },
        std::string("config key ") + key);
  }
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
  std::map<std::string, std::string> kv;
  if (opts.config_path) kv = qtopc::parse_config_file(*opts.config_path);
  for (const auto& [k, v] : opts.overrides) kv[k] = v;
  return ExperimentConfig::from_kv(kv);
}

int run_campaign(const CommonOpts& opts, const char* forced_mode) {
  ExperimentConfig cfg = resolve_config(opts);
  if (forced_mode && !opts.overrides.count("mode")) cfg.mode = forced_mode;
  qtopc::CampaignSummary sum = qtopc::run_experiment(cfg);
  std::cout << "runs=" << sum.runs
            << " mean_final_infidelity=" << sum.mean_final_infidelity
            << " stderr=" << sum.stderr_final_infidelity << "\n"
            << "summary: " << cfg.out_dir << "/summary.json\n";
  return 0;
}

int run_bounds(double delta_bar, double gamma_bar, double ts, double lambda0,
               int n, int d, int l, const std::string& out_path) {
  ordered_json j;
  j["epsilon"] = qtopc::epsilon_rate(delta_bar, gamma_bar);
  j["general_floor"] = qtopc::success_floor_general(delta_bar, gamma_bar, ts);

  auto put_floor = [](const qtopc::FloorResult& f) {
    ordered_json o;
    o["valid"] = f.valid;
    if (f.valid) o["value"] = f.value;
    return o;
  };
  using qtopc::BoundVariant;
  using qtopc::TwoLevelKind;
  ordered_json two;
  two["closed"] = put_floor(qtopc::success_floor_two_level(
      TwoLevelKind::Closed, delta_bar, gamma_bar, ts, l));
  two["depolarizing"] = put_floor(qtopc::success_floor_two_level(
      TwoLevelKind::Depolarizing, delta_bar, gamma_bar, ts, l));
  two["depolarizing_table_form"] = put_floor(qtopc::success_floor_two_level(
      TwoLevelKind::Depolarizing, delta_bar, gamma_bar, ts, l, BoundVariant::TableForm));
  two["phase_damping"] = put_floor(qtopc::success_floor_two_level(
      TwoLevelKind::PhaseDamping, delta_bar, gamma_bar, ts, l));
  two["amplitude_damping"] = put_floor(qtopc::success_floor_two_level(
      TwoLevelKind::AmplitudeDamping, delta_bar, gamma_bar, ts, l));
  two["amplitude_damping_table_form"] = put_floor(qtopc::success_floor_two_level(
      TwoLevelKind::AmplitudeDamping, delta_bar, gamma_bar, ts, l, BoundVariant::TableForm));
  j["two_level_floors"] = two;

  double p_d = 1.0 - std::exp(-gamma_bar * ts);
  qtopc::StabilityReport rep =
      qtopc::stability_report(delta_bar, gamma_bar, ts, lambda0, n, d, p_d);
  auto put_cond = [](const qtopc::StabilityCondition& c) {
    return ordered_json{{"satisfied", c.satisfied}, {"margin", c.margin}};
  };
  ordered_json st;
  st["eps_bar"] = rep.eps_bar;
  st["per_step"] = put_cond(rep.per_step);
  st["horizon"] = put_cond(rep.horizon);
  st["expectation"] = put_cond(rep.expectation);
  st["depolarizing"] = put_cond(rep.depolarizing);
  st["depolarizing_expectation"] = put_cond(rep.depolarizing_expectation);
  st["uniform_dissipation"] = put_cond(rep.uniform_dissipation);
  st["uniform_dissipation_expectation"] = put_cond(rep.uniform_dissipation_expectation);
  j["stability"] = st;

  double eps_ts = qtopc::epsilon_rate(delta_bar, gamma_bar) * ts;
  if (eps_ts <= 1.0) {
    j["convergence_rate"] = qtopc::convergence_rate(eps_ts, l);
    j["target_probability_floor"] = qtopc::target_probability_floor(eps_ts, n, l);
  }

  std::string text = j.dump(2);
  if (out_path.empty()) {
    std::cout << text << "\n";
  } else {
    std::filesystem::path p(out_path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text << "\n";
    std::cout << "wrote " << out_path << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"q-TOPC simulation and verification toolkit"};
  app.require_subcommand(1);

  CommonOpts sim_opts, qtopc_opts, mc_opts;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "open-loop evolution of a preset under the true dynamics");
  add_config_flags(simulate, sim_opts);

  CLI::App* loop = app.add_subcommand(
      "qtopc", "measurement-feedback runs (forced-nominal by default)");
  add_config_flags(loop, qtopc_opts);

  CLI::App* mc = app.add_subcommand(
      "montecarlo", "Monte-Carlo campaign (monte-carlo mode by default)");
  add_config_flags(mc, mc_opts);

  CLI::App* bounds = app.add_subcommand(
      "bounds", "evaluate the analytic floors and stability predicates");
  double b_delta = 0.0, b_gamma = 0.0, b_ts = 1.0, b_lambda0 = 0.04;
  int b_n = 20, b_d = 2, b_l = 1;
  std::string b_out;
  bounds->add_option("--delta-bar", b_delta, "Hamiltonian uncertainty bound");
  bounds->add_option("--gamma-bar", b_gamma, "dissipation rate bound");
  bounds->add_option("--ts", b_ts, "measurement period");
  bounds->add_option("--lambda0", b_lambda0, "time weight in the cost");
  bounds->add_option("--n", b_n, "horizon length N");
  bounds->add_option("--d", b_d, "Hilbert-space dimension");
  bounds->add_option("--l", b_l, "step count / window length L");
  bounds->add_option("--out", b_out, "write JSON here instead of stdout");

  CLI::App* rep = app.add_subcommand(
      "reproduce", "rebuild a table or figure and compare against thresholds");
  std::string rep_id, rep_out = "out";
  std::uint64_t rep_seed = 12345;
  rep->add_option("identifier", rep_id, "table2|table3|fig2|fig3|fig4|fig5|fig6")
      ->required();
  rep->add_option("--out", rep_out, "output directory");
  rep->add_option("--seed", rep_seed, "master seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_campaign(sim_opts, "open-loop-baseline");
    if (loop->parsed()) return run_campaign(qtopc_opts, "forced-nominal");
    if (mc->parsed()) return run_campaign(mc_opts, "monte-carlo");
    if (bounds->parsed())
      return run_bounds(b_delta, b_gamma, b_ts, b_lambda0, b_n, b_d, b_l, b_out);
    if (rep->parsed()) {
      qtopc::ReproduceReport report = qtopc::reproduce(rep_id, rep_out, rep_seed);
      std::cout << report.report_json << "\n";
      return report.pass ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
