#pragma once

#include "qtopc/bounds.hpp"
#include "qtopc/feedback.hpp"

#include <map>
#include <string>

namespace qtopc {

/// Campaign configuration. Presets expand to the reference systems: the
/// two-level H0 = sigma_z, Hu = u sigma_x, |0> -> |1> transfer, and the
/// three-level H0 = Jz, Hu = u Jx, diag(1,0,0) -> diag(0,0,1) transfer.
struct ExperimentConfig {
  std::string preset = "two-level";    // two-level | three-level | custom
  std::string mode = "forced-nominal"; // open-loop-baseline | forced-nominal |
                                       // monte-carlo | fixed-povm
  std::string true_operator = "none";
  double true_gamma = 0.0;
  double true_gamma_min = -1.0; // sample gamma uniformly from
  double true_gamma_max = -1.0; // [min, max] per run when both >= 0
  std::string nominal_operator = "none";
  double nominal_gamma = 0.0;
  double delta_bar = 0.0;
  std::string uncertainty_mode = "fixed"; // fixed | uniform
  bool sample_nominal_gamma = false; // sample the nominal rate instead of the true one
  double lambda0 = 0.04;
  double ts = 1.0;
  int steps = 20;
  int runs = 1;
  std::uint64_t seed = 12345;
  std::string out_dir = "out";
  double t_max = 10.0;
  bool write_runs = true;
  /// monte-carlo / fixed-povm: end each realization once the optimal time
  /// drops below Ts (true), or keep measuring for the full `steps` budget.
  bool stop_at_final_period = true;
  SolverParams solver_params;
  int in_loop_max_iterations = 200;

  // custom preset only: dimension and row-major "re,im" entry lists
  int custom_dim = 0;
  std::string custom_h0, custom_h_control, custom_initial, custom_target;

  static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);
  std::map<std::string, std::string> to_kv() const;
};

/// Flat INI-style key=value file; [section] headers prefix keys with
/// "section.". Lines starting with '#' or ';' are comments.
std::map<std::string, std::string> parse_config_file(const std::string& path);

struct CampaignSummary {
  int runs = 0;
  double mean_final_infidelity = 0.0;
  double stddev_final_infidelity = 0.0;
  double stderr_final_infidelity = 0.0;
  std::vector<double> mean_cost_series;     // per step
  std::vector<double> mean_fidelity_series; // per step
  std::map<std::string, int> path_frequency; // fixed-povm mode
  int nominal_outcome_steps = 0;
  int total_steps = 0;
  int floor_violation_runs = 0; // runs breaching the analytic success floor
  std::string to_json() const;
};

/// Executes the configured campaign, writes per-run CSV records and the
/// summary JSON into out_dir, and returns the summary. Deterministic given
/// the master seed.
CampaignSummary run_experiment(const ExperimentConfig& config);

struct ReproduceReport {
  bool pass = true;
  std::string report_json;
};

/// identifier in {table2, table3, fig2, fig3, fig4, fig5, fig6}: runs the
/// corresponding preset campaign, writes its data files plus a comparison
/// report against the stored acceptance thresholds.
ReproduceReport reproduce(const std::string& identifier, const std::string& out_dir,
                          std::uint64_t seed = 12345);

/// Worker-pool width: QTOPC_THREADS when set, hardware concurrency otherwise.
int worker_count();

} // namespace qtopc
