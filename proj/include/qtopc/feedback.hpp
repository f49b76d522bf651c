#pragma once

#include "qtopc/control.hpp"
#include "qtopc/povm.hpp"
#include "qtopc/trajectory.hpp"

#include <string>

namespace qtopc {

enum class SolverChoice { BangBangTwoLevel, Gradient };
enum class MeasurementMode { Sampled, ForcedNominal };

/// Configuration for one q-TOPC run. The OCP inside `problem` is solved on
/// the nominal model; the true dynamics add `true_channel` and
/// `true_uncertainty` on top of the same Hamiltonian.
struct FeedbackConfig {
  ControlProblem problem;
  DissipationChannel true_channel;
  std::optional<UncertaintySpec> true_uncertainty;
  double ts = 1.0;
  int max_steps = 20;
  std::uint64_t seed = 0;
  SolverChoice solver = SolverChoice::BangBangTwoLevel;
  MeasurementMode measurement = MeasurementMode::Sampled;
  IntegratorOptions integrator;
  int in_loop_max_iterations = 200; // gradient-solver cap for warm re-solves
  /// true: the run ends after the first period with t* < Ts (single-transfer
  /// mode). false: keep re-solving and measuring for max_steps steps, each
  /// with period min(Ts, t*), as in the Monte-Carlo campaigns.
  bool stop_at_final_period = true;
};

struct RunRecord {
  struct Step {
    int index = 0;
    double time = 0.0;    // wall time at the end of the step
    double cost = 0.0;    // J from the solve at the start of the step
    double fidelity = 0.0;
    int outcome = 0;
    double t_star = 0.0;  // optimal final time returned by the solver
    PureState pre_state;  // state the solve started from
    ControlSchedule schedule; // full schedule returned by the solve
  };
  std::vector<Step> steps;
  DensityMatrix final_state;
  double final_fidelity = 0.0;
  double final_infidelity = 1.0;
  std::string termination; // optimal-time-below-ts | max-steps | solver-failure
};

/// Algorithm loop: re-solve the OCP from the current pure state, apply the
/// first Ts of the schedule to the true dynamics, measure with the POVM built
/// from the nominal prediction, project to the nearest pure state, repeat.
/// When the optimal time drops below Ts, that time is taken as the final
/// measurement period: the truncated schedule is applied and a final
/// measurement closes the run.
/// `initial_solve`, when given, is reused as the step-1 solve (it must match
/// the configured problem).
RunRecord run_qtopc(const FeedbackConfig& config,
                    const SolveResult* initial_solve = nullptr);

/// run_qtopc with the measurement outcome pinned to the nominal effect.
RunRecord forced_outcome_mode(const FeedbackConfig& config,
                              const SolveResult* initial_solve = nullptr);

/// Fixed-POVM variant: at each step the measurement period is chosen from the
/// grid {0.1, ..., 2.0} * Ts and the (basis, rank-1 effect) pair maximizing
/// the overlap with the nominal prediction, restricted to effects strictly
/// closer to the target than the current state (all effects once none
/// improves); measurement then proceeds with that basis.
RunRecord run_qtopc_fixed_povm(const FeedbackConfig& config,
                               const std::vector<Povm>& bases,
                               const SolveResult* initial_solve = nullptr);

/// The two fixed POVM bases used by the fixed-POVM strategy: the
/// computational basis and the tilted basis with amplitudes
/// (sqrt(3)/2, 1/2) and (1/2, -sqrt(3)/2).
std::vector<Povm> fixed_povm_bases_two_level();

} // namespace qtopc
