#include "qtopc/feedback.hpp"

#include <cmath>
#include <stdexcept>

namespace qtopc {

namespace {

HamiltonianModel true_model(const FeedbackConfig& config) {
  HamiltonianModel m = config.problem.model;
  m.uncertainty = config.true_uncertainty;
  return m;
}

SolveResult solve_step(const FeedbackConfig& config, const DensityMatrix& state,
                       const ControlSchedule* warm, bool in_loop,
                       double t_center) {
  ControlProblem p = config.problem;
  p.initial = state;
  if (config.solver == SolverChoice::BangBangTwoLevel)
    return solve_bangbang_two_level(p, warm);
  GradientSolveOptions opts;
  opts.warm_start = warm;
  if (in_loop) {
    opts.t_lo = std::max(0.0, t_center - 0.75);
    opts.t_hi = std::min(p.t_max, t_center + 0.75);
    opts.max_iterations = config.in_loop_max_iterations;
  }
  SolveResult result = solve_gradient(p, opts);
  // A measurement can throw the state far outside the bracket (e.g. a failed
  // outcome near the target); a cost worse than a worst-case full transfer
  // flags that, and the solve is redone over the full time range.
  if (in_loop && result.cost > p.lambda0 * p.t_max) {
    GradientSolveOptions full;
    full.warm_start = warm;
    result = solve_gradient(p, full);
  }
  return result;
}

DensityMatrix apply_true_dynamics(const FeedbackConfig& config,
                                  const DensityMatrix& rho,
                                  const ControlSchedule& schedule) {
  if (schedule.empty()) return rho;
  return evolve_master(rho, true_model(config), schedule, config.true_channel,
                       config.true_uncertainty.has_value(), config.integrator);
}

RunRecord run_loop(const FeedbackConfig& config, const SolveResult* initial_solve,
                   MeasurementMode mode) {
  RunRecord record;
  RngStream rng(config.seed);
  PureState psi = nearest_pure_state(config.problem.initial);
  ControlSchedule prev;
  bool have_prev = false;
  double t_center = 0.0; // expected remaining time, brackets in-loop solves
  double t_wall = 0.0;

  for (int k = 0; k < config.max_steps; ++k) {
    SolveResult solve;
    try {
      if (k == 0 && initial_solve) {
        solve = *initial_solve;
      } else {
        ControlSchedule warm = have_prev ? prev.shifted(config.ts) : ControlSchedule{};
        solve = solve_step(config, DensityMatrix::fromPure(psi),
                           have_prev ? &warm : nullptr, k > 0, t_center);
      }
    } catch (const std::exception&) {
      record.termination = "solver-failure";
      record.final_state = DensityMatrix::fromPure(psi);
      record.final_fidelity = overlap(config.problem.target, record.final_state);
      record.final_infidelity = 1.0 - record.final_fidelity;
      return record;
    }

    PureState pre_state = psi;
    double t_star = solve.schedule.total_duration();
    bool final_period = t_star < config.ts;
    ControlSchedule applied =
        final_period ? solve.schedule : solve.schedule.truncated(config.ts);
    double period = final_period ? t_star : config.ts;

    DensityMatrix true_rho =
        apply_true_dynamics(config, DensityMatrix::fromPure(psi), applied);
    PureState prediction = evolve_nominal(psi, config.problem.model, applied);
    Povm povm = build_step_povm(prediction);
    MeasurementResult meas = mode == MeasurementMode::ForcedNominal
                                 ? measure_forced(true_rho, povm, 0)
                                 : measure(true_rho, povm, rng);
    psi = nearest_pure_state(meas.post_state);
    t_wall += period;

    RunRecord::Step step;
    step.index = k;
    step.time = t_wall;
    step.cost = solve.cost;
    step.fidelity = overlap(config.problem.target, DensityMatrix::fromPure(psi));
    step.outcome = meas.outcome;
    step.t_star = t_star;
    step.pre_state = pre_state;
    step.schedule = solve.schedule;
    record.steps.push_back(step);

    if (final_period && config.stop_at_final_period) {
      record.termination = "optimal-time-below-ts";
      record.final_state = DensityMatrix::fromPure(psi);
      record.final_fidelity = step.fidelity;
      record.final_infidelity = 1.0 - step.fidelity;
      return record;
    }
    prev = solve.schedule;
    have_prev = !final_period; // a fully consumed schedule cannot warm-start
    t_center = std::max(0.0, t_star - period);
  }

  record.termination = "max-steps";
  record.final_state = DensityMatrix::fromPure(psi);
  record.final_fidelity = overlap(config.problem.target, record.final_state);
  record.final_infidelity = 1.0 - record.final_fidelity;
  return record;
}

} // namespace

RunRecord run_qtopc(const FeedbackConfig& config, const SolveResult* initial_solve) {
  return run_loop(config, initial_solve, config.measurement);
}

RunRecord forced_outcome_mode(const FeedbackConfig& config,
                              const SolveResult* initial_solve) {
  return run_loop(config, initial_solve, MeasurementMode::ForcedNominal);
}

std::vector<Povm> fixed_povm_bases_two_level() {
  Povm m1 = Povm::computational(2);
  Vector e1(2), e2(2);
  e1 << std::sqrt(3.0) / 2.0, 0.5;
  e2 << 0.5, -std::sqrt(3.0) / 2.0;
  Povm m2{{e1 * e1.adjoint(), e2 * e2.adjoint()}};
  return {m1, m2};
}

RunRecord run_qtopc_fixed_povm(const FeedbackConfig& config,
                               const std::vector<Povm>& bases,
                               const SolveResult* initial_solve) {
  if (bases.empty())
    throw std::invalid_argument("run_qtopc_fixed_povm: at least one basis required");
  if (!config.problem.nominal_channel.empty())
    throw std::invalid_argument(
        "run_qtopc_fixed_povm: nominal model must be dissipation-free");

  RunRecord record;
  RngStream rng(config.seed);
  PureState psi = nearest_pure_state(config.problem.initial);
  ControlSchedule prev;
  bool have_prev = false;
  double prev_period = 0.0;
  double t_center = 0.0;
  double t_wall = 0.0;

  for (int k = 0; k < config.max_steps; ++k) {
    SolveResult solve;
    try {
      if (k == 0 && initial_solve) {
        solve = *initial_solve;
      } else {
        ControlSchedule warm = have_prev ? prev.shifted(prev_period) : ControlSchedule{};
        solve = solve_step(config, DensityMatrix::fromPure(psi),
                           have_prev ? &warm : nullptr, k > 0, t_center);
      }
    } catch (const std::exception&) {
      record.termination = "solver-failure";
      break;
    }
    PureState pre_state = psi;
    double t_star = solve.schedule.total_duration();

    // Candidate measurement periods from the grid, capped by t_star.
    std::vector<double> periods;
    for (int j = 1; j <= 20; ++j) {
      double ts_c = 0.1 * j * config.ts;
      if (ts_c < t_star) periods.push_back(ts_c);
    }
    bool final_period = periods.empty();
    if (final_period) periods.push_back(t_star);

    // Candidate effects are the rank-1 projectors of the fixed bases. Only
    // effects strictly closer to the target than the current state are
    // considered (otherwise short periods Zeno-pin the state in place); once
    // no effect improves, every effect competes and the best-aligned one
    // keeps the state where it is.
    PureState target_pure = nearest_pure_state(config.problem.target);
    double current_fid = std::norm(target_pure.amplitudes.dot(psi.amplitudes));
    struct Candidate {
      std::size_t basis;
      int effect;
      Vector state;
      double target_fid;
    };
    std::vector<Candidate> all, improving;
    for (std::size_t b = 0; b < bases.size(); ++b) {
      for (std::size_t ei = 0; ei < bases[b].effects.size(); ++ei) {
        const Matrix& effect = bases[b].effects[ei];
        Eigen::SelfAdjointEigenSolver<Matrix> es(effect);
        int rank = 0;
        for (int i = 0; i < effect.rows(); ++i)
          if (es.eigenvalues()(i) > 1e-12) ++rank;
        if (rank != 1) continue;
        Candidate c{b, static_cast<int>(ei), es.eigenvectors().col(effect.rows() - 1),
                    0.0};
        c.target_fid = std::norm(target_pure.amplitudes.dot(c.state));
        all.push_back(c);
        if (c.target_fid > current_fid + 1e-9) improving.push_back(c);
      }
    }
    const std::vector<Candidate>& pool = improving.empty() ? all : improving;

    double best_score = -1.0;
    double best_ts = periods.front();
    std::size_t best_basis = 0;
    int best_effect = 0;
    for (double ts_c : periods) {
      PureState pred =
          evolve_nominal(psi, config.problem.model, solve.schedule.truncated(ts_c));
      for (const Candidate& c : pool) {
        double score = std::norm(c.state.dot(pred.amplitudes));
        if (score > best_score) {
          best_score = score;
          best_ts = ts_c;
          best_basis = c.basis;
          best_effect = c.effect;
        }
      }
    }

    ControlSchedule applied = solve.schedule.truncated(best_ts);
    DensityMatrix true_rho =
        apply_true_dynamics(config, DensityMatrix::fromPure(psi), applied);
    MeasurementResult meas = config.measurement == MeasurementMode::ForcedNominal
                                 ? measure_forced(true_rho, bases[best_basis], best_effect)
                                 : measure(true_rho, bases[best_basis], rng);
    psi = nearest_pure_state(meas.post_state);
    t_wall += best_ts;

    RunRecord::Step step;
    step.index = k;
    step.time = t_wall;
    step.cost = solve.cost;
    step.fidelity = overlap(config.problem.target, DensityMatrix::fromPure(psi));
    step.outcome = meas.outcome;
    step.t_star = t_star;
    step.pre_state = pre_state;
    step.schedule = solve.schedule;
    record.steps.push_back(step);

    bool consumed = final_period || t_star - best_ts < 1e-9;
    if (consumed && config.stop_at_final_period) {
      record.termination = "optimal-time-below-ts";
      break;
    }
    prev = solve.schedule;
    have_prev = !consumed;
    prev_period = best_ts;
    t_center = std::max(0.0, t_star - best_ts);
  }
  if (record.termination.empty()) record.termination = "max-steps";
  record.final_state = DensityMatrix::fromPure(psi);
  record.final_fidelity = overlap(config.problem.target, record.final_state);
  record.final_infidelity = 1.0 - record.final_fidelity;
  return record;
}

} // namespace qtopc
