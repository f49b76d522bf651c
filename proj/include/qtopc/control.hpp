#pragma once

#include "qtopc/evolve.hpp"

#include <functional>

namespace qtopc {

struct SolverParams {
  int segment_count = 50;   // K, gradient solver
  int max_switches = 3;     // S_max, bang-bang solver
  double t_f_tol = 1e-3;    // golden-section tolerance on t_f
  double fd_step = 1e-6;    // central finite-difference step
  double armijo_c = 1e-4;
  double improve_tol = 1e-10;
  int max_iterations = 5000;
  int nm_max_evals = 300;   // per Nelder-Mead restart
  int nm_restarts = 8;      // deterministic initializations per switch count
};

/// Time-optimal control problem: minimize lambda0 * t_f + D^2(target, rho(t_f))
/// over bounded controls and free final time, on the nominal model.
struct ControlProblem {
  HamiltonianModel model;
  DissipationChannel nominal_channel; // empty -> closed nominal dynamics
  DensityMatrix initial;
  DensityMatrix target;
  double lambda0 = 0.04;
  double t_max = 10.0;
  SolverParams params;
};

struct SolveResult {
  ControlSchedule schedule;
  double cost = 0.0;
  double terminal_err = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// lambda0 * t_f + terminal_error(target, propagated final state). The
/// propagation is exact for piecewise-constant schedules (per-segment
/// unitaries when the nominal channel is empty, Liouvillian exponentials
/// otherwise).
double evaluate_cost(const ControlProblem& problem, const ControlSchedule& schedule);

/// Bang-bang search for two-level single-channel problems: over switch counts
/// s in {0..max_switches}, Nelder-Mead on (t_f, switch times) from
/// deterministic restarts (uniform spacings, both initial signs), control
/// alternating between +-u_max. An optional warm-start schedule competes as a
/// candidate and seeds the search.
SolveResult solve_bangbang_two_level(const ControlProblem& problem,
                                     const ControlSchedule* warm_start = nullptr);

struct GradientSolveOptions {
  const ControlSchedule* warm_start = nullptr;
  /// Restrict the outer t_f search to [t_lo, t_hi] (defaults to [0, t_max]).
  double t_lo = -1.0;
  double t_hi = -1.0;
  int max_iterations = -1; // override params.max_iterations when >= 0
};

/// Projected gradient descent on K piecewise-constant segment values
/// (clipping to [-u_max, u_max]), central-difference gradients, backtracking
/// Armijo line search; outer golden-section search on t_f.
SolveResult solve_gradient(const ControlProblem& problem,
                           const GradientSolveOptions& opts = {});

/// Golden-section minimization of f on [a, b] to absolute tolerance tol;
/// returns the minimizing abscissa.
double golden_section(const std::function<double(double)>& f, double a, double b,
                      double tol);

} // namespace qtopc
