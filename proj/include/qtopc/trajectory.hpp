#pragma once

#include "qtopc/evolve.hpp"

namespace qtopc {

/// Single quantum-trajectory unraveling of the Lindblad dynamics: the state
/// drifts under H_eff = H(t) - (i/2) sum_i gamma_i L_i^dag L_i and jumps with
/// per-step probability dp = sum_i gamma_i <L_i^dag L_i> dt, selecting
/// operator i with probability proportional to gamma_i <L_i^dag L_i>.
/// Throws if dp exceeds the first-order validity cap at any step.
TrajectorySample sample_trajectory(const PureState& psi0,
                                   const HamiltonianModel& model,
                                   const ControlSchedule& schedule,
                                   const DissipationChannel& channel,
                                   RngStream& rng,
                                   const IntegratorOptions& opts = {},
                                   const NumericPolicy& policy = default_policy());

/// exp(-int sum_k <L_k^dag L_k> ds) along the deterministic (no-jump) path,
/// computed by trapezoidal quadrature on the re-integrated H_eff evolution.
double no_jump_probability(const PureState& psi0, const HamiltonianModel& model,
                           const ControlSchedule& schedule,
                           const DissipationChannel& channel,
                           const IntegratorOptions& opts = {});

} // namespace qtopc
