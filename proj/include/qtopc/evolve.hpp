#pragma once

#include "qtopc/metrics.hpp"
#include "qtopc/model.hpp"

namespace qtopc {

/// exp(-i H t) for Hermitian H, via eigendecomposition (exactly unitary up
/// to roundoff).
Matrix unitary_of(const Matrix& h, double t);

/// Right-hand side of the Lindblad equation,
///   -i[H, rho] + sum_i gamma_i (L_i rho L_i^dag - (1/2){L_i^dag L_i, rho}).
Matrix lindblad_rhs(const DensityMatrix& rho, const Matrix& h_total,
                    const DissipationChannel& channel);

struct IntegratorOptions {
  /// Steps per unit time; the per-segment step is adjusted to the nearest
  /// divisor of the segment duration. Default matches h = Ts/1000 at Ts = 1.
  double steps_per_unit_time = 1000.0;
};

/// Classical RK4 integration of the Lindblad equation under the
/// piecewise-constant schedule, with per-step trace renormalization.
/// H(t) = H0 + sum u_mu(t) H_mu (+ Delta H'_Delta when include_uncertainty).
DensityMatrix evolve_master(const DensityMatrix& rho0, const HamiltonianModel& model,
                            const ControlSchedule& schedule,
                            const DissipationChannel& channel,
                            bool include_uncertainty,
                            const IntegratorOptions& opts = {},
                            const NumericPolicy& policy = default_policy());

/// Same map evaluated exactly: per segment, the matrix exponential of the
/// d^2 x d^2 Liouvillian applied to vec(rho). Used by the solvers, where the
/// RK4 path would dominate the runtime. Agrees with evolve_master to well
/// below the integration tolerances.
DensityMatrix evolve_master_exact(const DensityMatrix& rho0,
                                  const HamiltonianModel& model,
                                  const ControlSchedule& schedule,
                                  const DissipationChannel& channel,
                                  bool include_uncertainty);

/// Liouvillian exponential map for one segment (columns act on vec(rho)).
Matrix segment_propagator(const HamiltonianModel& model,
                          const std::vector<double>& u, double duration,
                          const DissipationChannel& channel,
                          bool include_uncertainty);

/// Closed-system evolution of a pure state: per-segment exp(-i H dt).
PureState evolve_nominal(const PureState& psi0, const HamiltonianModel& model,
                         const ControlSchedule& schedule);

} // namespace qtopc
