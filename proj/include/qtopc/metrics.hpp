#pragma once

#include "qtopc/state.hpp"

namespace qtopc {

/// Trace distance D(a,b) = (1/2) Tr|a - b|.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

/// Tr(a b), real up to numerical residue. For pure b this is the squared
/// fidelity <psi|a|psi>.
double overlap(const DensityMatrix& a, const DensityMatrix& b);

/// Terminal error D^2(target, final); reduces to the infidelity
/// 1 - |<psi_f|psi_tar>|^2 for pure pairs.
double terminal_error(const DensityMatrix& target, const DensityMatrix& final_state);

/// Eigenvector of the largest eigenvalue of rho, the pure state maximizing
/// <psi|rho|psi>. Degenerate top eigenvalues are resolved toward the
/// computational basis state of smallest index; global phase is fixed so the
/// first nonzero amplitude is real-positive.
PureState nearest_pure_state(const DensityMatrix& rho,
                             const NumericPolicy& policy = default_policy());

} // namespace qtopc
