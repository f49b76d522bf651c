#pragma once

#include "qtopc/state.hpp"

namespace qtopc {

/// Depolarizing channel p_D * I/d + (1 - p_D) * rho.
DensityMatrix apply_depolarizing(const DensityMatrix& rho, double p_d);

/// Overlap Tr(rho_{Ts|t} rho_{t+Ts}) for a pure nominal state under
/// depolarizing noise with p_D = 1 - e^{-gamma Ts}:
///   1/d + (1 - 1/d) e^{-gamma Ts}.
double depolarizing_overlap(double gamma, double ts, int d);

} // namespace qtopc
