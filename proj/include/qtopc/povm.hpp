#pragma once

#include "qtopc/metrics.hpp"

#include <vector>

namespace qtopc {

/// POVM: positive-semidefinite effects summing to the identity.
struct Povm {
  std::vector<Matrix> effects;

  int dim() const { return effects.empty() ? 0 : static_cast<int>(effects[0].rows()); }
  void validate(const NumericPolicy& policy = default_policy()) const;

  /// Computational basis measurement {|0><0|, ..., |d-1><d-1|}.
  static Povm computational(int d);
  static Povm fromEffects(std::vector<Matrix> effects);
};

/// {|psi><psi|, I - |psi><psi|}.
Povm build_step_povm(const PureState& nominal);

struct MeasurementResult {
  int outcome = 0;
  DensityMatrix post_state;
  double probability = 0.0;
};

/// Born-rule sampling: outcome i fires with probability Tr(E_i rho); the post
/// state is sqrt(E_i) rho sqrt(E_i) / Tr(E_i rho) (Lueders rule), which for a
/// rank-1 effect |psi><psi| is exactly |psi><psi|.
MeasurementResult measure(const DensityMatrix& rho, const Povm& povm, RngStream& rng);

/// Deterministic variant: pins the outcome to `forced_outcome`.
MeasurementResult measure_forced(const DensityMatrix& rho, const Povm& povm,
                                 int forced_outcome);

} // namespace qtopc
