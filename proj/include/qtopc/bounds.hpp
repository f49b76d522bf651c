#pragma once

#include "qtopc/state.hpp"

#include <optional>
#include <vector>

namespace qtopc {

/// eps = 2*delta_bar + gamma_bar, the per-unit-time deviation rate bounding
/// the probability of leaving the nominal state.
double epsilon_rate(double delta_bar, double gamma_bar);

/// General floor on Tr(rho_{t+Ts} rho_{Ts|t}): max(0, 1 - eps * Ts).
double success_floor_general(double delta_bar, double gamma_bar, double ts);

struct FloorResult {
  bool valid = false;   // validity precondition met
  double value = 0.0;
};

/// Time-independent-Hamiltonian floor: with
/// Gamma = ||I - e^{i H_Delta Ts}|| + (Ts^2/2) ||[H, H_Delta]||,
/// returns (1 - Gamma^2/2)^2 when Gamma < sqrt(2), invalid otherwise.
struct TimeIndependentFloor {
  double gamma_value = 0.0; // Gamma
  bool valid = false;
  double value = 0.0;
};
TimeIndependentFloor success_floor_time_independent(const Matrix& h, const Matrix& h_delta,
                                        double ts);

enum class TwoLevelKind { Closed, Depolarizing, PhaseDamping, AmplitudeDamping };

/// The depolarizing and amplitude-damping floors exist in two published
/// variants that disagree (exponent factor 4; Ts missing from the
/// trigonometric arguments). The Ts-bearing single-step forms are canonical;
/// the multi-step table forms are exposed for comparison.
enum class BoundVariant { Canonical, TableForm };

/// Two-level floors over l steps of length Ts. Validity windows:
/// l*delta_bar*Ts <= pi/2 (pi/4 for amplitude damping); outside -> invalid.
///   Closed:            cos^2(l db Ts)
///   Depolarizing:      (1/2) cos^2(l db Ts) (1 + e^{-gb l Ts})
///                      [TableForm: exponent -4 gb l Ts]
///   PhaseDamping:      cos^2(l db Ts) e^{-gb l Ts}
///   AmplitudeDamping:  cos^2(l db Ts)(1 - gb l Ts) - (1/2) sin(2 l db Ts)
///                      [TableForm: trig arguments l db, without Ts]
FloorResult success_floor_two_level(TwoLevelKind kind, double delta_bar,
                                    double gamma_bar, double ts, int l = 1,
                                    BoundVariant variant = BoundVariant::Canonical);

struct StabilityCondition {
  bool satisfied = false;
  double margin = 0.0; // rhs - lhs; sign agrees with `satisfied`
};

struct StabilityReport {
  double eps_bar = 0.0;
  StabilityCondition per_step;    // eps <= lambda0^2 Ts / 4
  StabilityCondition horizon;     // eps <= lambda0 / (2 sqrt(N))
  StabilityCondition expectation; // eps Ts + 2 sqrt(eps Ts) <= lambda0 Ts
  StabilityCondition depolarizing;              // sqrt(2 p_D (1-1/d)) <= lambda0 Ts
  StabilityCondition depolarizing_expectation;
  StabilityCondition uniform_dissipation;       // 2 sqrt(1-e^{-gb Ts}) <= lambda0 Ts
  StabilityCondition uniform_dissipation_expectation;
};

/// Evaluates every stability predicate. eps_override replaces the computed
/// eps = 2*delta_bar + gamma_bar when supplied.
StabilityReport stability_report(double delta_bar, double gamma_bar, double ts,
                                 double lambda0, int n, int d, double p_d,
                                 std::optional<double> eps_override = std::nullopt);

/// Convergence rate eta of the failure probability, by the three cases on
/// q = 1 - eps*Ts versus L/(L+1).
double convergence_rate(double eps_ts, int window_length);

/// Lower bound on the probability of reaching the target by step N:
/// 1 - eps*Ts * sum_{l=1..L} (1 - eps*Ts)^{l-1} F_{N-l}. Failure
/// probabilities are taken from `failure_seq` when given, otherwise computed
/// by the recursion with F_0 = 1; negative indices count as 1.
double target_probability_floor(double eps_ts, int n, int window_length,
                                const std::vector<double>* failure_seq = nullptr);

} // namespace qtopc
