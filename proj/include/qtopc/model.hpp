#pragma once

#include "qtopc/state.hpp"

#include <optional>
#include <vector>

namespace qtopc {

/// Bounded Hamiltonian uncertainty Delta * H'_Delta with ||H'_Delta|| = 1
/// and |Delta| <= delta_bar.
struct UncertaintySpec {
  double delta_bar = 0.0;
  Matrix direction; // H'_Delta, unit operator norm
  double delta = 0.0;
};

struct ControlChannel {
  Matrix op; // H_mu, Hermitian
  double u_max = 1.0;
};

struct HamiltonianModel {
  Matrix h0;
  std::vector<ControlChannel> controls;
  std::optional<UncertaintySpec> uncertainty;

  int dim() const { return static_cast<int>(h0.rows()); }

  /// H0 + sum_mu u_mu H_mu (+ Delta H'_Delta when include_uncertainty).
  Matrix hamiltonian(const std::vector<double>& u, bool include_uncertainty) const;

  /// Checks Hermiticity, control bounds and the uncertainty normalization;
  /// throws on violation.
  void validate(const NumericPolicy& policy = default_policy()) const;

  static HamiltonianModel two_level(); // H0 = sigma_z, Hu = u sigma_x, |u| <= 1
  static HamiltonianModel three_level(); // H0 = Jz, Hu = u Jx, |u| <= 1
};

/// Set of unit-norm Lindblad operators with rates gamma_i <= gamma_bar.
struct DissipationChannel {
  std::vector<Matrix> operators;
  std::vector<double> rates;
  double rate_bound = 0.0;

  bool empty() const { return operators.empty(); }
  std::size_t size() const { return operators.size(); }
  void validate(const NumericPolicy& policy = default_policy()) const;

  static DissipationChannel none();
  static DissipationChannel single(const Matrix& op, double gamma);
  /// Qubit depolarizing: sigma_x, sigma_y, sigma_z each at rate gamma/4,
  /// so the Bloch vector decays as e^{-gamma t} and p_D = 1 - e^{-gamma Ts}.
  static DissipationChannel depolarizing2(double gamma);
  /// Phase damping: L = sigma_z at rate gamma (L^dag L = I).
  static DissipationChannel phase_damping2(double gamma);
  /// Amplitude damping toward |0>: L = |0><1| at rate gamma.
  static DissipationChannel amplitude_damping2(double gamma);
};

/// Piecewise-constant control over ordered segments; t_f = sum of durations.
struct ControlSchedule {
  struct Segment {
    double duration = 0.0;
    std::vector<double> values; // one per control channel
  };
  std::vector<Segment> segments;

  double total_duration() const;
  bool empty() const { return segments.empty(); }
  /// Drops the leading `t` time units; partially consumed segments are split.
  ControlSchedule shifted(double t) const;
  /// Keeps only the leading `t` time units.
  ControlSchedule truncated(double t) const;
  void validate(const HamiltonianModel& model) const;

  static ControlSchedule constant(const std::vector<double>& values, double duration);
};

struct TrajectorySample {
  PureState final_state;
  std::vector<std::pair<double, int>> jumps; // (time, operator index)
  bool no_jump = true;
};

/// Draws a random unit-operator-norm Hermitian direction H'_Delta
/// (complex-normal entries, Hermitized, rescaled). Delta is delta_bar in
/// FixedWorstCase mode and uniform on [0, delta_bar] in UniformMagnitude mode.
enum class UncertaintyMode { FixedWorstCase, UniformMagnitude };
UncertaintySpec sample_uncertainty(double delta_bar, int d, RngStream& rng,
                                   UncertaintyMode mode = UncertaintyMode::FixedWorstCase);

} // namespace qtopc
