#include "qtopc/bounds.hpp"

#include "qtopc/evolve.hpp"

#include <cmath>
#include <stdexcept>

namespace qtopc {

double epsilon_rate(double delta_bar, double gamma_bar) {
  return 2.0 * delta_bar + gamma_bar;
}

double success_floor_general(double delta_bar, double gamma_bar, double ts) {
  if (delta_bar < 0 || gamma_bar < 0 || ts < 0)
    throw std::invalid_argument("success_floor_general: negative input");
  return std::max(0.0, 1.0 - epsilon_rate(delta_bar, gamma_bar) * ts);
}

TimeIndependentFloor success_floor_time_independent(const Matrix& h, const Matrix& h_delta,
                                        double ts) {
  TimeIndependentFloor out;
  Matrix expm_delta = unitary_of(h_delta, -ts); // e^{+i H_Delta Ts}
  Matrix commutator = h * h_delta - h_delta * h;
  int d = static_cast<int>(h.rows());
  out.gamma_value = operator_norm(Matrix::Identity(d, d) - expm_delta) +
                    0.5 * ts * ts * operator_norm(commutator);
  out.valid = out.gamma_value < std::sqrt(2.0);
  if (out.valid) {
    double t = 1.0 - 0.5 * out.gamma_value * out.gamma_value;
    out.value = t * t;
  }
  return out;
}

FloorResult success_floor_two_level(TwoLevelKind kind, double delta_bar,
                                    double gamma_bar, double ts, int l,
                                    BoundVariant variant) {
  if (delta_bar < 0 || gamma_bar < 0 || ts < 0 || l < 1)
    throw std::invalid_argument("success_floor_two_level: bad parameters");
  double phase = l * delta_bar * ts;
  double window = kind == TwoLevelKind::AmplitudeDamping ? M_PI / 4 : M_PI / 2;
  FloorResult out;
  if (phase > window + 1e-15) return out; // invalid
  out.valid = true;
  double c2 = std::cos(phase) * std::cos(phase);
  switch (kind) {
    case TwoLevelKind::Closed:
      out.value = c2;
      break;
    case TwoLevelKind::Depolarizing: {
      double expo = (variant == BoundVariant::TableForm ? 4.0 : 1.0) *
                    gamma_bar * l * ts;
      out.value = 0.5 * c2 * (1.0 + std::exp(-expo));
      break;
    }
    case TwoLevelKind::PhaseDamping:
      out.value = c2 * std::exp(-gamma_bar * l * ts);
      break;
    case TwoLevelKind::AmplitudeDamping: {
      double arg = variant == BoundVariant::TableForm ? l * delta_bar : phase;
      double cc = std::cos(arg) * std::cos(arg);
      out.value = cc * (1.0 - gamma_bar * l * ts) - 0.5 * std::sin(2.0 * arg);
      break;
    }
  }
  return out;
}

namespace {
StabilityCondition condition(double lhs, double rhs) {
  return {lhs <= rhs, rhs - lhs};
}
} // namespace

StabilityReport stability_report(double delta_bar, double gamma_bar, double ts,
                                 double lambda0, int n, int d, double p_d,
                                 std::optional<double> eps_override) {
  if (delta_bar < 0 || gamma_bar < 0 || ts < 0 || lambda0 < 0 || n < 1 || d < 2)
    throw std::invalid_argument("stability_report: bad parameters");
  StabilityReport r;
  r.eps_bar = eps_override.value_or(epsilon_rate(delta_bar, gamma_bar));
  double eps = r.eps_bar;
  r.per_step = condition(eps, lambda0 * lambda0 * ts / 4.0);
  r.horizon = condition(eps, lambda0 / (2.0 * std::sqrt(static_cast<double>(n))));
  r.expectation = condition(eps * ts + 2.0 * std::sqrt(eps * ts), lambda0 * ts);
  double frac = 1.0 - 1.0 / static_cast<double>(d);
  double depol = std::sqrt(2.0 * p_d * frac);
  r.depolarizing = condition(depol, lambda0 * ts);
  r.depolarizing_expectation = condition(depol + frac * p_d, lambda0 * ts);
  double pd_uniform = 1.0 - std::exp(-gamma_bar * ts);
  double ud = 2.0 * std::sqrt(pd_uniform);
  r.uniform_dissipation = condition(ud, lambda0 * ts);
  r.uniform_dissipation_expectation = condition(ud + pd_uniform, lambda0 * ts);
  return r;
}

double convergence_rate(double eps_ts, int window_length) {
  if (eps_ts < 0.0 || eps_ts > 1.0)
    throw std::invalid_argument("convergence_rate: eps*Ts must lie in [0,1]");
  if (window_length < 1)
    throw std::invalid_argument("convergence_rate: window length must be >= 1");
  double q = 1.0 - eps_ts;
  double l = static_cast<double>(window_length);
  double boundary = l / (l + 1.0);
  if (std::abs(q - boundary) <= 1e-12) return q;
  double second = 2.0 * l / (l + 1.0) - q;
  if (q < boundary) {
    double alpha = eps_ts * std::pow(q, l);
    return std::min(1.0 - alpha, second);
  }
  return second;
}

double target_probability_floor(double eps_ts, int n, int window_length,
                                const std::vector<double>* failure_seq) {
  if (eps_ts < 0.0 || eps_ts > 1.0)
    throw std::invalid_argument("target_probability_floor: eps*Ts must lie in [0,1]");
  if (window_length < 1 || n < 0)
    throw std::invalid_argument("target_probability_floor: bad parameters");

  auto f_at = [&](const std::vector<double>& f, long idx) {
    if (idx < 0) return 1.0;
    return f[static_cast<std::size_t>(idx)];
  };

  std::vector<double> f;
  if (failure_seq) {
    f = *failure_seq;
  } else {
    // F_0 = 1; F_k from the same window recursion.
    f.resize(static_cast<std::size_t>(n) + 1, 1.0);
    for (long k = 1; k <= n; ++k) {
      double sum = 0.0;
      for (int l = 1; l <= window_length; ++l)
        sum += std::pow(1.0 - eps_ts, l - 1) * f_at(f, k - l);
      f[static_cast<std::size_t>(k)] = std::min(1.0, eps_ts * sum);
    }
  }

  double sum = 0.0;
  for (int l = 1; l <= window_length; ++l)
    sum += std::pow(1.0 - eps_ts, l - 1) * f_at(f, static_cast<long>(n) - l);
  return 1.0 - eps_ts * sum;
}

} // namespace qtopc
