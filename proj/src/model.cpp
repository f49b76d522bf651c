#include "qtopc/model.hpp"

#include <cmath>
#include <stdexcept>

namespace qtopc {

Matrix HamiltonianModel::hamiltonian(const std::vector<double>& u,
                                     bool include_uncertainty) const {
  if (u.size() != controls.size())
    throw std::invalid_argument("control value count does not match channel count");
  Matrix h = h0;
  for (std::size_t mu = 0; mu < controls.size(); ++mu) h += u[mu] * controls[mu].op;
  if (include_uncertainty && uncertainty)
    h += uncertainty->delta * uncertainty->direction;
  return h;
}

void HamiltonianModel::validate(const NumericPolicy& policy) const {
  auto check_herm = [&](const Matrix& a, const char* what) {
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > policy.hermiticity_tol)
      throw std::invalid_argument(std::string(what) + " is not Hermitian");
  };
  check_herm(h0, "H0");
  for (const auto& c : controls) {
    check_herm(c.op, "control operator");
    if (c.u_max <= 0) throw std::invalid_argument("u_max must be positive");
  }
  if (uncertainty) {
    check_herm(uncertainty->direction, "H'_Delta");
    if (uncertainty->delta_bar > 0 &&
        std::abs(operator_norm(uncertainty->direction) - 1.0) > policy.operator_norm_tol)
      throw std::invalid_argument("H'_Delta must have unit operator norm");
    if (std::abs(uncertainty->delta) > uncertainty->delta_bar + 1e-12)
      throw std::invalid_argument("|Delta| exceeds delta_bar");
  }
}

HamiltonianModel HamiltonianModel::two_level() {
  HamiltonianModel m;
  m.h0 = ops::sigma_z();
  m.controls.push_back({ops::sigma_x(), 1.0});
  return m;
}

HamiltonianModel HamiltonianModel::three_level() {
  HamiltonianModel m;
  m.h0 = ops::jz();
  m.controls.push_back({ops::jx(), 1.0});
  return m;
}

void DissipationChannel::validate(const NumericPolicy& policy) const {
  if (operators.size() != rates.size())
    throw std::invalid_argument("operator/rate count mismatch");
  for (std::size_t i = 0; i < operators.size(); ++i) {
    if (std::abs(operator_norm(operators[i]) - 1.0) > policy.operator_norm_tol)
      throw std::invalid_argument("Lindblad operator must have unit operator norm");
    if (rates[i] < 0) throw std::invalid_argument("dissipation rate must be nonnegative");
    if (rates[i] > rate_bound + 1e-12)
      throw std::invalid_argument("dissipation rate exceeds rate_bound");
  }
}

DissipationChannel DissipationChannel::none() { return DissipationChannel{}; }

DissipationChannel DissipationChannel::single(const Matrix& op, double gamma) {
  DissipationChannel c;
  c.operators.push_back(op);
  c.rates.push_back(gamma);
  c.rate_bound = gamma;
  return c;
}

DissipationChannel DissipationChannel::depolarizing2(double gamma) {
  DissipationChannel c;
  c.operators = {ops::sigma_x(), ops::sigma_y(), ops::sigma_z()};
  c.rates = {gamma / 4, gamma / 4, gamma / 4};
  c.rate_bound = gamma;
  return c;
}

DissipationChannel DissipationChannel::phase_damping2(double gamma) {
  return single(ops::sigma_z(), gamma);
}

DissipationChannel DissipationChannel::amplitude_damping2(double gamma) {
  return single(ops::lowering2(), gamma);
}

double ControlSchedule::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration;
  return t;
}

ControlSchedule ControlSchedule::shifted(double t) const {
  ControlSchedule out;
  double skip = t;
  for (const auto& s : segments) {
    if (skip >= s.duration - 1e-15) {
      skip -= s.duration;
      continue;
    }
    Segment rest = s;
    rest.duration = s.duration - skip;
    skip = 0.0;
    out.segments.push_back(rest);
  }
  return out;
}

ControlSchedule ControlSchedule::truncated(double t) const {
  ControlSchedule out;
  double left = t;
  for (const auto& s : segments) {
    if (left <= 1e-15) break;
    Segment head = s;
    head.duration = std::min(s.duration, left);
    left -= head.duration;
    out.segments.push_back(head);
  }
  return out;
}

void ControlSchedule::validate(const HamiltonianModel& model) const {
  for (const auto& s : segments) {
    if (s.duration <= 0) throw std::invalid_argument("segment duration must be positive");
    if (s.values.size() != model.controls.size())
      throw std::invalid_argument("segment value count does not match channel count");
    for (std::size_t mu = 0; mu < s.values.size(); ++mu)
      if (std::abs(s.values[mu]) > model.controls[mu].u_max + 1e-9)
        throw std::invalid_argument("control value exceeds bound");
  }
}

ControlSchedule ControlSchedule::constant(const std::vector<double>& values,
                                          double duration) {
  ControlSchedule s;
  if (duration > 0) s.segments.push_back({duration, values});
  return s;
}

UncertaintySpec sample_uncertainty(double delta_bar, int d, RngStream& rng,
                                   UncertaintyMode mode) {
  UncertaintySpec spec;
  spec.delta_bar = delta_bar;
  if (delta_bar <= 0.0) {
    spec.direction = Matrix::Zero(d, d);
    spec.delta = 0.0;
    return spec;
  }
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = Complex(rng.normal(), rng.normal());
  Matrix h = 0.5 * (g + g.adjoint());
  spec.direction = h / operator_norm(h);
  spec.delta = (mode == UncertaintyMode::FixedWorstCase)
                   ? delta_bar
                   : delta_bar * rng.uniform();
  return spec;
}

} // namespace qtopc
