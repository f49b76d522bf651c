#include "qtopc/trajectory.hpp"

#include <cmath>
#include <stdexcept>

namespace qtopc {

namespace {

Matrix effective_hamiltonian(const Matrix& h, const DissipationChannel& channel) {
  Matrix heff = h;
  for (std::size_t i = 0; i < channel.size(); ++i)
    heff -= Complex(0, 0.5) * channel.rates[i] *
            (channel.operators[i].adjoint() * channel.operators[i]);
  return heff;
}

// One RK4 step of dpsi/dt = -i H_eff psi, renormalized.
Vector drift_step(const Vector& psi, const Matrix& heff, double dt) {
  Complex mi(0, -1);
  Vector k1 = mi * (heff * psi);
  Vector k2 = mi * (heff * (psi + 0.5 * dt * k1));
  Vector k3 = mi * (heff * (psi + 0.5 * dt * k2));
  Vector k4 = mi * (heff * (psi + dt * k3));
  Vector out = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return out / out.norm();
}

} // namespace

TrajectorySample sample_trajectory(const PureState& psi0, const HamiltonianModel& model,
                                   const ControlSchedule& schedule,
                                   const DissipationChannel& channel, RngStream& rng,
                                   const IntegratorOptions& opts,
                                   const NumericPolicy& policy) {
  TrajectorySample sample;
  Vector psi = psi0.amplitudes / psi0.amplitudes.norm();
  std::vector<Matrix> ldl(channel.size());
  for (std::size_t i = 0; i < channel.size(); ++i)
    ldl[i] = channel.operators[i].adjoint() * channel.operators[i];

  double t = 0.0;
  for (const auto& seg : schedule.segments) {
    Matrix h = model.hamiltonian(seg.values, model.uncertainty.has_value());
    Matrix heff = effective_hamiltonian(h, channel);
    long n = std::max<long>(1, std::lround(seg.duration * opts.steps_per_unit_time));
    double dt = seg.duration / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      std::vector<double> weights(channel.size());
      double dp = 0.0;
      for (std::size_t i = 0; i < channel.size(); ++i) {
        weights[i] = channel.rates[i] * (psi.adjoint() * ldl[i] * psi).real()(0, 0);
        dp += weights[i] * dt;
      }
      if (dp > policy.jump_prob_cap)
        throw std::runtime_error(
            "sample_trajectory: per-step jump probability exceeds cap; "
            "reduce the integration step");
      if (rng.uniform() < dp) {
        double pick = rng.uniform() * (dp / dt);
        std::size_t idx = 0;
        double acc = 0.0;
        for (std::size_t i = 0; i < channel.size(); ++i) {
          acc += weights[i];
          if (pick <= acc) {
            idx = i;
            break;
          }
          idx = i;
        }
        psi = channel.operators[idx] * psi;
        psi /= psi.norm();
        sample.jumps.emplace_back(t + (k + 1) * dt, static_cast<int>(idx));
        sample.no_jump = false;
      } else {
        psi = drift_step(psi, heff, dt);
      }
    }
    t += seg.duration;
  }
  sample.final_state = PureState{psi};
  return sample;
}

double no_jump_probability(const PureState& psi0, const HamiltonianModel& model,
                           const ControlSchedule& schedule,
                           const DissipationChannel& channel,
                           const IntegratorOptions& opts) {
  if (channel.empty()) return 1.0;
  Vector psi = psi0.amplitudes / psi0.amplitudes.norm();
  std::vector<Matrix> ldl(channel.size());
  for (std::size_t i = 0; i < channel.size(); ++i)
    ldl[i] = channel.operators[i].adjoint() * channel.operators[i];
  auto rate_at = [&](const Vector& v) {
    double r = 0.0;
    for (std::size_t i = 0; i < channel.size(); ++i)
      r += channel.rates[i] * (v.adjoint() * ldl[i] * v).real()(0, 0);
    return r;
  };

  double integral = 0.0;
  for (const auto& seg : schedule.segments) {
    Matrix heff = effective_hamiltonian(
        model.hamiltonian(seg.values, model.uncertainty.has_value()), channel);
    long n = std::max<long>(1, std::lround(seg.duration * opts.steps_per_unit_time));
    double dt = seg.duration / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      double r0 = rate_at(psi);
      psi = drift_step(psi, heff, dt);
      integral += 0.5 * dt * (r0 + rate_at(psi));
    }
  }
  return std::exp(-integral);
}

} // namespace qtopc
