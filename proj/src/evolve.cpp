#include "qtopc/evolve.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <cmath>
#include <stdexcept>

namespace qtopc {

Matrix unitary_of(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(h.rows());
  for (int i = 0; i < h.rows(); ++i)
    phases(i) = std::exp(Complex(0, -es.eigenvalues()(i) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix lindblad_rhs(const DensityMatrix& rho, const Matrix& h_total,
                    const DissipationChannel& channel) {
  if (rho.dim() != h_total.rows())
    throw std::invalid_argument("lindblad_rhs: dimension mismatch");
  Complex mi(0, -1);
  Matrix out = mi * (h_total * rho.m - rho.m * h_total);
  for (std::size_t i = 0; i < channel.size(); ++i) {
    const Matrix& l = channel.operators[i];
    if (l.rows() != rho.dim())
      throw std::invalid_argument("lindblad_rhs: Lindblad operator dimension mismatch");
    Matrix ldl = l.adjoint() * l;
    out += channel.rates[i] *
           (l * rho.m * l.adjoint() - 0.5 * (ldl * rho.m + rho.m * ldl));
  }
  return out;
}

DensityMatrix evolve_master(const DensityMatrix& rho0, const HamiltonianModel& model,
                            const ControlSchedule& schedule,
                            const DissipationChannel& channel,
                            bool include_uncertainty, const IntegratorOptions& opts,
                            const NumericPolicy& policy) {
  DensityMatrix rho = rho0;
  for (const auto& seg : schedule.segments) {
    Matrix h = model.hamiltonian(seg.values, include_uncertainty);
    long n = std::max<long>(1, std::lround(seg.duration * opts.steps_per_unit_time));
    double dt = seg.duration / static_cast<double>(n);
    for (long k = 0; k < n; ++k) {
      Matrix k1 = lindblad_rhs(rho, h, channel);
      Matrix k2 = lindblad_rhs(DensityMatrix{rho.m + 0.5 * dt * k1}, h, channel);
      Matrix k3 = lindblad_rhs(DensityMatrix{rho.m + 0.5 * dt * k2}, h, channel);
      Matrix k4 = lindblad_rhs(DensityMatrix{rho.m + dt * k3}, h, channel);
      rho.m += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      rho.m /= rho.m.trace().real();
    }
  }
  StateDiagnostics diag = validate_state(rho, policy);
  if (diag.hermiticity_defect > 1e-6 || diag.trace_defect > 1e-6 ||
      diag.min_eigenvalue < -1e-6)
    throw std::runtime_error("evolve_master: state invariants violated: " +
                             diag.summary());
  return rho;
}

static Matrix liouvillian(const Matrix& h, const DissipationChannel& channel) {
  int d = static_cast<int>(h.rows());
  Matrix id = Matrix::Identity(d, d);
  auto kron = [d](const Matrix& a, const Matrix& b) {
    Matrix out(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) out.block(i * d, j * d, d, d) = a(i, j) * b;
    return out;
  };
  // vec(A rho B) = (B^T kron A) vec(rho), column-major vectorization.
  Complex mi(0, -1);
  Matrix l = mi * (kron(id, h) - kron(h.transpose(), id));
  for (std::size_t i = 0; i < channel.size(); ++i) {
    const Matrix& op = channel.operators[i];
    Matrix ldl = op.adjoint() * op;
    l += channel.rates[i] *
         (kron(op.conjugate(), op) -
          0.5 * (kron(id, ldl) + kron(ldl.transpose(), id)));
  }
  return l;
}

Matrix segment_propagator(const HamiltonianModel& model, const std::vector<double>& u,
                          double duration, const DissipationChannel& channel,
                          bool include_uncertainty) {
  Matrix h = model.hamiltonian(u, include_uncertainty);
  if (channel.empty()) {
    Matrix v = unitary_of(h, duration);
    int d = static_cast<int>(h.rows());
    Matrix out(d * d, d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        out.block(i * d, j * d, d, d) = std::conj(v(i, j)) * v;
    return out; // conj(V) kron V
  }
  Matrix l = liouvillian(h, channel) * duration;
  return l.exp();
}

DensityMatrix evolve_master_exact(const DensityMatrix& rho0,
                                  const HamiltonianModel& model,
                                  const ControlSchedule& schedule,
                                  const DissipationChannel& channel,
                                  bool include_uncertainty) {
  int d = rho0.dim();
  Vector v = Eigen::Map<const Vector>(rho0.m.data(), d * d);
  for (const auto& seg : schedule.segments)
    v = segment_propagator(model, seg.values, seg.duration, channel,
                           include_uncertainty) *
        v;
  Matrix out = Eigen::Map<const Matrix>(v.data(), d, d);
  out /= out.trace().real();
  return DensityMatrix{0.5 * (out + out.adjoint())};
}

PureState evolve_nominal(const PureState& psi0, const HamiltonianModel& model,
                         const ControlSchedule& schedule) {
  Vector v = psi0.amplitudes;
  for (const auto& seg : schedule.segments)
    v = unitary_of(model.hamiltonian(seg.values, false), seg.duration) * v;
  return PureState{v / v.norm()};
}

} // namespace qtopc
