#include "qtopc/povm.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace qtopc {

void Povm::validate(const NumericPolicy& policy) const {
  if (effects.empty()) throw std::invalid_argument("Povm: no effects");
  int d = dim();
  Matrix sum = Matrix::Zero(d, d);
  for (const auto& e : effects) {
    if (e.rows() != d || e.cols() != d)
      throw std::invalid_argument("Povm: effect dimension mismatch");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (e + e.adjoint()),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -policy.psd_tol)
      throw std::invalid_argument("Povm: effect is not positive semidefinite");
    sum += e;
  }
  if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("Povm: effects do not sum to identity");
}

Povm Povm::computational(int d) {
  Povm p;
  for (int i = 0; i < d; ++i) p.effects.push_back(ops::projector(i, d));
  return p;
}

Povm Povm::fromEffects(std::vector<Matrix> effects) {
  Povm p{std::move(effects)};
  p.validate();
  return p;
}

Povm build_step_povm(const PureState& nominal) {
  int d = nominal.dim();
  Matrix proj = nominal.amplitudes * nominal.amplitudes.adjoint();
  return Povm{{proj, Matrix::Identity(d, d) - proj}};
}

namespace {

DensityMatrix lueders_post_state(const DensityMatrix& rho, const Matrix& effect,
                                 double prob) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (effect + effect.adjoint()));
  int d = static_cast<int>(effect.rows());
  // Rank-1 effects reproduce their own projector exactly.
  int rank = 0;
  int top = d - 1;
  for (int i = 0; i < d; ++i)
    if (es.eigenvalues()(i) > 1e-12) ++rank;
  if (rank == 1) {
    Vector v = es.eigenvectors().col(top);
    return DensityMatrix{v * v.adjoint()};
  }
  Vector roots(d);
  for (int i = 0; i < d; ++i)
    roots(i) = std::sqrt(std::max(0.0, es.eigenvalues()(i)));
  Matrix sqrt_e = es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().adjoint();
  Matrix post = sqrt_e * rho.m * sqrt_e / prob;
  return DensityMatrix{0.5 * (post + post.adjoint())};
}

} // namespace

MeasurementResult measure(const DensityMatrix& rho, const Povm& povm, RngStream& rng) {
  std::size_t n = povm.effects.size();
  std::vector<double> probs(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = std::clamp((povm.effects[i] * rho.m).trace().real(), 0.0, 1.0);
    total += probs[i];
  }
  if (total < 1e-12)
    throw std::runtime_error("measure: all outcome probabilities degenerate");
  if (std::abs(total - 1.0) > 1e-8)
    throw std::runtime_error("measure: outcome probabilities drifted beyond tolerance");
  for (auto& p : probs) p /= total;

  // Sample, excluding (by resampling) outcomes with negligible probability.
  int outcome = -1;
  for (int attempt = 0; attempt < 64 && outcome < 0; ++attempt) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += probs[i];
      if (u <= acc) {
        if (probs[i] >= 1e-12) outcome = static_cast<int>(i);
        break;
      }
    }
  }
  if (outcome < 0)
    throw std::runtime_error("measure: failed to sample a non-degenerate outcome");

  MeasurementResult r;
  r.outcome = outcome;
  r.probability = probs[outcome];
  r.post_state = lueders_post_state(rho, povm.effects[outcome], r.probability);
  return r;
}

MeasurementResult measure_forced(const DensityMatrix& rho, const Povm& povm,
                                 int forced_outcome) {
  MeasurementResult r;
  r.outcome = forced_outcome;
  r.probability =
      std::clamp((povm.effects[forced_outcome] * rho.m).trace().real(), 0.0, 1.0);
  r.post_state = lueders_post_state(rho, povm.effects[forced_outcome],
                                    std::max(r.probability, 1e-300));
  return r;
}

} // namespace qtopc
