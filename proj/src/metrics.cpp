#include "qtopc/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <stdexcept>

namespace qtopc {

static void check_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("dimension mismatch between density matrices");
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  check_same_dim(a, b);
  // a - b is Hermitian, so the singular values are |eigenvalues|.
  Matrix diff = a.m - b.m;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()),
                                           Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double overlap(const DensityMatrix& a, const DensityMatrix& b) {
  check_same_dim(a, b);
  return (a.m * b.m).trace().real();
}

double terminal_error(const DensityMatrix& target, const DensityMatrix& final_state) {
  double d = trace_distance(target, final_state);
  return d * d;
}

PureState nearest_pure_state(const DensityMatrix& rho, const NumericPolicy& policy) {
  Matrix herm = 0.5 * (rho.m + rho.m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
  const auto& evals = es.eigenvalues();
  int d = rho.dim();
  double lambda_max = evals(d - 1);

  // Columns spanning the (possibly degenerate) top eigenspace.
  int first = d - 1;
  while (first > 0 && lambda_max - evals(first - 1) <= policy.eig_degeneracy_tol)
    --first;
  int rank = d - first;
  if (rank == 1) return PureState::normalized(es.eigenvectors().col(d - 1));

  // Tie-break: project the smallest-index basis vector onto the eigenspace.
  Matrix span = es.eigenvectors().rightCols(rank);
  for (int j = 0; j < d; ++j) {
    Vector coeffs = span.adjoint() * Vector::Unit(d, j);
    if (coeffs.norm() > 1e-9) return PureState::normalized(span * coeffs);
  }
  return PureState::normalized(es.eigenvectors().col(d - 1)); // unreachable
}

} // namespace qtopc
