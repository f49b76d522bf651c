#include "qtopc/state.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <sstream>
#include <stdexcept>

namespace qtopc {

PureState PureState::basis(int i, int d) {
  Vector v = Vector::Zero(d);
  v(i) = 1.0;
  return PureState{v};
}

PureState PureState::normalized(const Vector& v) {
  double n = v.norm();
  if (n <= 0.0) throw std::invalid_argument("PureState: zero vector");
  Vector w = v / n;
  for (int i = 0; i < w.size(); ++i) {
    if (std::abs(w(i)) > 1e-12) {
      w *= std::conj(w(i)) / std::abs(w(i));
      break;
    }
  }
  return PureState{w};
}

DensityMatrix DensityMatrix::fromPure(const PureState& psi) {
  return DensityMatrix{psi.amplitudes * psi.amplitudes.adjoint()};
}

DensityMatrix DensityMatrix::maximallyMixed(int d) {
  return DensityMatrix{Matrix::Identity(d, d) / static_cast<double>(d)};
}

std::string StateDiagnostics::summary() const {
  std::ostringstream os;
  os << (pass ? "pass" : "fail") << " (hermiticity=" << hermiticity_defect
     << ", trace_defect=" << trace_defect << ", min_eig=" << min_eigenvalue << ")";
  return os.str();
}

StateDiagnostics validate_state(const DensityMatrix& rho, const NumericPolicy& policy) {
  StateDiagnostics d;
  d.hermiticity_defect = (rho.m - rho.m.adjoint()).cwiseAbs().maxCoeff();
  d.trace_defect = std::abs(rho.m.trace() - Complex(1.0, 0.0));
  Matrix herm = 0.5 * (rho.m + rho.m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  d.pass = d.hermiticity_defect <= policy.hermiticity_tol &&
           d.trace_defect <= policy.trace_tol &&
           d.min_eigenvalue >= -policy.psd_tol;
  return d;
}

namespace ops {

Matrix sigma_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix sigma_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

Matrix sigma_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix jx() {
  Matrix m(3, 3);
  double s = 1.0 / std::sqrt(2.0);
  m << 0, s, 0, s, 0, s, 0, s, 0;
  return m;
}

Matrix jy() {
  Matrix m(3, 3);
  Complex is(0, 1.0 / std::sqrt(2.0));
  m << Complex(0), -is, Complex(0), is, Complex(0), -is, Complex(0), is, Complex(0);
  return m;
}

Matrix jz() {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 1;
  m(2, 2) = -1;
  return m;
}

Matrix projector(int i, int d) {
  Matrix m = Matrix::Zero(d, d);
  m(i, i) = 1;
  return m;
}

Matrix identity(int d) { return Matrix::Identity(d, d); }

Matrix lowering2() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1;
  return m;
}

} // namespace ops

double operator_norm(const Matrix& a) {
  return a.jacobiSvd().singularValues()(0);
}

} // namespace qtopc
