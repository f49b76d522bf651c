#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qtopc/state.hpp"

using namespace qtopc;

TEST_CASE("pauli matrices are involutory and traceless with the standard entries") {
  for (const Matrix& s : {ops::sigma_x(), ops::sigma_y(), ops::sigma_z()}) {
    CHECK((s * s - ops::identity(2)).norm() == doctest::Approx(0.0));
    CHECK(std::abs(s.trace()) == doctest::Approx(0.0));
    CHECK((s - s.adjoint().eval()).norm() == doctest::Approx(0.0));
  }
  CHECK(ops::sigma_x()(0, 1) == Complex(1, 0));
  CHECK(ops::sigma_y()(0, 1) == Complex(0, -1));
  CHECK(ops::sigma_z()(0, 0) == Complex(1, 0));
  CHECK(ops::sigma_z()(1, 1) == Complex(-1, 0));
}

TEST_CASE("spin-1 matrices are Hermitian with the expected commutator") {
  Matrix jx = ops::jx(), jy = ops::jy(), jz = ops::jz();
  CHECK((jx - jx.adjoint().eval()).norm() == doctest::Approx(0.0));
  CHECK((jy - jy.adjoint().eval()).norm() == doctest::Approx(0.0));
  CHECK(jz(0, 0) == Complex(1, 0));
  CHECK(jz(1, 1) == Complex(0, 0));
  CHECK(jz(2, 2) == Complex(-1, 0));
  // [Jx, Jy] = i Jz
  Matrix comm = jx * jy - jy * jx;
  CHECK((comm - Complex(0, 1) * jz).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(operator_norm(jy) == doctest::Approx(1.0));
}

TEST_CASE("basis states and normalization phase convention") {
  PureState e1 = PureState::basis(1, 3);
  CHECK(e1.dim() == 3);
  CHECK(e1.amplitudes(1) == Complex(1, 0));
  CHECK(e1.norm() == doctest::Approx(1.0));

  Vector v(2);
  v << Complex(0, 2), Complex(1, 1);
  PureState p = PureState::normalized(v);
  CHECK(p.norm() == doctest::Approx(1.0));
  // first nonzero amplitude rotated to the positive real axis
  CHECK(p.amplitudes(0).imag() == doctest::Approx(0.0));
  CHECK(p.amplitudes(0).real() > 0.0);
}

TEST_CASE("density matrix constructors") {
  DensityMatrix rho = DensityMatrix::fromPure(PureState::basis(0, 2));
  CHECK(rho.m(0, 0) == Complex(1, 0));
  CHECK(rho.m(1, 1) == Complex(0, 0));
  DensityMatrix mixed = DensityMatrix::maximallyMixed(3);
  CHECK(mixed.m(0, 0).real() == doctest::Approx(1.0 / 3.0));
  CHECK(std::abs(mixed.m.trace() - Complex(1, 0)) == doctest::Approx(0.0));
}

TEST_CASE("validate_state diagnostics") {
  CHECK(validate_state(DensityMatrix::maximallyMixed(2)).pass);

  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 0) = 1.5;
  bad(1, 1) = -0.5;
  StateDiagnostics d = validate_state(DensityMatrix::fromMatrix(bad));
  CHECK_FALSE(d.pass);
  CHECK(d.min_eigenvalue == doctest::Approx(-0.5));

  Matrix nh = DensityMatrix::fromPure(PureState::basis(0, 2)).m;
  nh(0, 1) += Complex(1e-3, 0); // not mirrored at (1,0)
  StateDiagnostics d2 = validate_state(DensityMatrix::fromMatrix(nh));
  CHECK_FALSE(d2.pass);
  CHECK(d2.hermiticity_defect == doctest::Approx(1e-3));
  CHECK(d2.summary().size() > 0);
}

TEST_CASE("operator norm is the largest singular value") {
  Matrix a = Matrix::Zero(2, 2);
  a(0, 1) = 3.0; // nilpotent: eigenvalues 0, singular value 3
  CHECK(operator_norm(a) == doctest::Approx(3.0));
  CHECK(operator_norm(ops::lowering2()) == doctest::Approx(1.0));
}
