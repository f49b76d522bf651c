#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qtopc/povm.hpp"

#include <cmath>

using namespace qtopc;

TEST_CASE("step POVM for basis and superposition states") {
  Povm m0 = build_step_povm(PureState::basis(0, 2));
  CHECK_NOTHROW(m0.validate());
  CHECK((m0.effects[0] - ops::projector(0, 2)).norm() == doctest::Approx(0.0));
  CHECK((m0.effects[1] - ops::projector(1, 2)).norm() == doctest::Approx(0.0));

  Vector plus(2);
  plus << 1.0, 1.0;
  Povm mp = build_step_povm(PureState::normalized(plus));
  Matrix expected = 0.5 * (ops::identity(2) + ops::sigma_x());
  CHECK((mp.effects[0] - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK((mp.effects[1] - (ops::identity(2) - expected)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("the complement effect in d=3 has rank 2 and trace 2") {
  Vector v(3);
  v << Complex(0.3, 0.1), Complex(0.8, -0.2), Complex(0.4, 0.0);
  Povm m = build_step_povm(PureState::normalized(v));
  CHECK_NOTHROW(m.validate());
  Matrix comp = m.effects[1];
  CHECK(comp.trace().real() == doctest::Approx(2.0));
  Eigen::SelfAdjointEigenSolver<Matrix> es(comp);
  int rank = 0;
  for (int i = 0; i < 3; ++i)
    if (es.eigenvalues()(i) > 1e-9) ++rank;
  CHECK(rank == 2);
}

TEST_CASE("POVM validation rejects non-PSD and non-complete effect sets") {
  Povm bad;
  bad.effects = {2.0 * ops::projector(0, 2), -1.0 * ops::projector(0, 2) + ops::projector(1, 2)};
  CHECK_THROWS(bad.validate());

  Povm incomplete;
  incomplete.effects = {0.5 * ops::identity(2), 0.25 * ops::identity(2)};
  CHECK_THROWS(incomplete.validate());

  CHECK_NOTHROW(Povm::computational(3).validate());
}

TEST_CASE("deterministic measurement of an eigenstate") {
  RngStream rng(61);
  DensityMatrix z0 = DensityMatrix::fromPure(PureState::basis(0, 2));
  Povm m = Povm::computational(2);
  for (int i = 0; i < 20; ++i) {
    MeasurementResult r = measure(z0, m, rng);
    CHECK(r.outcome == 0);
    CHECK(r.probability == doctest::Approx(1.0));
    CHECK(trace_distance(r.post_state, z0) == doctest::Approx(0.0));
  }
}

TEST_CASE("Born-rule frequencies on the maximally mixed state") {
  RngStream rng(62);
  DensityMatrix mixed = DensityMatrix::maximallyMixed(2);
  Povm m = Povm::computational(2);
  const int n = 10000;
  int zeros = 0;
  for (int i = 0; i < n; ++i)
    if (measure(mixed, m, rng).outcome == 0) ++zeros;
  double sigma = std::sqrt(0.25 / n);
  CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) <= 3.0 * sigma);
}

TEST_CASE("Lueders post-state of the rank-2 complement effect") {
  Vector v(3);
  v << Complex(0.6, 0.0), Complex(0.0, 0.5), Complex(0.4, -0.3);
  PureState psi = PureState::normalized(v);
  Povm m = build_step_povm(psi);
  DensityMatrix mixed = DensityMatrix::maximallyMixed(3);

  MeasurementResult r = measure_forced(mixed, m, 1);
  CHECK(r.probability == doctest::Approx(2.0 / 3.0));
  Matrix proj = psi.amplitudes * psi.amplitudes.adjoint();
  Matrix oracle = (ops::identity(3) - proj) / 2.0;
  CHECK((r.post_state.m - oracle).norm() <= 1e-10);
  CHECK(validate_state(r.post_state).pass);

  // rank-1 branch collapses exactly onto the effect state
  MeasurementResult r0 = measure_forced(mixed, m, 0);
  CHECK(r0.probability == doctest::Approx(1.0 / 3.0));
  CHECK((r0.post_state.m - proj).norm() <= 1e-10);
}

TEST_CASE("post-measurement states always validate") {
  RngStream rng(63);
  Vector v(2);
  v << Complex(0.8, 0.1), Complex(0.3, -0.5);
  Povm m = build_step_povm(PureState::normalized(v));
  Matrix a(2, 2);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) a(r, c) = Complex(rng.normal(), rng.normal());
  Matrix rho = a * a.adjoint();
  DensityMatrix state = DensityMatrix::fromMatrix(rho / rho.trace());
  for (int i = 0; i < 100; ++i) {
    MeasurementResult r = measure(state, m, rng);
    CHECK(validate_state(r.post_state).pass);
    CHECK(r.probability > 0.0);
  }
}
