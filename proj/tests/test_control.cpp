#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qtopc/control.hpp"

#include <cmath>

using namespace qtopc;

namespace {
ControlProblem flip_problem() {
  ControlProblem p;
  p.model = HamiltonianModel::two_level();
  p.nominal_channel = DissipationChannel::none();
  p.initial = DensityMatrix::fromPure(PureState::basis(0, 2));
  p.target = DensityMatrix::fromPure(PureState::basis(1, 2));
  p.lambda0 = 0.04;
  p.t_max = 10.0;
  return p;
}
} // namespace

TEST_CASE("cost of staying at the target is zero") {
  ControlProblem p = flip_problem();
  p.initial = p.target;
  CHECK(evaluate_cost(p, ControlSchedule{}) == doctest::Approx(0.0));
}

TEST_CASE("cost decomposes into time weight plus terminal error") {
  // zero Hamiltonian: the state never moves, so an orthogonal initial state
  // contributes terminal error 1 on top of lambda0 * t_f
  ControlProblem p;
  p.model.h0 = Matrix::Zero(2, 2);
  p.initial = DensityMatrix::fromPure(PureState::basis(1, 2));
  p.target = DensityMatrix::fromPure(PureState::basis(0, 2));
  p.lambda0 = 0.04;
  CHECK(evaluate_cost(p, ControlSchedule::constant({}, 1.0)) ==
        doctest::Approx(1.04));
}

TEST_CASE("exact dissipative propagation matches a fine RK4 re-integration") {
  ControlProblem p = flip_problem();
  p.nominal_channel = DissipationChannel::single(ops::sigma_y(), 0.1);
  ControlSchedule s = ControlSchedule::constant({1.0}, 2.0);

  double cost = evaluate_cost(p, s);
  IntegratorOptions fine;
  fine.steps_per_unit_time = 10000.0;
  DensityMatrix final_rk4 =
      evolve_master(p.initial, p.model, s, p.nominal_channel, false, fine);
  double oracle = p.lambda0 * s.total_duration() + terminal_error(p.target, final_rk4);
  CHECK(cost == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("bang-bang solver returns the empty schedule at the target") {
  ControlProblem p = flip_problem();
  p.initial = p.target;
  SolveResult r = solve_bangbang_two_level(p);
  CHECK(r.schedule.total_duration() == doctest::Approx(0.0));
  CHECK(r.cost == doctest::Approx(0.0));
}

TEST_CASE("bang-bang solver reaches the flipped state and beats a dense grid") {
  ControlProblem p = flip_problem();
  SolveResult r = solve_bangbang_two_level(p);
  CHECK(r.converged);
  CHECK(r.terminal_err <= 1e-3);
  CHECK(evaluate_cost(p, r.schedule) == doctest::Approx(r.cost).epsilon(1e-8));

  // grid over 0- and 1-switch candidates
  double best_grid = 1e9;
  for (double sign : {1.0, -1.0}) {
    for (double tf = 0.05; tf <= 6.0; tf += 0.01) {
      ControlSchedule c = ControlSchedule::constant({sign}, tf);
      best_grid = std::min(best_grid, evaluate_cost(p, c));
      for (double frac = 0.1; frac < 1.0; frac += 0.1) {
        ControlSchedule sw;
        sw.segments.push_back({frac * tf, {sign}});
        sw.segments.push_back({(1.0 - frac) * tf, {-sign}});
        best_grid = std::min(best_grid, evaluate_cost(p, sw));
      }
    }
  }
  CHECK(r.cost <= best_grid + 1e-3);
}

TEST_CASE("doubling the time weight never lengthens the optimal schedule") {
  ControlProblem p = flip_problem();
  double prev_tf = 1e9;
  for (double lambda0 : {0.02, 0.04, 0.08}) {
    p.lambda0 = lambda0;
    SolveResult r = solve_bangbang_two_level(p);
    CHECK(r.schedule.total_duration() <= prev_tf + 1e-6);
    prev_tf = r.schedule.total_duration();
  }
}

TEST_CASE("gradient solver matches the bang-bang solver on the two-level problem") {
  ControlProblem p = flip_problem();
  p.params.segment_count = 30;
  SolveResult bb = solve_bangbang_two_level(p);
  SolveResult gd = solve_gradient(p);
  CHECK(std::abs(gd.cost - bb.cost) <= 2e-3);
  CHECK(evaluate_cost(p, gd.schedule) == doctest::Approx(gd.cost).epsilon(1e-8));

  // PMP signature: optimal controls sit at the bound on most segments
  int saturated = 0, total = 0;
  for (const auto& seg : gd.schedule.segments) {
    ++total;
    if (std::abs(std::abs(seg.values[0]) - p.model.controls[0].u_max) < 1e-3)
      ++saturated;
  }
  REQUIRE(total > 0);
  CHECK(static_cast<double>(saturated) / total >= 0.9);
}

TEST_CASE("gradient solver returns the empty schedule at the target") {
  ControlProblem p = flip_problem();
  p.initial = p.target;
  SolveResult r = solve_gradient(p);
  CHECK(r.schedule.total_duration() == doctest::Approx(0.0).epsilon(2e-3));
  CHECK(r.cost <= 1e-3);
}

TEST_CASE("gradient solver drives the three-level ladder transfer") {
  ControlProblem p;
  p.model = HamiltonianModel::three_level();
  p.initial = DensityMatrix::fromPure(PureState::basis(0, 3));
  p.target = DensityMatrix::fromPure(PureState::basis(2, 3));
  p.lambda0 = 0.04;
  p.t_max = 10.0;
  p.params.segment_count = 24;
  p.params.t_f_tol = 0.02;
  SolveResult r = solve_gradient(p);
  CHECK(r.terminal_err <= 1e-2);
  CHECK(evaluate_cost(p, r.schedule) == doctest::Approx(r.cost).epsilon(1e-8));
}

TEST_CASE("golden-section search finds a quadratic minimum") {
  double x = golden_section([](double t) { return (t - 1.7) * (t - 1.7); }, 0.0,
                            5.0, 1e-6);
  CHECK(x == doctest::Approx(1.7).epsilon(1e-4));
}
