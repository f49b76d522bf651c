#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qtopc/bounds.hpp"
#include "qtopc/feedback.hpp"

#include <cmath>

using namespace qtopc;

namespace {
FeedbackConfig two_level_config() {
  FeedbackConfig c;
  c.problem.model = HamiltonianModel::two_level();
  c.problem.initial = DensityMatrix::fromPure(PureState::basis(0, 2));
  c.problem.target = DensityMatrix::fromPure(PureState::basis(1, 2));
  c.problem.lambda0 = 0.04;
  c.problem.t_max = 10.0;
  c.true_channel = DissipationChannel::none();
  c.ts = 1.0;
  c.max_steps = 20;
  c.seed = 1234;
  c.solver = SolverChoice::BangBangTwoLevel;
  return c;
}
} // namespace

TEST_CASE("nominal-outcome runs decrease the cost by at least lambda0*Ts per step") {
  FeedbackConfig c = two_level_config();
  RunRecord r = forced_outcome_mode(c);
  REQUIRE(r.steps.size() >= 2);
  for (std::size_t i = 1; i < r.steps.size(); ++i)
    CHECK(r.steps[i].cost - r.steps[i - 1].cost <= -c.problem.lambda0 * c.ts + 1e-8);
  CHECK(r.final_infidelity < 1e-2);
  CHECK(r.termination == "optimal-time-below-ts");
}

TEST_CASE("starting at the target terminates immediately") {
  FeedbackConfig c = two_level_config();
  c.problem.initial = c.problem.target;
  RunRecord r = run_qtopc(c);
  REQUIRE(r.steps.size() == 1);
  CHECK(r.steps[0].t_star == doctest::Approx(0.0));
  CHECK(r.final_fidelity == doctest::Approx(1.0));
}

TEST_CASE("dissipative nominal-outcome transfer still converges") {
  FeedbackConfig c = two_level_config();
  c.true_channel = DissipationChannel::single(ops::sigma_y(), 0.1);
  RunRecord r = forced_outcome_mode(c);
  CHECK(r.final_infidelity < 1e-2);
}

TEST_CASE("sampled runs are reproducible and their clocks advance by Ts") {
  FeedbackConfig c = two_level_config();
  c.true_channel = DissipationChannel::single(ops::sigma_y(), 0.2);
  RunRecord a = run_qtopc(c);
  RunRecord b = run_qtopc(c);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].cost == b.steps[i].cost);
    CHECK(a.steps[i].outcome == b.steps[i].outcome);
    CHECK(a.steps[i].fidelity == b.steps[i].fidelity);
  }
  CHECK(trace_distance(a.final_state, b.final_state) == doctest::Approx(0.0));

  double prev = 0.0;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    CHECK(a.steps[i].time > prev);
    if (i + 1 < a.steps.size())
      CHECK(a.steps[i].time == doctest::Approx(prev + c.ts));
    prev = a.steps[i].time;
  }
}

TEST_CASE("recorded steps replay to their logged costs") {
  FeedbackConfig c = two_level_config();
  c.true_channel = DissipationChannel::single(ops::sigma_y(), 0.1);
  RunRecord r = run_qtopc(c);
  for (const auto& step : r.steps) {
    ControlProblem p = c.problem;
    p.initial = DensityMatrix::fromPure(step.pre_state);
    CHECK(std::abs(evaluate_cost(p, step.schedule) - step.cost) <= 1e-6);
  }
}

TEST_CASE("per-step success frequency respects the deviation-rate floor") {
  double delta_bar = 0.01, gamma_bar = 0.02;
  FeedbackConfig c = two_level_config();
  c.true_channel = DissipationChannel::single(ops::sigma_y(), gamma_bar);

  int nominal = 0, total = 0;
  for (int run = 0; run < 60; ++run) {
    RngStream rng = RngStream::derived(5550, static_cast<std::uint64_t>(run));
    c.true_uncertainty = sample_uncertainty(delta_bar, 2, rng);
    c.seed = 5551 + static_cast<std::uint64_t>(run);
    RunRecord r = run_qtopc(c);
    for (std::size_t i = 0; i + 1 < r.steps.size(); ++i) {
      ++total;
      if (r.steps[i].outcome == 0) ++nominal;
    }
  }
  REQUIRE(total > 100);
  double floor = success_floor_general(delta_bar, gamma_bar, c.ts);
  double freq = static_cast<double>(nominal) / total;
  double sigma = std::sqrt(floor * (1.0 - floor) / total);
  CHECK(freq >= floor - 3.0 * sigma);
}

TEST_CASE("expected decrease condition transfers to observed steps") {
  // lambda0 = 0.3, eps = 2*0.004 + 0.01 = 0.018 <= lambda0^2*Ts/4 = 0.0225
  double delta_bar = 0.004, gamma_bar = 0.01, lambda0 = 0.3, ts = 1.0;
  StabilityReport rep = stability_report(delta_bar, gamma_bar, ts, lambda0, 20, 2, 0.0);
  REQUIRE(rep.per_step.satisfied);

  FeedbackConfig c = two_level_config();
  c.problem.lambda0 = lambda0;
  c.true_channel = DissipationChannel::phase_damping2(gamma_bar);
  RngStream rng(5660);
  c.true_uncertainty = sample_uncertainty(delta_bar, 2, rng);
  RunRecord r = forced_outcome_mode(c);
  double eps_ts = epsilon_rate(delta_bar, gamma_bar) * ts;
  double bound = 2.0 * std::sqrt(eps_ts) - lambda0 * ts;
  for (std::size_t i = 1; i < r.steps.size(); ++i)
    CHECK(r.steps[i].cost - r.steps[i - 1].cost <= bound + 1e-6);
}

TEST_CASE("fixed POVM bases have the expected tilted amplitudes") {
  std::vector<Povm> bases = fixed_povm_bases_two_level();
  REQUIRE(bases.size() == 2);
  for (const Povm& b : bases) CHECK_NOTHROW(b.validate());
  // first effect of the tilted basis against |0>
  Vector e0 = Vector::Zero(2);
  e0(0) = 1.0;
  Matrix eff = bases[1].effects[0];
  double p = (e0.adjoint() * eff * e0)(0).real();
  CHECK(p == doctest::Approx(0.75));
}

TEST_CASE("fixed POVM runs move toward the target") {
  FeedbackConfig c = two_level_config();
  c.seed = 77;
  RunRecord r = run_qtopc_fixed_povm(c, fixed_povm_bases_two_level());
  REQUIRE(!r.steps.empty());
  CHECK(r.final_fidelity > 0.9);
  for (const auto& step : r.steps) {
    CHECK(step.fidelity >= 0.0);
    CHECK(step.fidelity <= 1.0 + 1e-9);
  }
}
