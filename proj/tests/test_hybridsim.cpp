#include <doctest.h>

#include <cmath>

#include "hybrid/hybridsim.hpp"
#include "hybrid/solver.hpp"
#include "support.hpp"

using namespace hybrid;
using testing::spec_from_text;

namespace {

struct Solved {
  ProblemSpec spec;
  GridSpec grid;
  ValueField value;
  double dt;
};

Solved solved(const std::string& name, int points) {
  Solved s;
  s.spec = testing::bundled(name);
  s.grid = GridSpec({points}, s.spec.box);
  SolveResult r = solve(s.spec, s.grid, SolverConfig{});
  REQUIRE(r.converged);
  s.value = r.value;
  s.dt = r.dt;
  return s;
}

Vector scalar(double v) { return Vector::Constant(1, v); }

HybridTrajectory bare(double dt, double lambda, int samples, double k) {
  HybridTrajectory t;
  t.dt = dt;
  t.discount = lambda;
  for (int i = 0; i < samples; ++i) {
    TrajectorySample s;
    s.time = i * dt;
    s.state = scalar(0.0);
    s.running_cost = k;
    t.samples.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("decisions") {
  Solved ms = solved("mode_selection.toml", 21);
  PolicyDecision d = decide(ms.spec, ms.value, scalar(0.4), {0, 0}, ms.dt, 1e-9);
  CHECK(d.kind == PolicyDecision::Kind::SwitchPlayer2);
  CHECK(d.target == 1);
  CHECK(decide(ms.spec, ms.value, scalar(-0.9), {0, 1}, ms.dt, 1e-9).kind == PolicyDecision::Kind::Continue);

  Solved cc = solved("constant_cost.toml", 101);
  CHECK(decide(cc.spec, cc.value, scalar(3.0), {0, 0}, 0.1, 1e-9).kind == PolicyDecision::Kind::Continue);

  Solved toy = solved("impulse_toy.toml", 25);
  PolicyDecision j = decide(toy.spec, toy.value, scalar(-2.0), {0, 0}, toy.dt, 1e-9);
  CHECK(j.kind == PolicyDecision::Kind::Impulse);
  CHECK(j.target == 1);
  // Impulse now beats never impulsing: 1.5 + V(0) = 1.5 against k/lambda = 4.
  CHECK(toy.value.at(0, 0, 0) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("mode selection rollout: one switch at time zero then steady cost") {
  Solved ms = solved("mode_selection.toml", 21);
  SimulationOptions opt;
  opt.horizon = 14.0;
  opt.dt = 0.05;
  HybridTrajectory t = simulate(ms.spec, ms.value, scalar(0.3), {0, 0}, opt);
  REQUIRE(t.player2_switches.size() == 1);
  CHECK(t.player2_switches[0].time == 0.0);
  CHECK(t.player2_switches[0].from == 0);
  CHECK(t.player2_switches[0].to == 1);
  CHECK(t.player1_switches.empty());
  CHECK(t.impulses.empty());
  const double T = t.samples.size() * opt.dt;
  CHECK(std::abs(t.accumulated_cost() - (1.0 + 0.5 * (1.0 - std::exp(-T)))) <= 1e-12);
  CHECK(t.samples.front().events == "switch2:1>2");
  for (std::size_t i = 1; i < t.samples.size(); ++i) CHECK(t.samples[i].events.empty());
}

TEST_CASE("constant cost rollout approaches k / lambda") {
  Solved cc = solved("constant_cost.toml", 101);
  SimulationOptions opt;
  opt.dt = 0.1;
  double previous = -1.0;
  for (double T : {1.0, 5.0, 20.0, 60.0}) {
    opt.horizon = T;
    HybridTrajectory t = simulate(cc.spec, cc.value, scalar(0.0), {0, 0}, opt);
    const double reached = t.samples.size() * opt.dt;
    CHECK(reached >= T - 1e-9);
    CHECK(t.accumulated_cost() == doctest::Approx(2.0 * (1.0 - std::exp(-0.5 * reached))).epsilon(1e-12));
    CHECK(t.accumulated_cost() >= previous);
    previous = t.accumulated_cost();
  }
  CHECK(previous == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("zero dynamics and zero cost accumulate nothing") {
  ProblemSpec s = spec_from_text(testing::constant_spec_text(0.0, 1.0));
  GridSpec g({5}, s.box);
  HybridTrajectory t = simulate(s, ValueField(g, 1, 1, 0.0), scalar(0.2), {0, 0}, SimulationOptions{});
  CHECK(t.running_total == 0.0);
  CHECK(t.switch1_total == 0.0);
  CHECK(t.switch2_total == 0.0);
  CHECK(t.impulse_total == 0.0);
  CHECK(evaluate_cost(t, 1.0) == 0.0);
}

TEST_CASE("cost evaluation examples") {
  HybridTrajectory t = bare(0.1, 0.5, 2000, 1.0);
  CHECK(evaluate_cost(t, 0.5) == doctest::Approx(2.0).epsilon(1e-12));

  HybridTrajectory s = bare(0.1, 1.0, 10, 0.0);
  s.player1_switches.push_back({0.0, 0, 1, 0.3});
  CHECK(evaluate_cost(s, 1.0) == doctest::Approx(-0.3).epsilon(1e-15));

  HybridTrajectory j = bare(0.1, 2.0, 10, 0.0);
  j.impulses.push_back({std::log(2.0) / 2.0, 0, scalar(1.0), 1.0});
  CHECK(evaluate_cost(j, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("cost accounting paths agree and respect the payoff signs") {
  Solved ay = solved("anti_yong.toml", 81);
  SimulationOptions opt;
  opt.dt = 0.05;
  opt.horizon = 8.0;
  for (double x0 : {-1.7, -0.4, 0.0, 0.9, 1.8})
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        HybridTrajectory t = simulate(ay.spec, ay.value, scalar(x0), {a, b}, opt);
        CHECK(std::abs(evaluate_cost(t, ay.spec.discount) - t.accumulated_cost()) <= 1e-12);
        for (const auto& e : t.player1_switches) CHECK(e.from != e.to);
        for (const auto& e : t.player2_switches) CHECK(e.from != e.to);

        HybridTrajectory dearer = t;
        for (auto& e : dearer.player2_switches) e.cost += 0.5;
        for (auto& e : dearer.impulses) e.cost += 0.5;
        CHECK(evaluate_cost(dearer, 1.0) >= evaluate_cost(t, 1.0));
        HybridTrajectory p1 = t;
        for (auto& e : p1.player1_switches) e.cost += 0.5;
        CHECK(evaluate_cost(p1, 1.0) <= evaluate_cost(t, 1.0));
      }
}

TEST_CASE("impulse toy jumps at the first step from far away") {
  Solved toy = solved("impulse_toy.toml", 25);
  SimulationOptions opt;
  opt.dt = toy.dt;
  HybridTrajectory t = simulate(toy.spec, toy.value, scalar(-2.0), {0, 0}, opt);
  REQUIRE(t.impulses.size() == 1);
  CHECK(t.impulses[0].time == 0.0);
  CHECK(t.samples.front().state[0] == 0.0);
  CHECK(t.accumulated_cost() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("a loose action tolerance trips the event guard") {
  Solved ms = solved("mode_selection.toml", 21);
  SimulationOptions opt;
  opt.action_tol = 10.0;
  CHECK_THROWS_AS(simulate(ms.spec, ms.value, scalar(0.0), {0, 0}, opt), SimulationError);
}

TEST_CASE("rollout gaps") {
  Solved ms = solved("mode_selection.toml", 21);
  SimulationOptions opt;
  opt.horizon = 14.0;
  RolloutReport r = rollout_value_gap(ms.spec, ms.value, {{scalar(0.3), {0, 0}}, {scalar(-0.8), {0, 1}}}, opt);
  CHECK(r.rows.size() == 2);
  CHECK(r.max_gap <= 1e-6 + std::exp(-14.0) * 2.0);

  Solved cc = solved("constant_cost.toml", 101);
  opt.dt = 0.1;
  opt.horizon = 30.0;
  RolloutReport c = rollout_value_gap(cc.spec, cc.value, {{scalar(1.0), {0, 0}}}, opt);
  CHECK(c.max_gap <= std::exp(-0.5 * 30.0) * 2.0 + 1e-9);
}

TEST_CASE("trajectory export") {
  Solved ms = solved("mode_selection.toml", 21);
  SimulationOptions opt;
  opt.horizon = 0.2;
  HybridTrajectory t = simulate(ms.spec, ms.value, scalar(0.3), {0, 0}, opt);
  std::string csv = trajectory_csv(ms.spec, t);
  CHECK(csv.rfind("time,x0,d1,d2,u1,u2,events,running,switch1,switch2,impulse\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + static_cast<long>(t.samples.size()));
  CHECK(csv.find("switch2:1>2") != std::string::npos);
}
