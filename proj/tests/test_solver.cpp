#include <doctest.h>

#include <cmath>

#include "hybrid/solver.hpp"
#include "oracles/impulse_chain.hpp"
#include "oracles/mode_selection.hpp"
#include "support.hpp"

using namespace hybrid;
using testing::spec_from_text;

namespace {

double max_dev(const ValueField& V, int d1, int d2, double target) {
  double m = 0.0;
  for (double v : V.slice(d1, d2)) m = std::max(m, std::abs(v - target));
  return m;
}

// Four mode pairs on a switching square with equal unit switching costs and
// no motion: the player-1 and player-2 loop costs cancel.
const char* kBalancedSquare = R"(
[problem]
dimension = 1
discount = 1.0
box = [[0.0, 1.0]]
d1_labels = ["a1", "b1"]
d2_labels = ["a2", "b2"]
[dynamics."a1,a2"]
f = ["0"]
[dynamics."a1,b2"]
f = ["0"]
[dynamics."b1,a2"]
f = ["0"]
[dynamics."b1,b2"]
f = ["0"]
[cost."a1,a2"]
k = "0"
[cost."a1,b2"]
k = "3"
[cost."b1,a2"]
k = "3"
[cost."b1,b2"]
k = "0"
[switching]
c1 = [[0, 1], [1, 0]]
c2 = [[0, 1], [1, 0]]
)";

}  // namespace

TEST_CASE("constant cost converges to k / lambda") {
  ProblemSpec s = testing::bundled("constant_cost.toml");
  GridSpec g({101}, s.box);
  SolverConfig cfg;
  cfg.dt = 0.1;
  SolveResult r = solve(s, g, cfg);
  CHECK(r.converged);
  CHECK(r.monotone);
  CHECK(r.iterations < 2000);
  CHECK(max_dev(r.value, 0, 0, 2.0) <= 1e-9);
  CHECK(r.final_change() <= cfg.tolerance);
  for (std::size_t i = 1; i < r.history.size(); ++i) CHECK(r.history[i] <= r.history[i - 1]);
}

TEST_CASE("mode selection matches the closed form and the brute-force oracle") {
  ProblemSpec s = testing::bundled("mode_selection.toml");
  GridSpec g({21}, s.box);
  SolverConfig cfg;
  SolveResult r = solve(s, g, cfg);
  REQUIRE(r.converged);
  auto closed = oracle::mode_selection_closed_form({2.0, 0.5}, 1.0, 1.0);
  auto brute = oracle::mode_selection_values({2.0, 0.5}, 1.0, 1.0, r.dt);
  CHECK(closed[0] == 1.5);
  CHECK(closed[1] == 0.5);
  CHECK(std::abs(brute[0] - 1.5) <= 1e-12);
  CHECK(std::abs(brute[1] - 0.5) <= 1e-12);
  CHECK(max_dev(r.value, 0, 0, 1.5) <= 1e-8);
  CHECK(max_dev(r.value, 0, 1, 0.5) <= 1e-8);
  CHECK(max_dev(r.value, 0, 0, brute[0]) <= 1e-8);

  SolverConfig up = cfg;
  up.init = Initialization::Upper;
  SolveResult u = solve(s, g, up);
  REQUIRE(u.converged);
  CHECK(u.monotone);
  CHECK(u.upper_bound == 2.0);
  CHECK(sup_distance(u.value, r.value) <= 10.0 * cfg.tolerance);
}

TEST_CASE("three regimes against the oracle") {
  ProblemSpec s = spec_from_text(R"(
[problem]
dimension = 1
discount = 0.7
box = [[0.0, 1.0]]
d2_labels = ["x", "y", "z"]
[dynamics."1,x"]
f = ["0"]
[dynamics."1,y"]
f = ["0"]
[dynamics."1,z"]
f = ["0"]
[cost."1,x"]
k = "3"
[cost."1,y"]
k = "1"
[cost."1,z"]
k = "0.2"
[switching]
c2 = [[0, 0.4, 0.4], [0.4, 0, 0.4], [0.4, 0.4, 0]]
)");
  GridSpec g({3}, s.box);
  SolverConfig cfg;
  cfg.dt = 0.05;
  SolveResult r = solve(s, g, cfg);
  REQUIRE(r.converged);
  auto brute = oracle::mode_selection_values({3.0, 1.0, 0.2}, 0.4, 0.7, 0.05);
  for (int d = 0; d < 3; ++d) CHECK(max_dev(r.value, 0, d, brute[d]) <= 1e-9);
}

TEST_CASE("impulse toy matches the lattice shortest-path oracle") {
  ProblemSpec s = testing::bundled("impulse_toy.toml");
  GridSpec g({25}, s.box);
  SolveResult r = solve(s, g, SolverConfig{});
  REQUIRE(r.converged);
  auto stay = [&](int i) {
    double x = g.coordinate(0, i);
    return std::min(x * x, 4.0) / s.discount;
  };
  auto v = oracle::impulse_chain_values(25, stay, {4, 8}, {1.0, 1.5});
  for (int i = 0; i < 25; ++i) CHECK(std::abs(r.value.at(0, 0, i) - v[i]) <= 1e-9);
  CHECK(v[0] == 1.5);
}

TEST_CASE("zero initialization climbs monotonically below the bound") {
  ProblemSpec s = testing::bundled("drift.toml");
  GridSpec g({51}, s.box);
  SolveResult r = solve(s, g, SolverConfig{});
  REQUIRE(r.converged);
  CHECK(r.monotone);
  for (double v : r.value.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= r.upper_bound + 1e-12);
  }
}

TEST_CASE("non-convergence still returns the partial field") {
  ProblemSpec s = testing::bundled("constant_cost.toml");
  GridSpec g({101}, s.box);
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.max_iterations = 1;
  SolveResult r = solve(s, g, cfg);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.value.data().size() == 101);
  CHECK(r.value.data()[0] == doctest::Approx((1.0 - std::exp(-0.05)) / 0.5).epsilon(1e-15));
}

TEST_CASE("custom initialization must match the grid") {
  ProblemSpec s = testing::bundled("mode_selection.toml");
  GridSpec g({21}, s.box);
  SolverConfig cfg;
  cfg.init = Initialization::Custom;
  CHECK_THROWS(solve(s, g, cfg));
  cfg.custom_init = ValueField(g, 1, 2, 1.0);
  SolveResult r = solve(s, g, cfg);
  CHECK(r.converged);
  CHECK(max_dev(r.value, 0, 0, 1.5) <= 1e-8);
}

TEST_CASE("default time step and warnings") {
  ProblemSpec s = testing::bundled("drift.toml");
  GridSpec g({201}, s.box);
  CHECK(dynamics_sup(s, g) == 1.0);
  CHECK(default_time_step(s, g) == doctest::Approx(0.01).epsilon(1e-14));
  SolverConfig cfg;
  cfg.dt = 5.0;
  cfg.max_iterations = 3;
  SolveResult r = solve(s, g, cfg);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("refining the mode selection grid leaves the value unchanged") {
  ProblemSpec s = testing::bundled("mode_selection.toml");
  GridSpec coarse({21}, s.box), fine({41}, s.box);
  SolveResult a = solve(s, coarse, SolverConfig{});
  SolveResult b = solve(s, fine, SolverConfig{});
  CHECK(b.dt == doctest::Approx(a.dt / 2).epsilon(1e-14));
  for (double x : {-1.0, -0.35, 0.0, 0.6, 1.0})
    for (int d = 0; d < 2; ++d)
      CHECK(std::abs(a.value.interpolate(0, d, Vector::Constant(1, x)) -
                     b.value.interpolate(0, d, Vector::Constant(1, x))) <= 1e-9);
}

TEST_CASE("successive refinements of a smooth problem get closer") {
  ProblemSpec s = testing::bundled("drift.toml");
  std::vector<ValueField> fields;
  for (int n : {26, 51, 101, 201}) fields.push_back(solve(s, GridSpec({n}, s.box), SolverConfig{}).value);
  auto diff = [&](const ValueField& a, const ValueField& b) {
    double m = 0.0;
    for (std::size_t p = 0; p < a.points(); ++p) {
      Vector x = a.grid().point(p);
      m = std::max(m, std::abs(a.data()[p] - b.interpolate(0, 0, x)));
    }
    return m;
  };
  double d1 = diff(fields[0], fields[1]), d2 = diff(fields[1], fields[2]), d3 = diff(fields[2], fields[3]);
  CHECK(d2 < d1);
  CHECK(d3 < d2);
}

TEST_CASE("balanced switching loops admit a continuum of fixed points") {
  ProblemSpec s = spec_from_text(kBalancedSquare);
  YongConditions y = check_y1_y2(s);
  CHECK_FALSE(y.nonzero_loop);
  GridSpec g({3}, s.box);
  SolverConfig lo, hi;
  hi.init = Initialization::Upper;
  SolveResult a = solve(s, g, lo);
  SolveResult b = solve(s, g, hi);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  // V = (s, s+1, s+1, s) on (a1a2, a1b2, b1a2, b1b2) is fixed for any s in [0, 2].
  CHECK(max_dev(a.value, 0, 0, 0.0) <= 1e-9);
  CHECK(max_dev(a.value, 0, 1, 1.0) <= 1e-9);
  CHECK(max_dev(b.value, 0, 0, 2.0) <= 1e-9);
  CHECK(max_dev(b.value, 1, 0, 3.0) <= 1e-9);
  CHECK(sup_distance(a.value, b.value) > 1.9);
  for (double level : {0.0, 0.5, 1.7, 2.0}) {
    ValueField V(g, 2, 2);
    for (std::size_t p = 0; p < 3; ++p) {
      V.at(0, 0, p) = level;
      V.at(0, 1, p) = level + 1;
      V.at(1, 0, p) = level + 1;
      V.at(1, 1, p) = level;
    }
    CHECK(sup_distance(bellman_update(V, s, 0.1, HamiltonianVariant::Plus), V) <= 1e-14);
  }
}
