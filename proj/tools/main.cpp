// hybrid-isaacs: validate, solve, simulate, verify and analyze switching /
// impulse differential games on a grid.
//
// Exit codes: 0 ok, 1 parse error, 2 assumption violation, 3 non-convergence,
// 4 artifact mismatch, 5 verification failure.

#include <CLI11.hpp>

#include <iostream>

#include "hybrid/cli.hpp"

int main(int argc, char** argv) {
  using namespace hybrid::cli;
  CLI::App app{"Grid solver for hybrid two-player differential games"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "check a problem file");
  validate->add_option("config", va.config)->required();

  SolveArgs sa;
  auto* solve = app.add_subcommand("solve", "compute the value field");
  solve->add_option("config", sa.config)->required();
  solve->add_option("--grid", sa.grid, "points per dimension");
  solve->add_option("--dt", sa.dt);
  solve->add_option("--tol", sa.tol);
  solve->add_option("--max-iters", sa.max_iters);
  solve->add_option("--init", sa.init, "zero, upper or custom");
  solve->add_option("--init-value", sa.init_value, "value CSV for --init custom");
  solve->add_option("--variant", sa.variant, "plus or minus");
  solve->add_option("--out", sa.out, "output directory");
  solve->add_option("--threads", sa.threads);
  solve->add_flag("--plot", sa.plot, "also write gnuplot data");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "roll out the feedback policy");
  simulate->add_option("config", sim.config)->required();
  simulate->add_option("value", sim.value)->required();
  simulate->add_option("--start", sim.start)->expected(1, 6);
  simulate->add_option("--d1", sim.d1);
  simulate->add_option("--d2", sim.d2);
  simulate->add_option("--horizon", sim.horizon);
  simulate->add_option("--dt", sim.dt);
  simulate->add_option("--out", sim.out);

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "run structural checks");
  verify->add_option("config", ver.config)->required();
  verify->add_option("--suite", ver.suites, "obstacle, impulse, isaacs, uniqueness, probes, dpp");
  verify->add_option("--seed", ver.seed);
  verify->add_option("--value", ver.value, "check this field instead of solving");
  verify->add_option("--out", ver.out);
  verify->add_option("--threads", ver.threads);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "print switching-cost conditions and bounds");
  analyze->add_option("config", an.config)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kParseError;
  }

  if (*validate) return cmd_validate(va, std::cout, std::cerr);
  if (*solve) return cmd_solve(sa, std::cout, std::cerr);
  if (*simulate) return cmd_simulate(sim, std::cout, std::cerr);
  if (*verify) return cmd_verify(ver, std::cout, std::cerr);
  return cmd_analyze(an, std::cout, std::cerr);
}
