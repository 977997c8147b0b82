#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "hybrid/cli.hpp"
#include "support.hpp"

using namespace hybrid;
using namespace hybrid::cli;
namespace fs = std::filesystem;

namespace {

std::string copy_spec(const fs::path& dir, const std::string& name) {
  fs::path to = dir / fs::path(name).filename();
  fs::copy_file(testing::spec_path(name), to, fs::copy_options::overwrite_existing);
  return to.string();
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(HYBRID_TOOL) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("validate exit codes and reports") {
  fs::path dir = testing::scratch("validate");
  std::ostringstream out, err;
  std::string good = copy_spec(dir, "mode_selection.toml");
  CHECK(cmd_validate({good}, out, err) == kOk);
  CHECK(fs::exists(dir / "mode_selection.validation.txt"));
  CHECK(fs::exists(dir / "mode_selection.validation.kv"));

  std::ostringstream e2;
  CHECK(cmd_validate({copy_spec(dir, "invalid/zero_switch_cost.toml")}, out, e2) == kAssumptionViolation);
  CHECK(e2.str().find("c0 > 0") != std::string::npos);

  std::ostringstream e1;
  CHECK(cmd_validate({copy_spec(dir, "invalid/malformed_expression.toml")}, out, e1) == kParseError);
  CHECK(e1.str().find("offset 5") != std::string::npos);

  CHECK(cmd_validate({copy_spec(dir, "invalid/not_subadditive.toml")}, out, err) == kAssumptionViolation);
  CHECK(cmd_validate({copy_spec(dir, "invalid/negative_cost.toml")}, out, err) == kAssumptionViolation);
  CHECK(cmd_validate({(dir / "missing.toml").string()}, out, err) == kParseError);
}

TEST_CASE("solve refuses invalid specs before iterating") {
  fs::path dir = testing::scratch("gate");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = copy_spec(dir, "invalid/negative_cost.toml");
  a.out = (dir / "out").string();
  CHECK(cmd_solve(a, out, err) == kAssumptionViolation);
  CHECK_FALSE(fs::exists(dir / "out" / "negative_cost.value.csv"));
}

TEST_CASE("solve writes the value field, history and manifest") {
  fs::path dir = testing::scratch("solve");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = copy_spec(dir, "constant_cost.toml");
  a.plot = true;
  REQUIRE(cmd_solve(a, out, err) == kOk);
  auto rows = csv_rows(testing::slurp(dir / "constant_cost.value.csv"));
  REQUIRE(rows.size() == 102);
  CHECK(rows[0] == std::vector<std::string>{"d1", "d2", "x0", "V"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::abs(std::stod(rows[i][3]) - 2.0) <= 1e-9);
  CHECK(fs::exists(dir / "constant_cost.history.csv"));
  CHECK(fs::exists(dir / "constant_cost.value.dat"));
  const std::string manifest = testing::slurp(dir / "constant_cost.manifest.json");
  for (const char* f : {"constant_cost.value.csv", "constant_cost.history.csv", "constant_cost.value.dat",
                        "constant_cost.manifest.json"})
    CHECK(manifest.find(f) != std::string::npos);
  CHECK(manifest.find("\"command\": \"solve\"") != std::string::npos);

  // Identical inputs give byte-identical artifacts.
  const std::string first = testing::slurp(dir / "constant_cost.value.csv");
  const std::string hist = testing::slurp(dir / "constant_cost.history.csv");
  REQUIRE(cmd_solve(a, out, err) == kOk);
  CHECK(testing::slurp(dir / "constant_cost.value.csv") == first);
  CHECK(testing::slurp(dir / "constant_cost.history.csv") == hist);
}

TEST_CASE("plus and minus variants give identical files on the separable spec") {
  fs::path dir = testing::scratch("variants");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = copy_spec(dir, "separable.toml");
  a.variant = "plus";
  a.out = (dir / "plus").string();
  REQUIRE(cmd_solve(a, out, err) == kOk);
  a.variant = "minus";
  a.out = (dir / "minus").string();
  REQUIRE(cmd_solve(a, out, err) == kOk);
  CHECK(testing::slurp(dir / "plus" / "separable.value.csv") == testing::slurp(dir / "minus" / "separable.value.csv"));
}

TEST_CASE("forced non-convergence exits 3 and keeps the partial field") {
  fs::path dir = testing::scratch("maxit");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = copy_spec(dir, "constant_cost.toml");
  a.max_iters = 1;
  CHECK(cmd_solve(a, out, err) == kNotConverged);
  CHECK(fs::exists(dir / "constant_cost.value.csv"));
  auto rows = csv_rows(testing::slurp(dir / "constant_cost.value.csv"));
  CHECK(rows.size() == 102);
}

TEST_CASE("value CSV round-trips and rejects foreign grids") {
  ProblemSpec s = testing::bundled("mode_selection.toml");
  GridSpec g({21}, s.box);
  ValueField V(g, 1, 2);
  for (std::size_t i = 0; i < V.data().size(); ++i) V.data()[i] = std::sin(0.37 * i) / 3.0;
  ValueField back = read_value_csv(value_csv(s, V), s, g);
  CHECK(back.data() == V.data());
  CHECK_THROWS_AS(read_value_csv(value_csv(s, V), s, GridSpec({11}, s.box)), ArtifactError);
  CHECK_THROWS_AS(read_value_csv(value_csv(s, V), s, GridSpec({21}, {{-1.0, 2.0}})), ArtifactError);
  std::string cut = value_csv(s, V);
  cut.erase(cut.rfind('\n', cut.size() - 2) + 1);
  CHECK_THROWS_AS(read_value_csv(cut, s, g), ArtifactError);
}

TEST_CASE("simulate") {
  fs::path dir = testing::scratch("simulate");
  std::ostringstream out, err;
  SolveArgs a;
  a.config = copy_spec(dir, "mode_selection.toml");
  REQUIRE(cmd_solve(a, out, err) == kOk);
  SimulateArgs s;
  s.config = a.config;
  s.value = (dir / "mode_selection.value.csv").string();
  s.d2 = "1";
  std::ostringstream sout;
  REQUIRE(cmd_simulate(s, sout, err) == kOk);
  auto rows = csv_rows(testing::slurp(dir / "mode_selection.trajectory.csv"));
  REQUIRE(rows.size() > 2);
  const std::size_t events = 6;
  CHECK(rows[0][events] == "events");
  int with_events = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!rows[i][events].empty()) ++with_events;
  CHECK(with_events == 1);
  CHECK(rows[1][events] == "switch2:1>2");
  CHECK(std::stod(rows[1][0]) == 0.0);
  const std::string summary = sout.str();
  auto at = summary.find("J = ");
  REQUIRE(at != std::string::npos);
  CHECK(std::abs(std::stod(summary.substr(at + 4)) - 1.5) <= 1e-5);

  // No events for the constant-cost game.
  SolveArgs c;
  c.config = copy_spec(dir, "constant_cost.toml");
  REQUIRE(cmd_solve(c, out, err) == kOk);
  SimulateArgs cs;
  cs.config = c.config;
  cs.value = (dir / "constant_cost.value.csv").string();
  cs.horizon = 2.0;
  REQUIRE(cmd_simulate(cs, out, err) == kOk);
  auto crows = csv_rows(testing::slurp(dir / "constant_cost.trajectory.csv"));
  for (std::size_t i = 1; i < crows.size(); ++i) CHECK(crows[i][events].empty());

  // A value field from another problem does not fit.
  SimulateArgs wrong = cs;
  wrong.value = s.value;
  std::ostringstream werr;
  CHECK(cmd_simulate(wrong, out, werr) == kArtifactMismatch);
}

TEST_CASE("verify") {
  fs::path dir = testing::scratch("verify");
  std::ostringstream out, err;
  VerifyArgs v;
  v.config = copy_spec(dir, "impulse_toy.toml");
  CHECK(cmd_verify(v, out, err) == kOk);
  CHECK(fs::exists(dir / "impulse_toy.verify.kv"));

  VerifyArgs c;
  c.config = copy_spec(dir, "coupled.toml");
  c.suites = {"isaacs"};
  std::ostringstream cout_;
  CHECK(cmd_verify(c, cout_, err) == kOk);
  CHECK(cout_.str().find("[skipped] isaacs_value_equality") != std::string::npos);
  CHECK(cout_.str().find("isaacs_gap = 2.0000000000000000e+00") != std::string::npos);

  // Hand a field that breaks the obstacle chain.
  ProblemSpec spec = testing::bundled("mode_selection.toml");
  GridSpec g({21}, spec.box);
  ValueField broken(g, 1, 2, 0.0);
  for (std::size_t p = 0; p < g.size(); ++p) broken.at(0, 0, p) = 3.0;
  const fs::path bad = dir / "broken.csv";
  {
    std::ofstream o(bad);
    o << value_csv(spec, broken);
  }
  VerifyArgs b;
  b.config = copy_spec(dir, "mode_selection.toml");
  b.value = bad.string();
  b.suites = {"obstacle,dpp"};
  CHECK(cmd_verify(b, out, err) == kVerificationFailed);

  VerifyArgs u = b;
  u.suites = {"nonsense"};
  CHECK(cmd_verify(u, out, err) == kParseError);
}

TEST_CASE("analyze") {
  std::ostringstream a, err;
  CHECK(cmd_analyze({testing::spec_path("anti_yong.toml")}, a, err) == kOk);
  CHECK(a.str().find("cheaper switching") != std::string::npos);
  CHECK(a.str().find("): fails\nnonzero loop") != std::string::npos);
  CHECK(a.str().find("loops): fails") != std::string::npos);

  std::ostringstream s;
  CHECK(cmd_analyze({testing::spec_path("separable.toml")}, s, err) == kOk);
  CHECK(s.str().find("isaacs_gap = 0.0000000000000000e+00") != std::string::npos);

  std::ostringstream m;
  CHECK(cmd_analyze({testing::spec_path("mode_selection.toml")}, m, err) == kOk);
  CHECK(m.str().find("vacuous") != std::string::npos);
}

TEST_CASE("the binary maps failures to documented exit codes") {
  fs::path dir = testing::scratch("binary");
  CHECK(run_tool("validate " + copy_spec(dir, "mode_selection.toml")) == 0);
  CHECK(run_tool("validate " + copy_spec(dir, "invalid/malformed_expression.toml")) == 1);
  CHECK(run_tool("validate " + copy_spec(dir, "invalid/zero_switch_cost.toml")) == 2);
  CHECK(run_tool("solve " + copy_spec(dir, "constant_cost.toml") + " --max-iters 1") == 3);
  CHECK(run_tool("solve " + copy_spec(dir, "mode_selection.toml") + " --grid 11") == 0);
  CHECK(run_tool("simulate " + (dir / "mode_selection.toml").string() + " " +
                 (dir / "mode_selection.value.csv").string()) == 4);
  CHECK(run_tool("analyze " + copy_spec(dir, "anti_yong.toml")) == 0);
  CHECK(run_tool("solve --no-such-flag") == 1);
}
