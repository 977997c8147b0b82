#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybrid/config.hpp"
#include "hybrid/grid.hpp"
#include "hybrid/hybridsim.hpp"
#include "hybrid/problem.hpp"
#include "hybrid/solver.hpp"

namespace hybrid::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kParseError = 1;
inline constexpr int kAssumptionViolation = 2;
inline constexpr int kNotConverged = 3;
inline constexpr int kArtifactMismatch = 4;
inline constexpr int kVerificationFailed = 5;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kValidationSamples = 2000;

/// A value CSV or other artifact that does not fit the problem at hand.
class ArtifactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a config file holds: the problem plus [grid], [solver] and
/// [simulation] defaults.
struct RunConfig {
  ProblemSpec spec;
  std::vector<int> points;
  SolverConfig solver;
  std::optional<std::vector<double>> start;
  std::string start_d1, start_d2;
  SimulationOptions simulation;
};

RunConfig run_config_from_document(const config::Document& doc);
RunConfig load_run_config(const std::string& path);

/// Per-dimension counts; a single entry is broadcast to every dimension.
std::vector<int> expand_points(const std::vector<int>& points, int dimension);
GridSpec make_grid(const ProblemSpec& spec, const std::vector<int>& points);

std::string value_csv(const ProblemSpec& spec, const ValueField& V);
/// Parses a value CSV and checks it against `grid` and the modes of `spec`.
ValueField read_value_csv(const std::string& text, const ProblemSpec& spec, const GridSpec& grid);
ValueField load_value_csv(const std::string& path, const ProblemSpec& spec, const GridSpec& grid);

std::string history_csv(const SolveResult& r);
/// gnuplot data: one block per mode pair, blank-line separated.
std::string gnuplot_data(const ProblemSpec& spec, const ValueField& V);

struct RunManifest {
  std::string command;
  std::vector<std::string> config_paths;
  std::string solver;  // resolved settings, rendered as key = value pairs
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;

  std::string to_json() const;
};

struct ValidateArgs {
  std::string config;
};

struct SolveArgs {
  std::string config;
  std::vector<int> grid;
  std::optional<double> dt;
  std::optional<double> tol;
  std::optional<int> max_iters;
  std::optional<std::string> init;
  std::optional<std::string> init_value;  // value CSV for --init custom
  std::optional<std::string> variant;
  std::optional<std::string> out;
  std::optional<int> threads;
  bool plot = false;
};

struct SimulateArgs {
  std::string config;
  std::string value;
  std::optional<std::vector<double>> start;
  std::optional<std::string> d1, d2;
  std::optional<double> horizon;
  std::optional<double> dt;
  std::optional<std::string> out;
};

struct VerifyArgs {
  std::string config;
  std::vector<std::string> suites;
  std::uint64_t seed = 20070501;
  std::optional<std::string> value;
  std::optional<std::string> out;
  std::optional<int> threads;
};

struct AnalyzeArgs {
  std::string config;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err);
int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);

}  // namespace hybrid::cli
