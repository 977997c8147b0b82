#include "hybrid/cli.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "hybrid/operators.hpp"
#include "hybrid/parallel.hpp"
#include "hybrid/verify.hpp"

namespace hybrid::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error("cannot write " + path.string());
  o << text;
}

fs::path output_dir(const std::string& config, const std::optional<std::string>& out) {
  if (out) return fs::path(*out);
  fs::path p = fs::path(config).parent_path();
  return p.empty() ? fs::path(".") : p;
}

std::string stem(const std::string& config) { return fs::path(config).stem().string(); }

int mode_index(const std::vector<std::string>& labels, const std::string& label, const char* who) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw std::invalid_argument(std::string("unknown ") + who + " mode '" + label + "'");
  return static_cast<int>(it - labels.begin());
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0') throw ArtifactError("bad number '" + t + "' in " + what);
  return v;
}

std::string solver_summary(const SolverConfig& c, double dt, const std::vector<int>& points) {
  std::ostringstream o;
  o << "dt = " << fmt(dt) << "; tolerance = " << fmt(c.tolerance) << "; max_iterations = " << c.max_iterations
    << "; init = " << to_string(c.init) << "; variant = " << to_string(c.variant) << "; threads = " << c.threads
    << "; points = ";
  for (std::size_t i = 0; i < points.size(); ++i) o << (i ? "x" : "") << points[i];
  return o.str();
}

// Shared front half of solve/simulate/verify: load, then refuse specs that
// fail the blocking validation checks.
struct Loaded {
  RunConfig run;
  GridSpec grid;
};

std::optional<int> load_and_gate(const std::string& path, Loaded& l, std::ostream& err) {
  l.run = load_run_config(path);
  ValidationReport rep = validate_a2(l.run.spec, kValidationSamples);
  if (rep.blocking()) {
    err << "error: " << path << " violates the problem assumptions\n" << rep.to_text();
    return kAssumptionViolation;
  }
  l.grid = make_grid(l.run.spec, l.run.points);
  return std::nullopt;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const expr::ParseError& e) {
    err << "parse error at offset " << e.offset() << ": " << e.what() << "\n";
    return kParseError;
  } catch (const config::ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kParseError;
  } catch (const SpecError& e) {
    err << "spec error: " << e.what() << "\n";
    return kParseError;
  } catch (const ArtifactError& e) {
    err << "artifact mismatch: " << e.what() << "\n";
    return kArtifactMismatch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kParseError;
  }
}

}  // namespace

RunConfig run_config_from_document(const config::Document& doc) {
  RunConfig r;
  r.spec = spec_from_document(doc);
  const int n = r.spec.dimension;
  r.points = {101};
  if (const auto* g = doc.find("grid"); g && g->has("points")) {
    const auto& v = g->at("points");
    if (v.is_array()) {
      r.points.clear();
      for (double p : v.as_numbers("grid.points")) r.points.push_back(static_cast<int>(p));
    } else {
      r.points = {static_cast<int>(v.as_integer("grid.points"))};
    }
  }
  r.points = expand_points(r.points, n);

  if (const auto* s = doc.find("solver")) {
    if (s->has("dt")) r.solver.dt = s->at("dt").as_number("solver.dt");
    if (s->has("tolerance")) r.solver.tolerance = s->at("tolerance").as_number("solver.tolerance");
    if (s->has("max_iterations"))
      r.solver.max_iterations = static_cast<int>(s->at("max_iterations").as_integer("solver.max_iterations"));
    if (s->has("init")) r.solver.init = parse_initialization(s->at("init").as_string("solver.init"));
    if (s->has("variant")) r.solver.variant = parse_variant(s->at("variant").as_string("solver.variant"));
    if (s->has("threads")) r.solver.threads = static_cast<int>(s->at("threads").as_integer("solver.threads"));
  }
  if (r.solver.init == Initialization::Custom)
    throw config::ConfigError("solver.init = \"custom\" is only available from the command line with --init-value");

  r.start_d1 = r.spec.d1_labels.front();
  r.start_d2 = r.spec.d2_labels.front();
  if (const auto* s = doc.find("simulation")) {
    if (s->has("start")) {
      auto x = s->at("start").as_numbers("simulation.start");
      if (static_cast<int>(x.size()) != n) throw config::ConfigError("simulation.start has the wrong dimension");
      r.start = x;
    }
    if (s->has("d1")) r.start_d1 = s->at("d1").as_string("simulation.d1");
    if (s->has("d2")) r.start_d2 = s->at("d2").as_string("simulation.d2");
    if (s->has("horizon")) r.simulation.horizon = s->at("horizon").as_number("simulation.horizon");
    if (s->has("dt")) r.simulation.dt = s->at("dt").as_number("simulation.dt");
    if (s->has("action_tol")) r.simulation.action_tol = s->at("action_tol").as_number("simulation.action_tol");
  }
  r.simulation.variant = r.solver.variant;
  return r;
}

RunConfig load_run_config(const std::string& path) {
  if (!fs::exists(path)) throw config::ConfigError("no such file: " + path);
  return run_config_from_document(config::load(path));
}

std::vector<int> expand_points(const std::vector<int>& points, int dimension) {
  std::vector<int> out = points;
  if (out.size() == 1) out.assign(dimension, points.front());
  if (static_cast<int>(out.size()) != dimension)
    throw config::ConfigError("grid points list has " + std::to_string(points.size()) + " entries for dimension " +
                              std::to_string(dimension));
  for (int p : out)
    if (p < 2) throw config::ConfigError("grid needs at least 2 points per dimension");
  return out;
}

GridSpec make_grid(const ProblemSpec& spec, const std::vector<int>& points) {
  return GridSpec(expand_points(points, spec.dimension), spec.box);
}

std::string value_csv(const ProblemSpec& spec, const ValueField& V) {
  const GridSpec& g = V.grid();
  std::ostringstream o;
  o << "# hybrid-isaacs value field\n";
  o << "# dimension = " << g.dimension() << "\n";
  o << "# points =";
  for (int c : g.counts()) o << " " << c;
  o << "\n# box =";
  for (const auto& iv : g.box()) o << " " << fmt(iv.low) << ":" << fmt(iv.high);
  o << "\n# d1_labels =";
  for (const auto& l : spec.d1_labels) o << " " << l;
  o << "\n# d2_labels =";
  for (const auto& l : spec.d2_labels) o << " " << l;
  o << "\nd1,d2";
  for (int i = 0; i < g.dimension(); ++i) o << ",x" << i;
  o << ",V\n";
  std::vector<double> x(g.dimension());
  for (int a = 0; a < V.m1(); ++a)
    for (int b = 0; b < V.m2(); ++b)
      for (std::size_t p = 0; p < g.size(); ++p) {
        g.point(p, x.data());
        o << spec.d1_labels[a] << "," << spec.d2_labels[b];
        for (double xi : x) o << "," << fmt(xi);
        o << "," << fmt(V.at(a, b, p)) << "\n";
      }
  return o.str();
}

ValueField read_value_csv(const std::string& text, const ProblemSpec& spec, const GridSpec& grid) {
  std::istringstream in(text);
  std::string line;
  std::vector<int> counts;
  std::vector<Interval> box;
  bool header = false;
  ValueField V(grid, spec.m1(), spec.m2(), 0.0);
  std::size_t row = 0;
  const std::size_t expected = grid.size() * static_cast<std::size_t>(spec.pair_count());
  std::vector<double> node(grid.dimension());
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(line.substr(1, eq - 1));
      std::istringstream vals(line.substr(eq + 1));
      std::string tok;
      if (key == "points") {
        while (vals >> tok) counts.push_back(static_cast<int>(to_double(tok, "points metadata")));
      } else if (key == "box") {
        while (vals >> tok) {
          auto c = tok.find(':');
          if (c == std::string::npos) throw ArtifactError("bad box metadata '" + tok + "'");
          box.push_back({to_double(tok.substr(0, c), "box metadata"), to_double(tok.substr(c + 1), "box metadata")});
        }
      }
      continue;
    }
    if (!header) {
      header = true;
      if (counts != grid.counts()) throw ArtifactError("value field grid points do not match the problem grid");
      if (box.size() != grid.box().size()) throw ArtifactError("value field box does not match the problem box");
      for (std::size_t d = 0; d < box.size(); ++d) {
        const double scale = 1e-12 * (1.0 + std::abs(grid.box()[d].low) + std::abs(grid.box()[d].high));
        if (std::abs(box[d].low - grid.box()[d].low) > scale || std::abs(box[d].high - grid.box()[d].high) > scale)
          throw ArtifactError("value field box does not match the problem box");
      }
      continue;
    }
    if (row >= expected) throw ArtifactError("value field has more rows than the grid");
    auto cells = split(line, ',');
    if (static_cast<int>(cells.size()) != grid.dimension() + 3)
      throw ArtifactError("value field row " + std::to_string(row + 1) + " has the wrong number of columns");
    const int pair = static_cast<int>(row / grid.size());
    const std::size_t p = row % grid.size();
    const int a = pair / spec.m2(), b = pair % spec.m2();
    if (cells[0] != spec.d1_labels[a] || cells[1] != spec.d2_labels[b])
      throw ArtifactError("value field row " + std::to_string(row + 1) + " has unexpected mode labels");
    grid.point(p, node.data());
    for (int d = 0; d < grid.dimension(); ++d) {
      double x = to_double(cells[2 + d], "value field");
      if (std::abs(x - node[d]) > 1e-9 * (1.0 + std::abs(node[d])))
        throw ArtifactError("value field row " + std::to_string(row + 1) + " is not on the problem grid");
    }
    V.at(a, b, p) = to_double(cells.back(), "value field");
    ++row;
  }
  if (!header) throw ArtifactError("value field has no header");
  if (row != expected)
    throw ArtifactError("value field has " + std::to_string(row) + " rows, expected " + std::to_string(expected));
  return V;
}

ValueField load_value_csv(const std::string& path, const ProblemSpec& spec, const GridSpec& grid) {
  return read_value_csv(read_file(path), spec, grid);
}

std::string history_csv(const SolveResult& r) {
  std::ostringstream o;
  o << "iteration,change\n";
  for (std::size_t i = 0; i < r.history.size(); ++i) o << i + 1 << "," << fmt(r.history[i]) << "\n";
  return o.str();
}

std::string gnuplot_data(const ProblemSpec& spec, const ValueField& V) {
  const GridSpec& g = V.grid();
  std::ostringstream o;
  std::vector<double> x(g.dimension());
  bool first = true;
  for (int a = 0; a < V.m1(); ++a)
    for (int b = 0; b < V.m2(); ++b) {
      if (!first) o << "\n\n";
      first = false;
      o << "# modes " << spec.pair_key(a, b) << "\n";
      for (std::size_t p = 0; p < g.size(); ++p) {
        g.point(p, x.data());
        // blank line between scan lines for 2-D surfaces
        if (g.dimension() >= 2 && p > 0 && p % g.counts().back() == 0) o << "\n";
        for (double xi : x) o << fmt(xi) << " ";
        o << fmt(V.at(a, b, p)) << "\n";
      }
    }
  return o.str();
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_paths"] = config_paths;
  j["solver"] = solver;
  j["seed"] = seed;
  j["versions"] = {{"hybrid-isaacs", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"compiler", __VERSION__}};
  j["timings"] = {{"wall_seconds", wall_seconds}};
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

int cmd_validate(const ValidateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig run = load_run_config(args.config);
    ValidationReport rep = validate_a2(run.spec, kValidationSamples);
    const fs::path dir = output_dir(args.config, std::nullopt);
    write_file(dir / (stem(args.config) + ".validation.txt"), rep.to_text());
    write_file(dir / (stem(args.config) + ".validation.kv"), rep.to_kv());
    out << rep.to_text();
    if (rep.blocking()) {
      for (const auto& c : rep.checks)
        if (c.mandatory && c.status == CheckStatus::Fail) err << "violation: " << c.name << ": " << c.detail << "\n";
      return kAssumptionViolation;
    }
    return kOk;
  });
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    Loaded l;
    if (auto code = load_and_gate(args.config, l, err)) return *code;
    RunConfig& run = l.run;
    if (!args.grid.empty()) {
      run.points = expand_points(args.grid, run.spec.dimension);
      l.grid = make_grid(run.spec, run.points);
    }
    SolverConfig cfg = run.solver;
    if (args.dt) cfg.dt = *args.dt;
    if (args.tol) cfg.tolerance = *args.tol;
    if (args.max_iters) cfg.max_iterations = *args.max_iters;
    if (args.variant) cfg.variant = parse_variant(*args.variant);
    if (args.init) cfg.init = parse_initialization(*args.init);
    cfg.threads = args.threads ? *args.threads : (run.solver.threads > 1 ? run.solver.threads : default_threads());
    if (cfg.init == Initialization::Custom) {
      if (!args.init_value) throw std::invalid_argument("--init custom requires --init-value");
      cfg.custom_init = load_value_csv(*args.init_value, run.spec, l.grid);
    }
    if (!cfg.dt) cfg.dt = default_time_step(run.spec, l.grid);

    SolveResult r = solve(run.spec, l.grid, cfg);

    const fs::path dir = output_dir(args.config, args.out);
    const std::string base = stem(args.config);
    RunManifest m;
    m.command = "solve";
    m.config_paths = {args.config};
    m.solver = solver_summary(cfg, *cfg.dt, run.points);
    m.seed = 20070501;
    auto emit = [&](const std::string& name, const std::string& text) {
      write_file(dir / name, text);
      m.outputs.push_back((dir / name).string());
    };
    emit(base + ".value.csv", value_csv(run.spec, r.value));
    emit(base + ".history.csv", history_csv(r));
    if (args.plot) emit(base + ".value.dat", gnuplot_data(run.spec, r.value));
    const fs::path manifest = dir / (base + ".manifest.json");
    m.outputs.push_back(manifest.string());
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(manifest, m.to_json());

    for (const auto& w : r.warnings) err << "warning: " << w << "\n";
    out << "iterations = " << r.iterations << "\n"
        << "final_change = " << fmt(r.final_change()) << "\n"
        << "converged = " << (r.converged ? "true" : "false") << "\n"
        << "monotone = " << (r.monotone ? "true" : "false") << "\n"
        << "dt = " << fmt(r.dt) << "\n";
    for (const auto& o : m.outputs) out << "wrote " << o << "\n";
    if (!r.converged) {
      err << "solver did not converge after " << r.iterations << " iterations (last change " << fmt(r.final_change())
          << ")\n";
      return kNotConverged;
    }
    return kOk;
  });
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Loaded l;
    if (auto code = load_and_gate(args.config, l, err)) return *code;
    RunConfig& run = l.run;
    const ProblemSpec& spec = run.spec;
    ValueField V = load_value_csv(args.value, spec, l.grid);

    SimulationOptions opt = run.simulation;
    if (args.horizon) opt.horizon = *args.horizon;
    if (args.dt) opt.dt = *args.dt;
    std::vector<double> start = args.start ? *args.start : run.start.value_or(std::vector<double>(spec.dimension, 0.0));
    if (static_cast<int>(start.size()) != spec.dimension)
      throw std::invalid_argument("--start needs " + std::to_string(spec.dimension) + " components");
    ModePair modes{mode_index(spec.d1_labels, args.d1.value_or(run.start_d1), "player-1"),
                   mode_index(spec.d2_labels, args.d2.value_or(run.start_d2), "player-2")};
    Vector x0 = Eigen::Map<const Vector>(start.data(), spec.dimension);

    HybridTrajectory traj = simulate(spec, V, x0, modes, opt);
    const double value = V.interpolate(modes.d1, modes.d2, spec.clamp(x0));

    std::ostringstream summary;
    summary << "running = " << fmt(traj.running_total) << "\n"
            << "switch1 = " << fmt(traj.switch1_total) << "\n"
            << "switch2 = " << fmt(traj.switch2_total) << "\n"
            << "impulse = " << fmt(traj.impulse_total) << "\n"
            << "J = " << fmt(traj.accumulated_cost()) << "\n"
            << "value = " << fmt(value) << "\n"
            << "gap = " << fmt(std::abs(traj.accumulated_cost() - value)) << "\n"
            << "events = " << traj.player1_switches.size() + traj.player2_switches.size() + traj.impulses.size()
            << "\n";

    const fs::path dir = output_dir(args.config, args.out);
    const std::string base = stem(args.config);
    write_file(dir / (base + ".trajectory.csv"), trajectory_csv(spec, traj));
    write_file(dir / (base + ".cost.txt"), summary.str());
    out << summary.str();
    out << "wrote " << (dir / (base + ".trajectory.csv")).string() << "\n";
    return kOk;
  });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    Loaded l;
    if (auto code = load_and_gate(args.config, l, err)) return *code;
    RunConfig& run = l.run;
    SolverConfig cfg = run.solver;
    cfg.threads = args.threads ? *args.threads : default_threads();
    VerifyOptions opt;
    opt.seed = args.seed;
    for (const auto& s : args.suites)
      for (const auto& part : split(s, ','))
        if (!trim(part).empty()) opt.suites.insert(trim(part));
    static const std::set<std::string> known{"obstacle", "impulse", "isaacs", "uniqueness", "probes", "dpp"};
    for (const auto& s : opt.suites)
      if (!known.count(s)) throw std::invalid_argument("unknown suite '" + s + "'");
    if (args.value) opt.field = load_value_csv(*args.value, run.spec, l.grid);

    VerificationReport rep = verify_all(run.spec, l.grid, cfg, opt);
    const fs::path dir = output_dir(args.config, args.out);
    write_file(dir / (stem(args.config) + ".verify.txt"), rep.to_text());
    write_file(dir / (stem(args.config) + ".verify.kv"), rep.to_kv());
    out << rep.to_text();
    if (!rep.passed()) {
      err << "verification failed\n";
      return kVerificationFailed;
    }
    return kOk;
  });
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig run = load_run_config(args.config);
    const ProblemSpec& spec = run.spec;
    GridSpec grid = make_grid(spec, run.points);
    YongConditions y = check_y1_y2(spec);
    ValidationReport rep = validate_a2(spec, kValidationSamples);
    out << y.to_text(spec);
    out << "isaacs_gap = " << fmt(isaacs_gap(spec, grid, 16)) << "\n";
    out << "lipschitz_f = " << fmt(rep.lipschitz_f) << "\n";
    out << "lipschitz_k = " << fmt(rep.lipschitz_k) << "\n";
    out << "f_sup = " << fmt(rep.f_sup) << "\n";
    out << "k_sup = " << fmt(rep.k_sup) << "\n";
    if (spec.discount > 0.0) out << "value_upper_bound = " << fmt(std::max(0.0, rep.k_sup) / spec.discount) << "\n";
    for (const auto& w : rep.warnings) out << "warning: " << w << "\n";
    return kOk;
  });
}

}  // namespace hybrid::cli
