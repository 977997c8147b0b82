#include "hybrid/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace hybrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string where(const ProblemSpec& spec, const GridSpec& grid, int d1, int d2, std::size_t p) {
  std::ostringstream out;
  out << "modes (" << spec.pair_key(d1, d2) << ") at x = [";
  Vector x = grid.point(p);
  for (int i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << "]";
  return out.str();
}

bool obstacles_inactive(const ProblemSpec& spec) {
  return spec.m1() == 1 && spec.m2() == 1 && spec.impulses.empty();
}

}  // namespace

std::string_view to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::Pass: return "pass";
    case VerifyStatus::Fail: return "fail";
    case VerifyStatus::NotApplicable: return "not-applicable";
    case VerifyStatus::Skipped: return "skipped";
  }
  return "?";
}

bool VerificationReport::passed() const {
  return std::none_of(checks.begin(), checks.end(),
                      [](const CheckResult& c) { return c.status == VerifyStatus::Fail; });
}

const CheckResult* VerificationReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string VerificationReport::to_text() const {
  std::ostringstream out;
  out << "verification report (seed " << seed << ")\n";
  for (const auto& c : checks) {
    out << "  [" << to_string(c.status) << "] " << c.name << " -- " << c.property << "\n";
    for (const auto& [k, v] : c.measured) out << "      " << k << " = " << fmt(v) << "\n";
    for (const auto& [k, v] : c.tolerances) out << "      tolerance " << k << " = " << fmt(v) << "\n";
    if (!c.note.empty()) out << "      note: " << c.note << "\n";
  }
  out << (passed() ? "RESULT: pass\n" : "RESULT: FAIL\n");
  return out.str();
}

std::string VerificationReport::to_kv() const {
  std::map<std::string, std::string> kv;
  kv["seed"] = std::to_string(seed);
  kv["result"] = passed() ? "pass" : "fail";
  for (const auto& c : checks) {
    const std::string base = "check." + c.name + ".";
    kv[base + "status"] = std::string(to_string(c.status));
    for (const auto& [k, v] : c.measured) kv[base + k] = fmt(v);
    for (const auto& [k, v] : c.tolerances) kv[base + "tolerance." + k] = fmt(v);
  }
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

CheckResult obstacle_chain_check(const ValueField& V, const ProblemSpec& spec, double tol) {
  CheckResult r;
  r.name = "obstacle_chain";
  r.property = "M+[V] <= V <= min(M-[V], N[V]) at every node and mode pair";
  r.tolerances["violation"] = tol;
  if (obstacles_inactive(spec)) {
    r.status = VerifyStatus::Pass;
    r.note = "single modes and no impulses; obstacles are +-inf and the chain holds vacuously";
    r.measured["max_violation"] = 0.0;
    return r;
  }
  // Impulse targets need interpolation, so reuse the tabulated operator path.
  BellmanOperator op(spec, V.grid(), 1.0, HamiltonianVariant::Plus);
  double worst = 0.0;
  std::string loc;
  for (int a = 0; a < spec.m1(); ++a)
    for (int b = 0; b < spec.m2(); ++b)
      for (std::size_t p = 0; p < V.points(); ++p) {
        const double v = V.at(a, b, p);
        const double below = switch_obstacle_upper(V, spec, p, a, b) - v;
        const double above = v - std::min(switch_obstacle_lower(V, spec, p, a, b),
                                          op.impulse_obstacle(V, spec.pair_index(a, b), p));
        const double viol = std::max(below, above);
        if (viol > worst) {
          worst = viol;
          loc = where(spec, V.grid(), a, b, p) + (below >= above ? " (below M+)" : " (above min(M-, N))");
        }
      }
  r.measured["max_violation"] = worst;
  r.status = worst <= tol ? VerifyStatus::Pass : VerifyStatus::Fail;
  if (!loc.empty()) r.note = "worst at " + loc;
  return r;
}

CheckResult post_impulse_strictness(const ValueField& V, const ProblemSpec& spec, double tol) {
  CheckResult r;
  r.name = "post_impulse_strictness";
  r.property = "after an optimal impulse, another impulse is strictly worse by the subadditivity margin";
  r.tolerances["binding_and_gap"] = tol;

  // Margin over in-list pairs only.
  std::optional<double> margin;
  const auto& imps = spec.impulses;
  for (std::size_t i = 0; i < imps.size(); ++i)
    for (std::size_t j = i; j < imps.size(); ++j) {
      Vector sum = imps[i].jump + imps[j].jump;
      for (const auto& k : imps)
        if ((k.jump - sum).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + sum.lpNorm<Eigen::Infinity>())) {
          double g = imps[i].cost + imps[j].cost - k.cost;
          margin = margin ? std::min(*margin, g) : g;
        }
    }
  if (!margin) {
    r.status = VerifyStatus::NotApplicable;
    r.note = imps.empty() ? "no impulses" : "no impulse pair sums to a listed impulse";
    return r;
  }
  r.measured["margin"] = *margin;

  const GridSpec& g = V.grid();
  double worst = kInf;
  std::size_t binding = 0;
  std::string loc;
  for (int a = 0; a < spec.m1(); ++a)
    for (int b = 0; b < spec.m2(); ++b)
      for (std::size_t p = 0; p < V.points(); ++p) {
        Vector x = g.point(p);
        int arg = -1;
        const double nval = impulse_obstacle(V, spec, x, a, b, &arg);
        if (arg < 0 || std::abs(V.at(a, b, p) - nval) > tol) continue;
        ++binding;
        Vector y = spec.clamp(x + imps[arg].jump);
        const double gap = impulse_obstacle(V, spec, y, a, b) - V.interpolate(a, b, y);
        if (gap < worst) {
          worst = gap;
          loc = where(spec, g, a, b, p);
        }
      }
  r.measured["binding_points"] = static_cast<double>(binding);
  if (binding == 0) {
    r.status = VerifyStatus::Pass;
    r.note = "impulse obstacle never binds";
    return r;
  }
  r.measured["min_post_impulse_gap"] = worst;
  r.status = worst >= *margin - tol ? VerifyStatus::Pass : VerifyStatus::Fail;
  r.note = "smallest gap at " + loc;
  return r;
}

CheckResult isaacs_value_equality(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config,
                                  int costate_samples) {
  CheckResult r;
  r.name = "isaacs_value_equality";
  r.property = "with equal min-max and max-min Hamiltonians, upper and lower value fields coincide";
  r.tolerances["isaacs_gap"] = 1e-12;
  r.tolerances["value_difference"] = 1e-12;
  const double gap = isaacs_gap(spec, grid, costate_samples);
  r.measured["isaacs_gap"] = gap;
  if (gap > 1e-12) {
    r.status = VerifyStatus::Skipped;
    r.note = "Isaacs condition fails on the sampled costates; equality not expected";
    return r;
  }
  SolverConfig plus = config, minus = config;
  plus.variant = HamiltonianVariant::Plus;
  minus.variant = HamiltonianVariant::Minus;
  SolveResult a = solve(spec, grid, plus);
  SolveResult b = solve(spec, grid, minus);
  const double diff = sup_distance(a.value, b.value);
  r.measured["value_difference"] = diff;
  r.measured["iterations_plus"] = a.iterations;
  r.measured["iterations_minus"] = b.iterations;

  // Interpolated one-step tables are only saddle-separable when u2 leaves the
  // foot of the characteristic alone; otherwise the scheme itself splits the values.
  BellmanOperator op_plus(spec, grid, a.dt, HamiltonianVariant::Plus);
  BellmanOperator op_minus(spec, grid, a.dt, HamiltonianVariant::Minus);
  ValueField cp(grid, spec.m1(), spec.m2()), cm = cp;
  op_plus.apply_continuation(a.value, cp);
  op_minus.apply_continuation(a.value, cm);
  const double table_gap = sup_distance(cp, cm);
  r.measured["discrete_table_gap"] = table_gap;
  r.tolerances["discrete_table_gap"] = 1e-12;
  if (table_gap > 1e-12) {
    r.status = VerifyStatus::Skipped;
    r.note = "Hamiltonians agree but the interpolated one-step tables do not; value difference is scheme error";
    return r;
  }
  r.status = (diff <= 1e-12 && a.converged && b.converged) ? VerifyStatus::Pass : VerifyStatus::Fail;
  if (!a.converged || !b.converged) r.note = "a solve did not converge";
  return r;
}

CheckResult two_sided_uniqueness(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config) {
  CheckResult r;
  r.name = "two_sided_uniqueness";
  r.property = "fixed points from the zero and upper initializations agree (empirical uniqueness surrogate)";
  r.tolerances["difference"] = 10.0 * config.tolerance;
  SolverConfig lo = config, hi = config;
  lo.init = Initialization::Zero;
  hi.init = Initialization::Upper;
  SolveResult a = solve(spec, grid, lo);
  SolveResult b = solve(spec, grid, hi);
  const double diff = sup_distance(a.value, b.value);
  r.measured["difference"] = diff;
  r.measured["iterations_zero"] = a.iterations;
  r.measured["iterations_upper"] = b.iterations;
  r.measured["monotone_zero"] = a.monotone ? 1.0 : 0.0;
  r.measured["monotone_upper"] = b.monotone ? 1.0 : 0.0;
  const bool ok = a.converged && b.converged && diff <= 10.0 * config.tolerance;
  r.status = ok ? VerifyStatus::Pass : VerifyStatus::Fail;
  if (!a.converged || !b.converged)
    r.note = std::string("non-convergent solve: zero-init ") + (a.converged ? "converged" : "did not converge") +
             ", upper-init " + (b.converged ? "converged" : "did not converge");
  return r;
}

CheckResult operator_probes(const ProblemSpec& spec, const GridSpec& grid, double dt, HamiltonianVariant variant,
                            int trials, std::uint64_t seed) {
  CheckResult r;
  r.name = "operator_probes";
  r.property = "T is monotone and sup-norm nonexpansive; the continuation branch shifts constants by exp(-lambda dt)";
  BellmanOperator op(spec, grid, dt, variant);
  const double q = op.discount_factor();
  const double scale = std::max(1.0, op.running_cost_sup() / spec.discount);
  const double slack = 1e-13 * scale;
  r.tolerances["rounding_slack"] = slack;
  r.tolerances["shift_identity"] = 1e-12;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> value(0.0, scale);
  std::uniform_real_distribution<double> bump(0.0, 0.5 * scale);
  std::uniform_real_distribution<double> shift(-0.5 * scale, 0.5 * scale);

  int mono = 0, nonexp = 0, contraction = 0;
  double shift_err = 0.0, cont_shift_err = 0.0;
  const bool inactive = obstacles_inactive(spec);
  ValueField V(grid, spec.m1(), spec.m2()), W = V, TV = V, TW = V;
  for (int t = 0; t < trials; ++t) {
    for (std::size_t i = 0; i < V.data().size(); ++i) {
      V.data()[i] = value(rng);
      W.data()[i] = V.data()[i] + bump(rng);
    }
    op.apply(V, TV);
    op.apply(W, TW);
    const double dist = sup_distance(V, W);
    const double tdist = sup_distance(TV, TW);
    for (std::size_t i = 0; i < V.data().size(); ++i)
      if (TV.data()[i] > TW.data()[i] + slack) {
        ++mono;
        break;
      }
    if (tdist > dist + slack) ++nonexp;
    if (inactive && tdist > q * dist + slack) ++contraction;

    // Constant shift W = V + c.
    const double c = shift(rng);
    for (std::size_t i = 0; i < V.data().size(); ++i) W.data()[i] = V.data()[i] + c;
    if (inactive) {
      op.apply(W, TW);
      for (std::size_t i = 0; i < V.data().size(); ++i)
        shift_err = std::max(shift_err, std::abs(TW.data()[i] - TV.data()[i] - q * c));
    }
    op.apply_continuation(V, TV);
    op.apply_continuation(W, TW);
    for (std::size_t i = 0; i < V.data().size(); ++i)
      cont_shift_err = std::max(cont_shift_err, std::abs(TW.data()[i] - TV.data()[i] - q * c));
  }
  r.measured["trials"] = trials;
  r.measured["monotonicity_violations"] = mono;
  r.measured["nonexpansiveness_violations"] = nonexp;
  r.measured["continuation_shift_error"] = cont_shift_err;
  if (inactive) {
    r.measured["contraction_violations"] = contraction;
    r.measured["shift_identity_error"] = shift_err;
  } else {
    r.note = "obstacles active; contraction and full-operator shift identity not expected";
  }
  const bool ok = mono == 0 && nonexp == 0 && contraction == 0 && shift_err <= 1e-12 && cont_shift_err <= 1e-12;
  r.status = ok ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

CheckResult dpp_consistency(const ValueField& V, const ProblemSpec& spec, double dt, HamiltonianVariant variant,
                            int m, double tol) {
  CheckResult r;
  r.name = "dpp_consistency_m" + std::to_string(m);
  r.property = "the m-step discrete dynamic programming relation holds at the fixed point";
  r.tolerances["additive"] = tol;
  BellmanOperator op(spec, V.grid(), dt, variant);
  ValueField cur = op.apply(V);
  const double eps = sup_distance(cur, V);
  ValueField next = cur;
  for (int i = 1; i < m; ++i) {
    op.apply(cur, next);
    std::swap(cur, next);
  }
  const double dist = sup_distance(cur, V);
  r.measured["fixed_point_residual"] = eps;
  r.measured["m_step_distance"] = dist;
  r.measured["bound"] = m * eps + tol;
  r.status = dist <= m * eps + tol ? VerifyStatus::Pass : VerifyStatus::Fail;
  return r;
}

VerificationReport verify_all(const ProblemSpec& spec, const GridSpec& grid, const SolverConfig& config,
                              const VerifyOptions& options) {
  VerificationReport rep;
  rep.seed = options.seed;
  auto want = [&](const char* s) { return options.suites.empty() || options.suites.count(s) != 0; };

  const bool need_field = want("obstacle") || want("impulse") || want("dpp");
  std::optional<ValueField> field = options.field;
  double dt = config.dt ? *config.dt : default_time_step(spec, grid);
  std::optional<SolveResult> solved;
  if (need_field && !field) {
    SolverConfig c = config;
    c.dt = dt;
    solved = solve(spec, grid, c);
    field = solved->value;
    if (!solved->converged) {
      CheckResult bad;
      bad.name = "solve";
      bad.property = "the fixed-point iteration converges";
      bad.status = VerifyStatus::Fail;
      bad.measured["iterations"] = solved->iterations;
      bad.measured["final_change"] = solved->final_change();
      rep.checks.push_back(bad);
    }
  }

  if (want("obstacle")) rep.checks.push_back(obstacle_chain_check(*field, spec, 1e-9));
  if (want("impulse")) rep.checks.push_back(post_impulse_strictness(*field, spec, 1e-6));
  if (want("isaacs")) {
    SolverConfig c = config;
    c.dt = dt;
    rep.checks.push_back(isaacs_value_equality(spec, grid, c));
  }
  if (want("uniqueness")) {
    SolverConfig c = config;
    c.dt = dt;
    rep.checks.push_back(two_sided_uniqueness(spec, grid, c));
  }
  if (want("probes")) {
    std::vector<int> counts = options.probe_points;
    if (counts.empty()) counts.assign(spec.dimension, 5);
    GridSpec small(counts, spec.box);
    rep.checks.push_back(operator_probes(spec, small, dt, config.variant, options.probe_trials, options.seed));
  }
  if (want("dpp"))
    for (int m : {1, 10, 100}) rep.checks.push_back(dpp_consistency(*field, spec, dt, config.variant, m, 1e-10));
  return rep;
}

}  // namespace hybrid
