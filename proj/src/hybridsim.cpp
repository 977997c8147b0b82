#include "hybrid/hybridsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace hybrid {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

PolicyDecision decide_with(const Model& model, const Matrix& semigroup, const ValueField& V, const Vector& x,
                           ModePair modes, double dt, double action_tol, HamiltonianVariant variant) {
  const ProblemSpec& s = model.spec();
  const double v = V.interpolate(modes.d1, modes.d2, x);
  PolicyDecision d;

  int arg = -1;
  double jump = impulse_obstacle(V, s, x, modes.d1, modes.d2, &arg);
  if (arg >= 0 && jump <= v + action_tol) {
    d.kind = PolicyDecision::Kind::Impulse;
    d.target = arg;
    return d;
  }
  double lower = switch_obstacle_lower_at(V, s, x, modes.d1, modes.d2, &arg);
  if (arg >= 0 && lower <= v + action_tol) {
    d.kind = PolicyDecision::Kind::SwitchPlayer2;
    d.target = arg;
    return d;
  }
  double upper = switch_obstacle_upper_at(V, s, x, modes.d1, modes.d2, &arg);
  if (arg >= 0 && upper >= v - action_tol) {
    d.kind = PolicyDecision::Kind::SwitchPlayer1;
    d.target = arg;
    return d;
  }

  const int n1 = static_cast<int>(s.u1_levels.size()), n2 = static_cast<int>(s.u2_levels.size());
  const int pair = s.pair_index(modes);
  const double decay = std::exp(-s.discount * dt);
  const double w = quadrature_weight(s.discount, dt);
  std::vector<double> table(static_cast<std::size_t>(n1) * n2);
  Vector f(s.dimension), foot(s.dimension);
  const auto slice = V.slice(pair);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const double u1 = s.u1_levels[i], u2 = s.u2_levels[j];
      model.dynamics(pair, x.data(), u1, u2, f.data());
      propagate(semigroup, x.data(), f.data(), dt, s.dimension, foot.data());
      table[i * n2 + j] = w * model.running_cost(pair, x.data(), u1, u2) +
                          decay * evaluate(V.grid(), slice, locate(V.grid(), foot.data()));
    }
  }
  auto choice = saddle(table, n1, n2, variant);
  d.u1 = choice.u1;
  d.u2 = choice.u2;
  return d;
}

}  // namespace

std::string_view to_string(PolicyDecision::Kind k) {
  switch (k) {
    case PolicyDecision::Kind::Continue: return "continue";
    case PolicyDecision::Kind::SwitchPlayer1: return "switch1";
    case PolicyDecision::Kind::SwitchPlayer2: return "switch2";
    case PolicyDecision::Kind::Impulse: return "impulse";
  }
  return "?";
}

PolicyDecision decide(const Model& model, const ValueField& V, const Vector& x, ModePair modes, double dt,
                      double action_tol, HamiltonianVariant variant) {
  return decide_with(model, semigroup_step(model.spec().generator, dt), V, x, modes, dt, action_tol, variant);
}

PolicyDecision decide(const ProblemSpec& spec, const ValueField& V, const Vector& x, ModePair modes, double dt,
                      double action_tol, HamiltonianVariant variant) {
  return decide(Model(spec), V, x, modes, dt, action_tol, variant);
}

HybridTrajectory simulate(const ProblemSpec& spec, const ValueField& V, const Vector& x0, ModePair start,
                          const SimulationOptions& opt) {
  if (!(opt.dt > 0.0) || !(opt.horizon > 0.0)) throw std::invalid_argument("simulate: dt and horizon must be > 0");
  if (V.m1() != spec.m1() || V.m2() != spec.m2() || V.grid().dimension() != spec.dimension)
    throw std::invalid_argument("simulate: value field does not match the problem");
  Model model(spec);
  const Matrix semigroup = semigroup_step(spec.generator, opt.dt);
  const double w = quadrature_weight(spec.discount, opt.dt);
  const long steps = std::lround(std::ceil(opt.horizon / opt.dt - 1e-9));

  HybridTrajectory traj;
  traj.dt = opt.dt;
  traj.discount = spec.discount;
  Vector x = spec.clamp(x0);
  ModePair modes = start;
  Vector f(spec.dimension), next(spec.dimension);

  for (long n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * opt.dt;
    const double disc = std::exp(-spec.discount * t);
    bool impulsed = false, switched1 = false, switched2 = false;
    std::string events;
    PolicyDecision d;
    for (;;) {
      d = decide_with(model, semigroup, V, x, modes, opt.dt, opt.action_tol, opt.variant);
      if (d.kind == PolicyDecision::Kind::Continue) break;
      if (!events.empty()) events += ";";
      if (d.kind == PolicyDecision::Kind::Impulse) {
        if (impulsed)
          throw SimulationError("second impulse requested at t = " + fmt(t) + "; action_tol is too large");
        impulsed = true;
        const Impulse& im = spec.impulses[d.target];
        traj.impulses.push_back({t, d.target, im.jump, im.cost});
        traj.impulse_total += disc * im.cost;
        x = spec.clamp(x + im.jump);
        events += "impulse:" + std::to_string(d.target);
      } else if (d.kind == PolicyDecision::Kind::SwitchPlayer2) {
        if (switched2)
          throw SimulationError("second player-2 switch requested at t = " + fmt(t) + "; action_tol is too large");
        switched2 = true;
        double c = spec.switch_cost_2(modes.d2, d.target);
        traj.player2_switches.push_back({t, modes.d2, d.target, c});
        traj.switch2_total += disc * c;
        events += "switch2:" + spec.d2_labels[modes.d2] + ">" + spec.d2_labels[d.target];
        modes.d2 = d.target;
      } else {
        if (switched1)
          throw SimulationError("second player-1 switch requested at t = " + fmt(t) + "; action_tol is too large");
        switched1 = true;
        double c = spec.switch_cost_1(modes.d1, d.target);
        traj.player1_switches.push_back({t, modes.d1, d.target, c});
        traj.switch1_total += disc * c;
        events += "switch1:" + spec.d1_labels[modes.d1] + ">" + spec.d1_labels[d.target];
        modes.d1 = d.target;
      }
    }

    const double u1 = spec.u1_levels[d.u1], u2 = spec.u2_levels[d.u2];
    const int pair = spec.pair_index(modes);
    TrajectorySample sample;
    sample.time = t;
    sample.state = x;
    sample.modes = modes;
    sample.u1 = u1;
    sample.u2 = u2;
    sample.running_cost = model.running_cost(pair, x.data(), u1, u2);
    sample.events = std::move(events);
    traj.running_total += disc * w * sample.running_cost;
    traj.samples.push_back(std::move(sample));

    model.dynamics(pair, x.data(), u1, u2, f.data());
    propagate(semigroup, x.data(), f.data(), opt.dt, spec.dimension, next.data());
    x = spec.clamp(next);
  }
  return traj;
}

double evaluate_cost(const HybridTrajectory& traj, double discount) {
  const double w = quadrature_weight(discount, traj.dt);
  double running = 0.0, s1 = 0.0, s2 = 0.0, imp = 0.0;
  for (const auto& s : traj.samples) running += std::exp(-discount * s.time) * w * s.running_cost;
  for (const auto& e : traj.player1_switches) s1 += std::exp(-discount * e.time) * e.cost;
  for (const auto& e : traj.player2_switches) s2 += std::exp(-discount * e.time) * e.cost;
  for (const auto& e : traj.impulses) imp += std::exp(-discount * e.time) * e.cost;
  return running - s1 + s2 + imp;
}

RolloutReport rollout_value_gap(const ProblemSpec& spec, const ValueField& V,
                                const std::vector<std::pair<Vector, ModePair>>& starts,
                                const SimulationOptions& options) {
  RolloutReport rep;
  for (const auto& [x0, modes] : starts) {
    RolloutGap g;
    g.start = x0;
    g.modes = modes;
    g.cost = evaluate_cost(simulate(spec, V, x0, modes, options), spec.discount);
    g.value = V.interpolate(modes.d1, modes.d2, spec.clamp(x0));
    g.gap = std::abs(g.cost - g.value);
    g.relative_gap = g.gap / std::max(std::abs(g.value), 1e-12);
    rep.max_gap = std::max(rep.max_gap, g.gap);
    rep.max_relative_gap = std::max(rep.max_relative_gap, g.relative_gap);
    rep.rows.push_back(std::move(g));
  }
  return rep;
}

std::string trajectory_csv(const ProblemSpec& spec, const HybridTrajectory& traj) {
  std::ostringstream out;
  out << "time";
  for (int i = 0; i < spec.dimension; ++i) out << ",x" << i;
  out << ",d1,d2,u1,u2,events,running,switch1,switch2,impulse\n";
  const double w = quadrature_weight(traj.discount, traj.dt);
  double running = 0.0, s1 = 0.0, s2 = 0.0, imp = 0.0;
  std::size_t i1 = 0, i2 = 0, ii = 0;
  for (const auto& s : traj.samples) {
    for (; i1 < traj.player1_switches.size() && traj.player1_switches[i1].time <= s.time; ++i1)
      s1 += std::exp(-traj.discount * traj.player1_switches[i1].time) * traj.player1_switches[i1].cost;
    for (; i2 < traj.player2_switches.size() && traj.player2_switches[i2].time <= s.time; ++i2)
      s2 += std::exp(-traj.discount * traj.player2_switches[i2].time) * traj.player2_switches[i2].cost;
    for (; ii < traj.impulses.size() && traj.impulses[ii].time <= s.time; ++ii)
      imp += std::exp(-traj.discount * traj.impulses[ii].time) * traj.impulses[ii].cost;
    running += std::exp(-traj.discount * s.time) * w * s.running_cost;
    out << fmt(s.time);
    for (int i = 0; i < spec.dimension; ++i) out << "," << fmt(s.state[i]);
    out << "," << spec.d1_labels[s.modes.d1] << "," << spec.d2_labels[s.modes.d2] << "," << fmt(s.u1) << ","
        << fmt(s.u2) << "," << s.events << "," << fmt(running) << "," << fmt(s1) << "," << fmt(s2) << ","
        << fmt(imp) << "\n";
  }
  return out.str();
}

}  // namespace hybrid
