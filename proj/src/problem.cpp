#include "hybrid/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace hybrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows, int r, int c, const std::string& what) {
  if (static_cast<int>(rows.size()) != r)
    throw SpecError(what + ": expected " + std::to_string(r) + " rows, got " + std::to_string(rows.size()));
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    if (static_cast<int>(rows[i].size()) != c)
      throw SpecError(what + ": row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " entries, expected " + std::to_string(c));
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

expr::Expr parse_checked(const std::string& text, const std::vector<std::string>& names,
                         const std::string& where) {
  expr::Expr e;
  try {
    e = expr::parse(text);
  } catch (const expr::ParseError& err) {
    throw expr::ParseError(err.offset(), err.expected(), where + ": " + err.what());
  }
  for (const auto& v : expr::free_vars(e))
    if (std::find(names.begin(), names.end(), v) == names.end())
      throw SpecError(where + ": expression '" + text + "' references undeclared variable '" + v + "'");
  return e;
}

void check_labels(const std::vector<std::string>& labels, const std::string& what) {
  if (labels.empty()) throw SpecError(what + " must not be empty");
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (l.empty() || l.find(',') != std::string::npos || l.find('"') != std::string::npos)
      throw SpecError(what + ": invalid label '" + l + "' (must be nonempty, no ',' or '\"')");
    if (!seen.insert(l).second) throw SpecError(what + ": duplicate label '" + l + "'");
  }
}

double min_off_diagonal(const Matrix& c) {
  double m = kInf;
  for (int i = 0; i < c.rows(); ++i)
    for (int j = 0; j < c.cols(); ++j)
      if (i != j) m = std::min(m, c(i, j));
  return m;
}

}  // namespace

std::vector<std::string> ProblemSpec::variable_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < dimension; ++i) names.push_back("x" + std::to_string(i));
  names.push_back("u1");
  names.push_back("u2");
  return names;
}

Vector ProblemSpec::clamp(const Vector& x) const {
  Vector y = x;
  for (int i = 0; i < dimension; ++i) y[i] = std::clamp(y[i], box[i].low, box[i].high);
  return y;
}

Model::Model(const ProblemSpec& spec) : spec_(spec) {
  auto names = spec_.variable_names();
  for (const auto& comps : spec_.dynamics) {
    std::vector<expr::BoundExpr> bound;
    for (const auto& e : comps) bound.push_back(expr::bind(e, names));
    f_.push_back(std::move(bound));
  }
  for (const auto& e : spec_.running_cost) k_.push_back(expr::bind(e, names));
}

void Model::dynamics(int pair, const double* x, double u1, double u2, double* out) const {
  const int n = spec_.dimension;
  double slots[8];
  std::copy(x, x + n, slots);
  slots[n] = u1;
  slots[n + 1] = u2;
  const auto& comps = f_[pair];
  for (int i = 0; i < n; ++i) out[i] = comps[i].eval({slots, static_cast<std::size_t>(n + 2)});
}

double Model::running_cost(int pair, const double* x, double u1, double u2) const {
  const int n = spec_.dimension;
  double slots[8];
  std::copy(x, x + n, slots);
  slots[n] = u1;
  slots[n + 1] = u2;
  return k_[pair].eval({slots, static_cast<std::size_t>(n + 2)});
}

Vector Model::dynamics(ModePair p, const Vector& x, double u1, double u2) const {
  Vector out(spec_.dimension);
  dynamics(spec_.pair_index(p), x.data(), u1, u2, out.data());
  return out;
}

double Model::running_cost(ModePair p, const Vector& x, double u1, double u2) const {
  return running_cost(spec_.pair_index(p), x.data(), u1, u2);
}

ProblemSpec spec_from_document(const config::Document& doc) {
  const config::Table* problem = doc.find("problem");
  if (!problem) throw SpecError("missing [problem] section");

  ProblemSpec s;
  s.dimension = static_cast<int>(problem->at("dimension").as_integer("problem.dimension"));
  if (s.dimension < 1 || s.dimension > 6)
    throw SpecError("problem.dimension must be between 1 and 6, got " + std::to_string(s.dimension));
  const int n = s.dimension;

  s.discount = problem->at("discount").as_number("problem.discount");
  if (problem->has("generator"))
    s.generator = to_matrix(problem->at("generator").as_matrix("problem.generator"), n, n, "problem.generator");
  else
    s.generator = Matrix::Zero(n, n);
  if (problem->has("u1_levels")) s.u1_levels = problem->at("u1_levels").as_numbers("problem.u1_levels");
  if (problem->has("u2_levels")) s.u2_levels = problem->at("u2_levels").as_numbers("problem.u2_levels");
  if (s.u1_levels.empty() || s.u2_levels.empty()) throw SpecError("control level lists must be nonempty");
  if (problem->has("d1_labels")) s.d1_labels = problem->at("d1_labels").as_strings("problem.d1_labels");
  if (problem->has("d2_labels")) s.d2_labels = problem->at("d2_labels").as_strings("problem.d2_labels");
  check_labels(s.d1_labels, "problem.d1_labels");
  check_labels(s.d2_labels, "problem.d2_labels");

  auto box = problem->at("box").as_matrix("problem.box");
  if (static_cast<int>(box.size()) != n)
    throw SpecError("problem.box: dimension mismatch, expected " + std::to_string(n) + " intervals, got " +
                    std::to_string(box.size()));
  for (int i = 0; i < n; ++i) {
    if (box[i].size() != 2) throw SpecError("problem.box: each interval needs [low, high]");
    if (!(box[i][0] < box[i][1]))
      throw SpecError("problem.box: interval " + std::to_string(i) + " is empty (low >= high)");
    s.box.push_back({box[i][0], box[i][1]});
  }

  const auto names = s.variable_names();
  const auto dyn = doc.subtables("dynamics");
  const auto cost = doc.subtables("cost");
  for (const auto& [key, t] : dyn) {
    (void)t;
    bool known = false;
    for (int a = 0; a < s.m1() && !known; ++a)
      for (int b = 0; b < s.m2() && !known; ++b) known = s.pair_key(a, b) == key;
    if (!known) throw SpecError("[dynamics.\"" + key + "\"] does not name a declared mode pair");
  }
  for (int a = 0; a < s.m1(); ++a) {
    for (int b = 0; b < s.m2(); ++b) {
      const std::string key = s.pair_key(a, b);
      auto it = dyn.find(key);
      if (it == dyn.end()) throw SpecError("missing dynamics for mode pair (" + key + ")");
      auto comps = it->second->at("f").as_strings("dynamics." + key + ".f");
      if (static_cast<int>(comps.size()) != n)
        throw SpecError("dynamics for mode pair (" + key + "): dimension mismatch, expected " +
                        std::to_string(n) + " components, got " + std::to_string(comps.size()));
      std::vector<expr::Expr> parsed;
      for (int i = 0; i < n; ++i)
        parsed.push_back(parse_checked(comps[i], names, "dynamics (" + key + ") f[" + std::to_string(i) + "]"));
      s.dynamics.push_back(std::move(parsed));

      auto ct = cost.find(key);
      if (ct == cost.end()) throw SpecError("missing running cost for mode pair (" + key + ")");
      s.running_cost.push_back(
          parse_checked(ct->second->at("k").as_string("cost." + key + ".k"), names, "cost (" + key + ") k"));
    }
  }
  if (cost.size() != static_cast<std::size_t>(s.pair_count()))
    throw SpecError("[cost.\"...\"] sections name undeclared mode pairs");

  const config::Table* sw = doc.find("switching");
  auto switch_matrix = [&](const char* key, int m) -> Matrix {
    if (sw && sw->has(key)) return to_matrix(sw->at(key).as_matrix(std::string("switching.") + key), m, m,
                                             std::string("switching.") + key);
    if (m > 1) throw SpecError(std::string("missing switching.") + key + " for " + std::to_string(m) + " modes");
    return Matrix::Zero(m, m);
  };
  s.switch_cost_1 = switch_matrix("c1", s.m1());
  s.switch_cost_2 = switch_matrix("c2", s.m2());

  if (const config::Table* imp = doc.find("impulses")) {
    auto vecs = imp->has("vectors") ? imp->at("vectors").as_matrix("impulses.vectors")
                                    : std::vector<std::vector<double>>{};
    auto costs = imp->has("costs") ? imp->at("costs").as_numbers("impulses.costs") : std::vector<double>{};
    if (vecs.size() != costs.size())
      throw SpecError("impulses: " + std::to_string(vecs.size()) + " vectors but " + std::to_string(costs.size()) +
                      " costs");
    for (std::size_t i = 0; i < vecs.size(); ++i) {
      if (static_cast<int>(vecs[i].size()) != n)
        throw SpecError("impulses: dimension mismatch in impulse " + std::to_string(i) + ", expected " +
                        std::to_string(n) + " components, got " + std::to_string(vecs[i].size()));
      Impulse im;
      im.jump = Eigen::Map<const Vector>(vecs[i].data(), n);
      im.cost = costs[i];
      s.impulses.push_back(std::move(im));
    }
  }
  return s;
}

ProblemSpec load_spec(const std::string& path) { return spec_from_document(config::load(path)); }

std::string save_spec(const ProblemSpec& s) {
  using config::format_number;
  using config::quote;
  std::ostringstream out;
  auto numbers = [&](const std::vector<double>& v) {
    std::string r = "[";
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? ", " : "") + format_number(v[i]);
    return r + "]";
  };
  auto matrix = [&](const Matrix& m) {
    std::string r = "[";
    for (int i = 0; i < m.rows(); ++i) {
      std::vector<double> row(m.cols());
      for (int j = 0; j < m.cols(); ++j) row[j] = m(i, j);
      r += (i ? ", " : "") + numbers(row);
    }
    return r + "]";
  };
  auto strings = [&](const std::vector<std::string>& v) {
    std::string r = "[";
    for (std::size_t i = 0; i < v.size(); ++i) r += (i ? ", " : "") + quote(v[i]);
    return r + "]";
  };

  out << "[problem]\n";
  out << "dimension = " << s.dimension << "\n";
  out << "discount = " << format_number(s.discount) << "\n";
  out << "generator = " << matrix(s.generator) << "\n";
  out << "u1_levels = " << numbers(s.u1_levels) << "\n";
  out << "u2_levels = " << numbers(s.u2_levels) << "\n";
  out << "d1_labels = " << strings(s.d1_labels) << "\n";
  out << "d2_labels = " << strings(s.d2_labels) << "\n";
  out << "box = [";
  for (int i = 0; i < s.dimension; ++i)
    out << (i ? ", " : "") << numbers({s.box[i].low, s.box[i].high});
  out << "]\n";

  for (int a = 0; a < s.m1(); ++a) {
    for (int b = 0; b < s.m2(); ++b) {
      const int p = s.pair_index(a, b);
      out << "\n[dynamics." << quote(s.pair_key(a, b)) << "]\nf = [";
      for (int i = 0; i < s.dimension; ++i) out << (i ? ", " : "") << quote(s.dynamics[p][i].to_string());
      out << "]\n";
      out << "\n[cost." << quote(s.pair_key(a, b)) << "]\nk = " << quote(s.running_cost[p].to_string()) << "\n";
    }
  }

  out << "\n[switching]\n";
  out << "c1 = " << matrix(s.switch_cost_1) << "\n";
  out << "c2 = " << matrix(s.switch_cost_2) << "\n";

  if (!s.impulses.empty()) {
    out << "\n[impulses]\nvectors = [";
    for (std::size_t i = 0; i < s.impulses.size(); ++i)
      out << (i ? ", " : "")
          << numbers(std::vector<double>(s.impulses[i].jump.data(), s.impulses[i].jump.data() + s.dimension));
    out << "]\ncosts = [";
    for (std::size_t i = 0; i < s.impulses.size(); ++i) out << (i ? ", " : "") << format_number(s.impulses[i].cost);
    out << "]\n";
  }
  return out.str();
}

std::string_view to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::NotApplicable: return "not-applicable";
  }
  return "?";
}

bool ValidationReport::blocking() const {
  return std::any_of(checks.begin(), checks.end(),
                     [](const ValidationCheck& c) { return c.mandatory && c.status == CheckStatus::Fail; });
}

const ValidationCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  out << "validation report (seed " << seed << ", " << samples << " samples)\n";
  for (const auto& c : checks) {
    out << "  [" << to_string(c.status) << "] " << c.name << (c.mandatory ? "" : " (informational)");
    if (!c.detail.empty()) out << ": " << c.detail;
    out << "\n";
  }
  out << "  estimated Lipschitz constant of f: " << fmt(lipschitz_f) << "\n";
  out << "  estimated Lipschitz constant of k: " << fmt(lipschitz_k) << "\n";
  out << "  sup |f| estimate: " << fmt(f_sup) << "\n";
  out << "  sup k estimate: " << fmt(k_sup) << "\n";
  out << "  min player-1 switching cost: " << fmt(c1_min) << "\n";
  out << "  min player-2 switching cost: " << fmt(c2_min) << "\n";
  out << "  min impulse cost: " << fmt(l_min) << "\n";
  if (l_gap) out << "  impulse subadditivity gap: " << fmt(*l_gap) << "\n";
  for (const auto& w : warnings) out << "  warning: " << w << "\n";
  out << (blocking() ? "RESULT: rejected\n" : "RESULT: accepted\n");
  return out.str();
}

std::string ValidationReport::to_kv() const {
  std::map<std::string, std::string> kv;
  for (const auto& c : checks) kv["check." + c.name] = std::string(to_string(c.status));
  kv["estimate.lipschitz_f"] = fmt(lipschitz_f);
  kv["estimate.lipschitz_k"] = fmt(lipschitz_k);
  kv["estimate.f_sup"] = fmt(f_sup);
  kv["estimate.k_sup"] = fmt(k_sup);
  kv["cost.c1_min"] = fmt(c1_min);
  kv["cost.c2_min"] = fmt(c2_min);
  kv["cost.l_min"] = fmt(l_min);
  if (l_gap) kv["cost.l_gap"] = fmt(*l_gap);
  kv["seed"] = std::to_string(seed);
  kv["samples"] = std::to_string(samples);
  kv["warnings"] = std::to_string(warnings.size());
  kv["result"] = blocking() ? "rejected" : "accepted";
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

namespace {

struct SampleDraw {
  Vector x;
  int pair;
  double u1, u2;
};

class Sampler {
 public:
  Sampler(const ProblemSpec& s, std::uint64_t seed) : spec_(s), rng_(seed) {}

  Vector point() {
    Vector x(spec_.dimension);
    for (int i = 0; i < spec_.dimension; ++i)
      x[i] = std::uniform_real_distribution<double>(spec_.box[i].low, spec_.box[i].high)(rng_);
    return x;
  }

  SampleDraw draw() {
    SampleDraw d;
    d.x = point();
    d.pair = pick(spec_.pair_count());
    d.u1 = spec_.u1_levels[pick(static_cast<int>(spec_.u1_levels.size()))];
    d.u2 = spec_.u2_levels[pick(static_cast<int>(spec_.u2_levels.size()))];
    return d;
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

  const ProblemSpec& spec_;
  std::mt19937_64 rng_;
};

std::optional<std::size_t> find_impulse(const ProblemSpec& s, const Vector& v) {
  for (std::size_t i = 0; i < s.impulses.size(); ++i) {
    const Vector& w = s.impulses[i].jump;
    if ((w - v).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + v.lpNorm<Eigen::Infinity>())) return i;
  }
  return std::nullopt;
}

}  // namespace

ValidationReport validate_a2(const ProblemSpec& s, int samples, std::uint64_t seed) {
  ValidationReport r;
  r.seed = seed;
  r.samples = samples;

  r.checks.push_back({"discount_positive", s.discount > 0.0 ? CheckStatus::Pass : CheckStatus::Fail, true,
                      s.discount > 0.0 ? "" : "discount must be > 0, got " + fmt(s.discount)});

  // (a) k >= 0 on sampled draws; also catches expressions that fail to evaluate.
  Model model(s);
  Sampler sampler(s, seed);
  std::string eval_failure;
  double worst_k = kInf;
  std::string worst_where;
  Vector fx(s.dimension);
  for (int i = 0; i < samples; ++i) {
    SampleDraw d = sampler.draw();
    try {
      double k = model.running_cost(d.pair, d.x.data(), d.u1, d.u2);
      model.dynamics(d.pair, d.x.data(), d.u1, d.u2, fx.data());
      r.k_sup = std::max(r.k_sup, std::abs(k));
      r.f_sup = std::max(r.f_sup, fx.norm());
      if (k < worst_k) {
        worst_k = k;
        std::ostringstream w;
        w << "k = " << fmt(k) << " at x = [" << d.x.transpose() << "], u1 = " << d.u1 << ", u2 = " << d.u2
          << ", modes (" << s.pair_key(d.pair / s.m2(), d.pair % s.m2()) << ")";
        worst_where = w.str();
      }
    } catch (const expr::EvalError& e) {
      if (eval_failure.empty()) {
        std::ostringstream w;
        w << e.what() << " at x = [" << d.x.transpose() << "], modes ("
          << s.pair_key(d.pair / s.m2(), d.pair % s.m2()) << ")";
        eval_failure = w.str();
      }
    }
  }
  r.checks.push_back({"expressions_evaluable", eval_failure.empty() ? CheckStatus::Pass : CheckStatus::Fail, true,
                      eval_failure});
  if (samples <= 0) {
    r.checks.push_back({"running_cost_nonnegative", CheckStatus::NotApplicable, true, "no samples drawn"});
  } else {
    bool ok = worst_k >= 0.0;
    r.checks.push_back({"running_cost_nonnegative", ok ? CheckStatus::Pass : CheckStatus::Fail, true,
                        ok ? "min sampled k = " + fmt(worst_k) : "negative running cost: " + worst_where});
  }

  // (b) switching costs bounded away from zero.
  auto switch_check = [&](const char* name, const Matrix& c, int m, double& cmin) {
    cmin = min_off_diagonal(c);
    if (m < 2) {
      r.checks.push_back({name, CheckStatus::NotApplicable, true, "single mode; no switching"});
      return;
    }
    bool ok = cmin > 0.0;
    r.checks.push_back({name, ok ? CheckStatus::Pass : CheckStatus::Fail, true,
                        ok ? "c0 = " + fmt(cmin)
                           : "requires inf over distinct modes of the switching cost c0 > 0, found " + fmt(cmin)});
  };
  switch_check("switch_cost_1_positive", s.switch_cost_1, s.m1(), r.c1_min);
  switch_check("switch_cost_2_positive", s.switch_cost_2, s.m2(), r.c2_min);

  // (c) impulse costs positive.
  r.l_min = kInf;
  for (const auto& im : s.impulses) r.l_min = std::min(r.l_min, im.cost);
  if (s.impulses.empty()) {
    r.checks.push_back({"impulse_cost_positive", CheckStatus::NotApplicable, true, "no impulses"});
  } else {
    bool ok = r.l_min > 0.0;
    r.checks.push_back({"impulse_cost_positive", ok ? CheckStatus::Pass : CheckStatus::Fail, true,
                        ok ? "min l = " + fmt(r.l_min) : "impulse cost must be > 0, found " + fmt(r.l_min)});
  }

  // (d) strict subadditivity on pairs whose sum is listed.
  std::string sub_failure;
  int applicable = 0;
  for (std::size_t i = 0; i < s.impulses.size(); ++i) {
    for (std::size_t j = i; j < s.impulses.size(); ++j) {
      auto k = find_impulse(s, s.impulses[i].jump + s.impulses[j].jump);
      if (!k) continue;
      ++applicable;
      double gap = s.impulses[i].cost + s.impulses[j].cost - s.impulses[*k].cost;
      r.l_gap = r.l_gap ? std::min(*r.l_gap, gap) : gap;
      if (!(gap > 0.0) && sub_failure.empty())
        sub_failure = "l(xi" + std::to_string(i) + " + xi" + std::to_string(j) + ") = " + fmt(s.impulses[*k].cost) +
                      " is not < " + fmt(s.impulses[i].cost + s.impulses[j].cost);
    }
  }
  if (applicable == 0) {
    r.checks.push_back({"impulse_strict_subadditivity", CheckStatus::NotApplicable, true,
                        "no impulse pair sums to a listed impulse"});
  } else {
    r.checks.push_back({"impulse_strict_subadditivity", sub_failure.empty() ? CheckStatus::Pass : CheckStatus::Fail,
                        true,
                        sub_failure.empty() ? std::to_string(applicable) + " pair(s), gap = " + fmt(*r.l_gap)
                                            : sub_failure});
  }

  // (e) growth of l at infinity cannot be observed on a finite list.
  r.checks.push_back({"impulse_cost_coercive", CheckStatus::NotApplicable, false,
                      "finite impulse list; the minimum over impulses is always attained"});

  r.lipschitz_f = lipschitz_probe(s, samples, seed + 1);
  {
    Sampler ks(s, seed + 2);
    for (int i = 0; i < samples; ++i) {
      SampleDraw d = ks.draw();
      Vector y = ks.point();
      double dist = (d.x - y).norm();
      if (dist <= 0.0) continue;
      try {
        double kx = model.running_cost(d.pair, d.x.data(), d.u1, d.u2);
        double ky = model.running_cost(d.pair, y.data(), d.u1, d.u2);
        r.lipschitz_k = std::max(r.lipschitz_k, std::abs(kx - ky) / dist);
      } catch (const expr::EvalError&) {
      }
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s.generator + s.generator.transpose()));
  double lam_min = eig.eigenvalues().minCoeff();
  if (lam_min < 0.0)
    r.warnings.push_back("symmetric part of the generator has eigenvalue " + fmt(lam_min) +
                         " < 0; exp(-tA) may not be a contraction");
  return r;
}

double lipschitz_probe(const ProblemSpec& s, int samples, std::uint64_t seed) {
  Model model(s);
  Sampler sampler(s, seed);
  Vector fx(s.dimension), fy(s.dimension);
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    SampleDraw d = sampler.draw();
    Vector y = sampler.point();
    double dist = (d.x - y).norm();
    if (dist <= 0.0) continue;
    try {
      model.dynamics(d.pair, d.x.data(), d.u1, d.u2, fx.data());
      model.dynamics(d.pair, y.data(), d.u1, d.u2, fy.data());
    } catch (const expr::EvalError&) {
      continue;
    }
    best = std::max(best, (fx - fy).norm() / dist);
  }
  return best;
}

bool for_each_switch_loop(int m1, int m2, int max_length, std::size_t budget,
                          const std::function<void(const std::vector<ModePair>&)>& visit) {
  const int nodes = m1 * m2;
  auto id = [m2](ModePair p) { return p.d1 * m2 + p.d2; };
  std::vector<ModePair> walk;
  std::size_t steps = 0;
  bool complete = true;

  auto neighbours = [&](ModePair p) {
    std::vector<ModePair> out;
    for (int a = 0; a < m1; ++a)
      if (a != p.d1) out.push_back({a, p.d2});
    for (int b = 0; b < m2; ++b)
      if (b != p.d2) out.push_back({p.d1, b});
    return out;
  };
  auto adjacent = [](ModePair p, ModePair q) { return (p.d1 == q.d1) != (p.d2 == q.d2); };
  auto is_canonical = [&](const std::vector<ModePair>& w) {
    const std::size_t n = w.size();
    for (std::size_t r = 1; r < n; ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        int a = id(w[(r + i) % n]), b = id(w[i]);
        if (a < b) return false;
        if (a > b) break;
      }
    }
    return true;
  };

  std::function<void()> extend = [&]() {
    if (!complete) return;
    if (++steps > budget) {
      complete = false;
      return;
    }
    if (walk.size() >= 2 && adjacent(walk.back(), walk.front()) && is_canonical(walk)) visit(walk);
    if (static_cast<int>(walk.size()) >= max_length) return;
    for (ModePair q : neighbours(walk.back())) {
      // The canonical rotation starts at its smallest node.
      if (id(q) < id(walk.front())) continue;
      walk.push_back(q);
      extend();
      walk.pop_back();
    }
  };

  for (int start = 0; start < nodes && complete; ++start) {
    walk = {{start / m2, start % m2}};
    extend();
  }
  return complete;
}

YongConditions check_y1_y2(const ProblemSpec& s) {
  YongConditions y;
  y.c2_min = min_off_diagonal(s.switch_cost_2);
  y.l_min = kInf;
  for (const auto& im : s.impulses) y.l_min = std::min(y.l_min, im.cost);
  y.cheaper_switching = y.c2_min < y.l_min;

  const int max_len = s.pair_count();
  y.exhaustive = for_each_switch_loop(s.m1(), s.m2(), max_len, 50'000'000, [&](const std::vector<ModePair>& w) {
    ++y.loops_enumerated;
    double sum1 = 0.0, sum2 = 0.0, scale = 0.0;
    bool p1 = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      ModePair a = w[i], b = w[(i + 1) % w.size()];
      if (a.d1 != b.d1) {
        p1 = true;
        sum1 += s.switch_cost_1(a.d1, b.d1);
        scale += std::abs(s.switch_cost_1(a.d1, b.d1));
      } else {
        sum2 += s.switch_cost_2(a.d2, b.d2);
        scale += std::abs(s.switch_cost_2(a.d2, b.d2));
      }
    }
    y.loops_with_player1_switch = y.loops_with_player1_switch || p1;
    if (y.nonzero_loop && std::abs(sum1 - sum2) <= 1e-12 * (1.0 + scale)) {
      y.nonzero_loop = false;
      y.balanced_loop = w;
    }
  });
  return y;
}

std::string YongConditions::to_text(const ProblemSpec& s) const {
  std::ostringstream out;
  out << "cheaper switching (min c2 = " << fmt(c2_min) << " < min l = " << fmt(l_min)
      << "): " << (cheaper_switching ? "holds" : "fails") << "\n";
  out << "nonzero loop switching cost (" << loops_enumerated << " loops"
      << (exhaustive ? "" : ", enumeration truncated") << "): "
      << (!loops_with_player1_switch ? "vacuous" : nonzero_loop ? "holds" : "fails") << "\n";
  if (!balanced_loop.empty()) {
    out << "  balanced loop:";
    for (const auto& p : balanced_loop) out << " (" << s.pair_key(p.d1, p.d2) << ")";
    out << "\n";
  }
  return out.str();
}

}  // namespace hybrid
