#include "hybrid/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace hybrid::expr {

namespace {

constexpr std::array<std::pair<std::string_view, Func>, 8> kFunctions{{
    {"sin", Func::Sin},
    {"cos", Func::Cos},
    {"tanh", Func::Tanh},
    {"exp", Func::Exp},
    {"sqrt", Func::Sqrt},
    {"abs", Func::Abs},
    {"min", Func::Min},
    {"max", Func::Max},
}};

std::optional<Func> lookup_func(std::string_view name) {
  for (const auto& [n, f] : kFunctions)
    if (n == name) return f;
  return std::nullopt;
}

double checked(double v, const char* what) {
  if (!std::isfinite(v))
    throw EvalError(EvalError::Kind::Domain, std::string("domain error: ") + what +
                                                 " produced a non-finite value");
  return v;
}

double apply_binary(BinOp op, double a, double b) {
  switch (op) {
    case BinOp::Add: return checked(a + b, "addition");
    case BinOp::Sub: return checked(a - b, "subtraction");
    case BinOp::Mul: return checked(a * b, "multiplication");
    case BinOp::Div:
      if (b == 0.0) throw EvalError(EvalError::Kind::Domain, "domain error: division by zero");
      return checked(a / b, "division");
    case BinOp::Pow: return checked(std::pow(a, b), "power");
  }
  return 0.0;
}

double apply_func(Func f, double a, double b) {
  switch (f) {
    case Func::Sin: return checked(std::sin(a), "sin");
    case Func::Cos: return checked(std::cos(a), "cos");
    case Func::Tanh: return std::tanh(a);
    case Func::Exp: return checked(std::exp(a), "exp");
    case Func::Sqrt:
      if (a < 0.0) throw EvalError(EvalError::Kind::Domain, "domain error: sqrt of a negative value");
      return std::sqrt(a);
    case Func::Abs: return std::abs(a);
    case Func::Min: return std::min(a, b);
    case Func::Max: return std::max(a, b);
  }
  return 0.0;
}

NodePtr make_number(double v) {
  auto n = std::make_shared<Node>();
  n->kind = Node::Kind::Number;
  n->value = v;
  return n;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr run() {
    auto root = expression();
    skip_ws();
    if (pos_ != text_.size()) fail("operator or end of input");
    return Expr(std::move(root));
  }

 private:
  [[noreturn]] void fail(const std::string& expected) {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'" : "end of input";
    throw ParseError(pos_, expected,
                     "syntax error at offset " + std::to_string(pos_) + ": expected " + expected +
                         ", found " + found);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr binary(BinOp op, NodePtr lhs, NodePtr rhs) {
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Binary;
    n->op = op;
    n->children = {std::move(lhs), std::move(rhs)};
    return n;
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(BinOp::Add, lhs, term());
      else if (accept('-')) lhs = binary(BinOp::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(BinOp::Mul, lhs, unary());
      else if (accept('/')) lhs = binary(BinOp::Div, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Negate;
      n->children = {unary()};
      return n;
    }
    return power();
  }

  // '^' binds tighter than unary minus and is right-associative; the exponent
  // may itself carry a sign ("2^-1").
  NodePtr power() {
    auto base = primary();
    if (accept('^')) return binary(BinOp::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("number, variable, function call, or '('");
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = expression();
      if (!accept(')')) fail("')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("number, variable, function call, or '('");
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) {
      pos_ = start;
      fail("numeric literal");
    }
    return make_number(v);
  }

  NodePtr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      auto f = lookup_func(name);
      if (!f) {
        pos_ = start;
        fail("known function (sin, cos, tanh, exp, sqrt, abs, min, max)");
      }
      ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Kind::Call;
      n->func = *f;
      n->children.push_back(expression());
      while (accept(',')) n->children.push_back(expression());
      if (!accept(')')) fail("',' or ')'");
      if (static_cast<int>(n->children.size()) != func_arity(*f)) {
        pos_ = start;
        fail(std::string(func_name(*f)) + " with " + std::to_string(func_arity(*f)) + " argument(s)");
      }
      return n;
    }
    auto n = std::make_shared<Node>();
    n->kind = Node::Kind::Variable;
    n->name = std::move(name);
    return n;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& n, const Env& env) {
  switch (n.kind) {
    case Node::Kind::Number: return n.value;
    case Node::Kind::Variable: {
      auto it = env.find(n.name);
      if (it == env.end())
        throw EvalError(EvalError::Kind::UnboundVariable, "unbound variable '" + n.name + "'");
      return it->second;
    }
    case Node::Kind::Negate: return -eval_node(*n.children[0], env);
    case Node::Kind::Binary:
      return apply_binary(n.op, eval_node(*n.children[0], env), eval_node(*n.children[1], env));
    case Node::Kind::Call: {
      double a = eval_node(*n.children[0], env);
      double b = n.children.size() > 1 ? eval_node(*n.children[1], env) : 0.0;
      return apply_func(n.func, a, b);
    }
  }
  return 0.0;
}

void collect(const Node& n, std::set<std::string>& out) {
  if (n.kind == Node::Kind::Variable) out.insert(n.name);
  for (const auto& c : n.children) collect(*c, out);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

void print(const Node& n, std::string& out) {
  switch (n.kind) {
    case Node::Kind::Number: out += format_number(n.value); return;
    case Node::Kind::Variable: out += n.name; return;
    case Node::Kind::Negate:
      out += "(-";
      print(*n.children[0], out);
      out += ")";
      return;
    case Node::Kind::Binary: {
      static constexpr char ops[] = {'+', '-', '*', '/', '^'};
      out += "(";
      print(*n.children[0], out);
      out += ' ';
      out += ops[static_cast<int>(n.op)];
      out += ' ';
      print(*n.children[1], out);
      out += ")";
      return;
    }
    case Node::Kind::Call:
      out += func_name(n.func);
      out += "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ", ";
        print(*n.children[i], out);
      }
      out += ")";
      return;
  }
}

}  // namespace

std::string_view func_name(Func f) {
  for (const auto& [n, g] : kFunctions)
    if (g == f) return n;
  return "?";
}

int func_arity(Func f) { return (f == Func::Min || f == Func::Max) ? 2 : 1; }

std::string Expr::to_string() const {
  std::string out;
  if (root_) print(*root_, out);
  return out;
}

Expr parse(std::string_view text) { return Parser(text).run(); }

double eval(const Expr& e, const Env& env) { return eval_node(e.root(), env); }

std::set<std::string> free_vars(const Expr& e) {
  std::set<std::string> out;
  if (!e.empty()) collect(e.root(), out);
  return out;
}

namespace {

void compile(const Node& n, std::span<const std::string> names, std::vector<BoundExpr::Instr>& prog,
             std::size_t depth, std::size_t& max_depth);

}  // namespace

BoundExpr bind(const Expr& e, std::span<const std::string> slot_names) {
  BoundExpr out;
  out.source_ = e.to_string();
  std::size_t max_depth = 0;
  compile(e.root(), slot_names, out.program_, 0, max_depth);
  out.max_stack_ = max_depth;
  return out;
}

namespace {

// Emits postfix code; `depth` is the stack height before this node runs.
void compile(const Node& n, std::span<const std::string> names, std::vector<BoundExpr::Instr>& prog,
             std::size_t depth, std::size_t& max_depth) {
  using Code = BoundExpr::Instr::Code;
  max_depth = std::max(max_depth, depth + 1);
  switch (n.kind) {
    case Node::Kind::Number: prog.push_back({Code::Push, n.value, 0, Func::Sin}); return;
    case Node::Kind::Variable: {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == n.name) {
          prog.push_back({Code::Load, 0.0, i, Func::Sin});
          return;
        }
      }
      throw EvalError(EvalError::Kind::UnboundVariable, "unbound variable '" + n.name + "'");
    }
    case Node::Kind::Negate:
      compile(*n.children[0], names, prog, depth, max_depth);
      prog.push_back({Code::Neg, 0.0, 0, Func::Sin});
      return;
    case Node::Kind::Binary: {
      compile(*n.children[0], names, prog, depth, max_depth);
      compile(*n.children[1], names, prog, depth + 1, max_depth);
      static constexpr Code codes[] = {Code::Add, Code::Sub, Code::Mul, Code::Div, Code::Pow};
      prog.push_back({codes[static_cast<int>(n.op)], 0.0, 0, Func::Sin});
      return;
    }
    case Node::Kind::Call:
      for (std::size_t i = 0; i < n.children.size(); ++i)
        compile(*n.children[i], names, prog, depth + i, max_depth);
      prog.push_back({n.children.size() == 2 ? Code::Call2 : Code::Call1, 0.0, 0, n.func});
      return;
  }
}

}  // namespace

double BoundExpr::eval(std::span<const double> slots) const {
  // Expressions in config files are small; a fixed buffer covers realistic depth.
  constexpr std::size_t kInline = 64;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_stack_ > kInline) {
    heap.resize(max_stack_);
    stack = heap.data();
  }
  std::size_t sp = 0;
  using Code = Instr::Code;
  for (const auto& ins : program_) {
    switch (ins.code) {
      case Code::Push: stack[sp++] = ins.value; break;
      case Code::Load: stack[sp++] = slots[ins.slot]; break;
      case Code::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Code::Add:
      case Code::Sub:
      case Code::Mul:
      case Code::Div:
      case Code::Pow: {
        static constexpr BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow};
        double b = stack[--sp];
        stack[sp - 1] = apply_binary(ops[static_cast<int>(ins.code) - static_cast<int>(Code::Add)],
                                     stack[sp - 1], b);
        break;
      }
      case Code::Call1: stack[sp - 1] = apply_func(ins.func, stack[sp - 1], 0.0); break;
      case Code::Call2: {
        double b = stack[--sp];
        stack[sp - 1] = apply_func(ins.func, stack[sp - 1], b);
        break;
      }
    }
  }
  return stack[0];
}

}  // namespace hybrid::expr
