#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hybrid::expr {

/// Raised by parse() with the byte offset of the offending token.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, std::string expected, const std::string& what)
      : std::runtime_error(what), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class EvalError : public std::runtime_error {
 public:
  enum class Kind { UnboundVariable, Domain };

  EvalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

enum class Func { Sin, Cos, Tanh, Exp, Sqrt, Abs, Min, Max };
enum class BinOp { Add, Sub, Mul, Div, Pow };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  enum class Kind { Number, Variable, Negate, Binary, Call };

  Kind kind;
  double value = 0.0;      // Number
  std::string name;        // Variable
  BinOp op = BinOp::Add;   // Binary
  Func func = Func::Sin;   // Call
  std::vector<NodePtr> children;
};

/// Immutable expression tree. Copies share the tree.
class Expr {
 public:
  Expr() = default;
  explicit Expr(NodePtr root) : root_(std::move(root)) {}

  const Node& root() const { return *root_; }
  bool empty() const noexcept { return !root_; }

  /// Fully parenthesized form; parse(to_string()) evaluates identically.
  std::string to_string() const;

 private:
  NodePtr root_;
};

using Env = std::map<std::string, double, std::less<>>;

Expr parse(std::string_view text);
double eval(const Expr& e, const Env& env);
std::set<std::string> free_vars(const Expr& e);

std::string_view func_name(Func f);
/// Function arity (1 or 2).
int func_arity(Func f);

/// Expression compiled against a fixed slot layout, evaluated without name
/// lookups. Slot i holds the value of slot_names[i] passed to bind().
class BoundExpr {
 public:
  BoundExpr() = default;

  double eval(std::span<const double> slots) const;
  const std::string& source() const noexcept { return source_; }

  struct Instr {
    enum class Code { Push, Load, Neg, Add, Sub, Mul, Div, Pow, Call1, Call2 } code;
    double value = 0.0;
    std::size_t slot = 0;
    Func func = Func::Sin;
  };

 private:
  friend BoundExpr bind(const Expr& e, std::span<const std::string> slot_names);

  std::vector<Instr> program_;
  std::size_t max_stack_ = 0;
  std::string source_;
};

/// Throws EvalError(UnboundVariable) if e references a name outside slot_names.
BoundExpr bind(const Expr& e, std::span<const std::string> slot_names);

}  // namespace hybrid::expr
