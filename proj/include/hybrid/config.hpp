#pragma once

// Reader for the small TOML-like configuration dialect used by problem files:
//
//   # comment
//   [problem]
//   discount = 0.5
//   box = [[-1.0, 1.0]]
//   [dynamics."a,b"]
//   f = ["u1 - x0"]
//
// Supported values: numbers, double-quoted strings, booleans and (nested,
// possibly multi-line) arrays. Section headers take the form [name] or
// [name."key"] / [name.key].

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hybrid::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<double, std::string, bool, Array> data;
  int line = 0;

  bool is_number() const { return std::holds_alternative<double>(data); }
  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_array() const { return std::holds_alternative<Array>(data); }

  double as_number(std::string_view what) const;
  long long as_integer(std::string_view what) const;
  const std::string& as_string(std::string_view what) const;
  bool as_bool(std::string_view what) const;
  const Array& as_array(std::string_view what) const;

  std::vector<double> as_numbers(std::string_view what) const;
  std::vector<std::string> as_strings(std::string_view what) const;
  std::vector<std::vector<double>> as_matrix(std::string_view what) const;
};

struct Table {
  std::string name;  // "problem", or "dynamics.a,b" for [dynamics."a,b"]
  int line = 0;
  std::map<std::string, Value> entries;

  bool has(const std::string& key) const { return entries.count(key) != 0; }
  const Value& at(const std::string& key) const;
};

struct Document {
  std::map<std::string, Table> tables;

  const Table* find(const std::string& name) const;
  /// Tables whose header is [prefix."..."]; keyed by the quoted part.
  std::map<std::string, const Table*> subtables(const std::string& prefix) const;
};

Document parse(std::string_view text);
Document load(const std::string& path);

/// Round-trip-safe number literal ("%.17g", always with a '.' or exponent).
std::string format_number(double v);
std::string quote(std::string_view s);

}  // namespace hybrid::config
