#include "hybrid/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hybrid::config {

namespace {

std::string at_line(int line) { return "line " + std::to_string(line) + ": "; }

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  Document run() {
    Document doc;
    Table* current = nullptr;
    for (;;) {
      skip_space_and_comments();
      if (eof()) break;
      if (peek() == '[') {
        int hline = line_;
        std::string name = header();
        auto [it, inserted] = doc.tables.try_emplace(name);
        if (!inserted) throw ConfigError(at_line(hline) + "duplicate section [" + name + "]");
        it->second.name = name;
        it->second.line = hline;
        current = &it->second;
        continue;
      }
      if (!current) throw ConfigError(at_line(line_) + "key outside of any [section]");
      int kline = line_;
      std::string key = bare_key();
      skip_inline_space();
      expect('=');
      Value v = value();
      if (!current->entries.emplace(key, std::move(v)).second)
        throw ConfigError(at_line(kline) + "duplicate key '" + key + "'");
      skip_inline_space();
      if (!eof() && peek() == '#') skip_comment();
      if (!eof() && peek() != '\n' && peek() != '\r')
        throw ConfigError(at_line(line_) + "unexpected text after value");
    }
    return doc;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }

  void skip_comment() {
    while (!eof() && peek() != '\n') ++pos_;
  }

  void skip_inline_space() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_space_and_comments() {
    while (!eof()) {
      if (std::isspace(static_cast<unsigned char>(peek()))) advance();
      else if (peek() == '#') skip_comment();
      else break;
    }
  }

  void expect(char c) {
    if (eof() || peek() != c)
      throw ConfigError(at_line(line_) + "expected '" + std::string(1, c) + "'");
    ++pos_;
  }

  static bool bare_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  }

  std::string bare_key() {
    std::size_t start = pos_;
    while (!eof() && bare_char(peek())) ++pos_;
    if (pos_ == start) throw ConfigError(at_line(line_) + "expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string header() {
    expect('[');
    skip_inline_space();
    std::string name = bare_key();
    skip_inline_space();
    if (!eof() && peek() == '.') {
      ++pos_;
      skip_inline_space();
      std::string sub = (!eof() && peek() == '"') ? string_literal() : bare_key();
      name += "." + sub;
      skip_inline_space();
    }
    expect(']');
    return name;
  }

  std::string string_literal() {
    int sline = line_;
    expect('"');
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') throw ConfigError(at_line(sline) + "unterminated string");
      char c = peek();
      ++pos_;
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) throw ConfigError(at_line(sline) + "unterminated escape");
        char e = peek();
        ++pos_;
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: throw ConfigError(at_line(sline) + "unknown escape '\\" + std::string(1, e) + "'");
        }
        continue;
      }
      out += c;
    }
    return out;
  }

  Value value() {
    skip_inline_space();
    if (eof()) throw ConfigError(at_line(line_) + "expected a value");
    Value v;
    v.line = line_;
    char c = peek();
    if (c == '"') {
      v.data = string_literal();
    } else if (c == '[') {
      ++pos_;
      Array arr;
      for (;;) {
        skip_space_and_comments();
        if (eof()) throw ConfigError(at_line(v.line) + "unterminated array");
        if (peek() == ']') {
          ++pos_;
          break;
        }
        arr.push_back(value());
        skip_space_and_comments();
        if (!eof() && peek() == ',') {
          ++pos_;
          continue;
        }
        skip_space_and_comments();
        if (eof() || peek() != ']') throw ConfigError(at_line(line_) + "expected ',' or ']' in array");
      }
      v.data = std::move(arr);
    } else if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      v.data = true;
    } else if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      v.data = false;
    } else {
      std::size_t start = pos_;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                        peek() == '+' || peek() == '-' || peek() == '_'))
        ++pos_;
      std::string tok(text_.substr(start, pos_ - start));
      std::erase(tok, '_');
      const char* b = tok.data();
      if (!tok.empty() && tok[0] == '+') ++b;
      double d = 0.0;
      auto [ptr, ec] = std::from_chars(b, tok.data() + tok.size(), d);
      if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size())
        throw ConfigError(at_line(v.line) + "invalid value '" + tok + "'");
      v.data = d;
    }
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

[[noreturn]] void type_error(const Value& v, std::string_view what, std::string_view expected) {
  throw ConfigError(at_line(v.line) + std::string(what) + ": expected " + std::string(expected));
}

}  // namespace

double Value::as_number(std::string_view what) const {
  if (!is_number()) type_error(*this, what, "a number");
  return std::get<double>(data);
}

long long Value::as_integer(std::string_view what) const {
  double d = as_number(what);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) type_error(*this, what, "an integer");
  return static_cast<long long>(d);
}

const std::string& Value::as_string(std::string_view what) const {
  if (!is_string()) type_error(*this, what, "a string");
  return std::get<std::string>(data);
}

bool Value::as_bool(std::string_view what) const {
  if (!std::holds_alternative<bool>(data)) type_error(*this, what, "true or false");
  return std::get<bool>(data);
}

const Array& Value::as_array(std::string_view what) const {
  if (!is_array()) type_error(*this, what, "an array");
  return std::get<Array>(data);
}

std::vector<double> Value::as_numbers(std::string_view what) const {
  std::vector<double> out;
  for (const auto& e : as_array(what)) out.push_back(e.as_number(what));
  return out;
}

std::vector<std::string> Value::as_strings(std::string_view what) const {
  std::vector<std::string> out;
  for (const auto& e : as_array(what)) out.push_back(e.as_string(what));
  return out;
}

std::vector<std::vector<double>> Value::as_matrix(std::string_view what) const {
  std::vector<std::vector<double>> out;
  for (const auto& row : as_array(what)) out.push_back(row.as_numbers(what));
  return out;
}

const Value& Table::at(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end())
    throw ConfigError(at_line(line) + "section [" + name + "] is missing key '" + key + "'");
  return it->second;
}

const Table* Document::find(const std::string& name) const {
  auto it = tables.find(name);
  return it == tables.end() ? nullptr : &it->second;
}

std::map<std::string, const Table*> Document::subtables(const std::string& prefix) const {
  std::map<std::string, const Table*> out;
  const std::string lead = prefix + ".";
  for (const auto& [name, t] : tables)
    if (name.rfind(lead, 0) == 0) out.emplace(name.substr(lead.size()), &t);
  return out;
}

Document parse(std::string_view text) { return Reader(text).run(); }

Document load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

}  // namespace hybrid::config
