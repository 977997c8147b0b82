#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "hybrid/config.hpp"
#include "hybrid/problem.hpp"

namespace testing {

inline hybrid::ProblemSpec spec_from_text(const std::string& text) {
  return hybrid::spec_from_document(hybrid::config::parse(text));
}

inline std::string spec_path(const std::string& name) { return std::string(HYBRID_SPECS_DIR) + "/" + name; }

inline hybrid::ProblemSpec bundled(const std::string& name) { return hybrid::load_spec(spec_path(name)); }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() / ("hybrid-test-" + tag + "-" + std::to_string(rng() % 1000000007));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// f = 0, one mode pair, constant running cost k, no impulses.
inline std::string constant_spec_text(double k, double discount, double low = -1.0, double high = 1.0) {
  std::ostringstream o;
  o << "[problem]\ndimension = 1\ndiscount = " << hybrid::config::format_number(discount)
    << "\nbox = [[" << hybrid::config::format_number(low) << ", " << hybrid::config::format_number(high) << "]]\n"
    << "[dynamics.\"1,1\"]\nf = [\"0\"]\n[cost.\"1,1\"]\nk = \"" << hybrid::config::format_number(k) << "\"\n";
  return o.str();
}

}  // namespace testing
