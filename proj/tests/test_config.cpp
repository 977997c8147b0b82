#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "hybrid/config.hpp"

using namespace hybrid::config;

TEST_CASE("sections, values and comments") {
  Document d = parse(R"(# leading comment
[problem]
dimension = 2     # trailing comment
discount = 0.5
name = "a # not a comment"
flag = true
box = [[-1.0, 1.0],
       [0, 2e0]]

[dynamics."a,b"]
f = ["x0", "-x1"]
)");
  const Table* p = d.find("problem");
  REQUIRE(p);
  CHECK(p->at("dimension").as_integer("dimension") == 2);
  CHECK(p->at("discount").as_number("discount") == 0.5);
  CHECK(p->at("name").as_string("name") == "a # not a comment");
  CHECK(p->at("flag").as_bool("flag"));
  auto box = p->at("box").as_matrix("box");
  REQUIRE(box.size() == 2);
  CHECK(box[1][1] == 2.0);
  auto subs = d.subtables("dynamics");
  REQUIRE(subs.count("a,b") == 1);
  CHECK(subs["a,b"]->at("f").as_strings("f") == std::vector<std::string>{"x0", "-x1"});
  CHECK(d.find("missing") == nullptr);
}

TEST_CASE("malformed documents are rejected with a line number") {
  CHECK_THROWS_AS(parse("x = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("[a]\nx = [1, 2\n"), ConfigError);
  CHECK_THROWS_AS(parse("[a]\nx = \"open\n"), ConfigError);
  CHECK_THROWS_AS(parse("[a]\n[a]\n"), ConfigError);
  try {
    parse("[a]\nx = 1\ny = @\n");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("type mismatches name the key") {
  Document d = parse("[a]\nx = \"text\"\nn = 1.5\n");
  try {
    d.find("a")->at("x").as_number("a.x");
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("a.x") != std::string::npos);
  }
  CHECK_THROWS_AS(d.find("a")->at("n").as_integer("a.n"), ConfigError);
  CHECK_THROWS_AS(d.find("a")->at("missing"), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mant(-10.0, 10.0);
  std::uniform_int_distribution<int> ex(-30, 30);
  for (int i = 0; i < 1000; ++i) {
    double v = std::ldexp(mant(rng), ex(rng));
    std::string s = format_number(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
    CHECK(s.find_first_of(".eE") != std::string::npos);
  }
  CHECK(format_number(2.0) == "2.0");
}

TEST_CASE("quote escapes") {
  Document d = parse("[a]\ns = " + quote("say \"hi\" \\ there") + "\n");
  CHECK(d.find("a")->at("s").as_string("s") == "say \"hi\" \\ there");
}
