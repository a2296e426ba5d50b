#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cubicqn/toml.hpp"

using cubicqn::toml::ParseError;
using cubicqn::toml::Value;

TEST_CASE("scalars, strings, and comments") {
  const Value root = Value::parse(
      "# experiment\n"
      "title = \"fixture # not a comment\"\n"
      "count = 42\n"
      "rate = 1.5e-3   # trailing\n"
      "flag = true\n"
      "limit = inf\n");
  CHECK(root.find("title")->as_string() == "fixture # not a comment");
  CHECK(root.find("count")->as_integer() == 42);
  CHECK(root.find("count")->as_number() == 42.0);
  CHECK(root.find("rate")->as_number() == doctest::Approx(0.0015));
  CHECK(root.find("flag")->as_boolean());
  CHECK(std::isinf(root.find("limit")->as_number()));
  CHECK(root.find("missing") == nullptr);
}

TEST_CASE("tables and dotted paths") {
  const Value root = Value::parse(
      "[problem]\n"
      "n = 500\n"
      "[run.output]\n"
      "dir = \"results\"\n");
  const Value* problem = root.find("problem");
  REQUIRE(problem != nullptr);
  CHECK(problem->find("n")->as_integer() == 500);
  CHECK(root.find("run")->find("output")->find("dir")->as_string() == "results");
}

TEST_CASE("arrays of tables preserve order") {
  const Value root = Value::parse(
      "[[method]]\n"
      "name = \"gd\"\n"
      "[[method]]\n"
      "name = \"cubic\"\n"
      "memory = 10\n");
  const Value* methods = root.find("method");
  REQUIRE(methods != nullptr);
  REQUIRE(methods->is_array());
  REQUIRE(methods->items().size() == 2);
  CHECK(methods->items()[0].find("name")->as_string() == "gd");
  CHECK(methods->items()[1].find("name")->as_string() == "cubic");
  CHECK(methods->items()[1].find("memory")->as_integer() == 10);
}

TEST_CASE("flat arrays and escapes") {
  const Value root = Value::parse(
      "xs = [1, 2.5, -3]\n"
      "names = [\"a\", \"b\\\"c\"]\n"
      "empty = []\n");
  const Value* xs = root.find("xs");
  REQUIRE(xs->is_array());
  CHECK(xs->items()[0].as_number() == 1.0);
  CHECK(xs->items()[1].as_number() == 2.5);
  CHECK(xs->items()[2].as_number() == -3.0);
  CHECK(root.find("names")->items()[1].as_string() == "b\"c");
  CHECK(root.find("empty")->items().empty());
}

TEST_CASE("errors carry line numbers") {
  const auto expect_line = [](const char* text, int line) {
    try {
      Value::parse(text);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line == line);
    }
  };
  expect_line("x = 1\ny 2\n", 2);               // missing '='
  expect_line("x = \n", 1);                     // missing value
  expect_line("x = \"open\n", 1);               // unterminated string
  expect_line("[table\n", 1);                   // unterminated header
  expect_line("x = 1\nx = 2\n", 2);             // duplicate key
  expect_line("x = [1, 2\n", 1);                // unterminated array
  expect_line("x = what\n", 1);                 // unknown scalar
  expect_line("a b = 1\n", 1);                  // bad key
}

TEST_CASE("type mismatches raise") {
  const Value root = Value::parse("x = 1\ns = \"txt\"\n");
  CHECK_THROWS(root.find("x")->as_string());
  CHECK_THROWS(root.find("s")->as_number());
  CHECK_THROWS(root.find("s")->as_boolean());
}
