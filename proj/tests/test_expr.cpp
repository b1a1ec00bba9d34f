#include <doctest.h>

#include <cstring>
#include <random>

#include "test_util.hpp"
#include "warpiso/expr.hpp"

using namespace warpiso;
using namespace warpiso::expr;
using warpiso::testing::fd_derivative;

TEST_SUITE("expr") {

TEST_CASE("parses the shipped metric expressions") {
  CHECK(parse("1 + m/(r+1)").evaluate(1.0, {{"m", 1.0}}) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(parse("r").evaluate(3.25) == 3.25);
  CHECK(parse("1 - m/r + kappa*r^2").evaluate(1.0, {{"m", 1.0}, {"kappa", 1.0}}) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(parse("1 + kappa*r^2").evaluate(2.0, {{"kappa", 0.25}}) == doctest::Approx(2.0));
}

TEST_CASE("literals and precedence") {
  CHECK(parse("1.5e-2").evaluate(1.0) == 0.015);
  CHECK(parse(".5").evaluate(1.0) == 0.5);
  CHECK(parse("2^3^2").evaluate(1.0) == 512.0);      // ^ is right-associative
  CHECK(parse("-r^2").evaluate(3.0) == -9.0);        // ^ binds tighter than unary -
  CHECK(parse("2+3*4").evaluate(1.0) == 14.0);
  CHECK(parse("1-2-3").evaluate(1.0) == -4.0);
  CHECK(parse("8/4/2").evaluate(1.0) == 1.0);
  CHECK(parse("2*r^2").evaluate(3.0) == 18.0);
  CHECK(parse("r^-2").evaluate(2.0) == 0.25);
  CHECK(parse("sin(0)").evaluate(1.0) == 0.0);
  CHECK(parse("tanh(0)+cos(0)").evaluate(5.0) == 1.0);
}

TEST_CASE("parse errors carry byte offsets and expected tokens") {
  auto expect_error = [](const char* text, std::size_t offset) {
    try {
      parse(text);
      FAIL_CHECK("expected a parse error for: " << text);
    } catch (const ParseError& e) {
      CHECK(e.offset == offset);
      CHECK_FALSE(e.expected.empty());
    }
  };
  expect_error("r+", 2);        // trailing operator
  expect_error("", 0);          // empty input
  expect_error("   ", 0);       // only whitespace
  expect_error("(1+r", 4);      // unbalanced (
  expect_error("1+r)", 3);      // unbalanced )
  expect_error("foo(r)", 0);    // unknown function name
  expect_error(")", 0);
  expect_error("1 + * 2", 4);
  expect_error("sin", 3);       // function used without arguments

  try {
    parse("1 + \xc3\xa9");
    FAIL_CHECK("expected a parse error for non-ASCII input");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(parse("1/(r-1)").evaluate(1.0), EvalError);
  CHECK_THROWS_AS(parse("log(r-2)").evaluate(1.0), EvalError);
  CHECK_THROWS_AS(parse("sqrt(0-r)").evaluate(1.0), EvalError);
  CHECK_THROWS_AS(parse("m*r").evaluate(1.0), EvalError);  // unbound parameter
  // non-constant exponent over a non-positive base
  CHECK_THROWS_AS(parse("(r-2)^r").evaluate(1.0), EvalError);
  CHECK(parse("r^r").evaluate(2.0) == 4.0);
  // constant exponent: negative bases work for integral exponents only
  CHECK(parse("(0-r)^2").evaluate(3.0) == 9.0);
  CHECK_THROWS_AS(parse("(0-r)^0.5").evaluate(4.0), EvalError);
  CHECK_THROWS_AS(parse("(1/0)").evaluate(1.0), EvalError);  // kept unfolded
}

TEST_CASE("derivatives match the closed forms") {
  // d/dr r^2 = 2r
  const Expression d1 = parse("r^2").derivative();
  for (double r : {0.5, 1.0, 2.0, 3.7}) {
    CHECK(d1.evaluate(r) == doctest::Approx(2 * r).epsilon(1e-14));
  }
  // d/dr (1 + m/(r+1)) = -m/(r+1)^2, checked against finite differences
  const Expression e2 = parse("1 + m/(r+1)");
  const Expression d2 = e2.derivative();
  const Bindings b{{"m", 1.0}};
  for (double r : {0.5, 1.0, 2.0}) {
    const double closed = -1.0 / ((r + 1) * (r + 1));
    const double fd = fd_derivative([&](double x) { return e2.evaluate(x, b); }, r);
    CHECK(d2.evaluate(r, b) == doctest::Approx(closed).epsilon(1e-13));
    CHECK(d2.evaluate(r, b) == doctest::Approx(fd).epsilon(1e-8));
  }
  // constants and parameters
  CHECK(parse("42").derivative().evaluate(7.0) == 0.0);
  CHECK(parse("m").derivative().evaluate(7.0, {{"m", 3.0}}) == 0.0);
}

TEST_CASE("symbolic derivative agrees with finite differences on a dense grid") {
  struct Case {
    const char* text;
    Bindings bindings;
    double lo, hi;
  };
  const Case cases[] = {
      {"1", {}, 0.1, 10.0},
      {"1 + kappa*r^2", {{"kappa", 1.0}}, 0.1, 10.0},
      {"1 - m/r + kappa*r^2", {{"m", 1.0}, {"kappa", 1.0}}, 1.1, 10.0},
      {"1 + m/(r+1)", {{"m", 1.0}}, 0.1, 10.0},
      {"sin(r)*exp(r/4) + tanh(r) - log(r+2)/sqrt(r)", {}, 0.3, 8.0},
      {"r^2.5 + 2^r", {}, 0.5, 5.0},
  };
  for (const auto& c : cases) {
    const Expression e = parse(c.text);
    const Expression d = e.derivative();
    for (int i = 0; i < 100; ++i) {
      const double r = c.lo + (c.hi - c.lo) * (i + 0.5) / 100;
      const double fd =
          fd_derivative([&](double x) { return e.evaluate(x, c.bindings); }, r);
      const double sym = d.evaluate(r, c.bindings);
      CHECK(std::abs(sym - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("evaluation is bit-for-bit deterministic") {
  const Expression e = parse("sqrt(1 + m/(r+1)) * sin(r^2) / tanh(r) + 2^r");
  const Bindings b{{"m", 0.7}};
  for (double r : {0.3, 1.1, 5.9}) {
    const double a = e.evaluate(r, b);
    const double c = e.evaluate(r, b);
    CHECK(std::memcmp(&a, &c, sizeof(double)) == 0);
  }
}

namespace {

NodePtr random_tree(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 10);
  std::uniform_real_distribution<double> val(-4.0, 4.0);
  switch (pick(rng)) {
    case 0: return make_constant(val(rng));
    case 1: return make_constant(static_cast<double>(rng() % 9));
    case 2: return make_radius();
    case 3: return make_parameter(rng() % 2 ? "m" : "kappa");
    case 4: return make_negate(random_tree(rng, depth - 1));
    case 5: return make_binary(NodeKind::add, random_tree(rng, depth - 1),
                               random_tree(rng, depth - 1));
    case 6: return make_binary(NodeKind::sub, random_tree(rng, depth - 1),
                               random_tree(rng, depth - 1));
    case 7: return make_binary(NodeKind::mul, random_tree(rng, depth - 1),
                               random_tree(rng, depth - 1));
    case 8: return make_binary(NodeKind::div, random_tree(rng, depth - 1),
                               random_tree(rng, depth - 1));
    case 9: return make_binary(NodeKind::pow, random_tree(rng, depth - 1),
                               random_tree(rng, depth - 1));
    default: {
      const Func funcs[] = {Func::sqrt, Func::exp, Func::log,
                            Func::sin, Func::cos, Func::tanh};
      return make_call(funcs[rng() % 6], random_tree(rng, depth - 1));
    }
  }
}

}  // namespace

TEST_CASE("print/parse round-trip is structurally exact") {
  std::mt19937 rng(7u);
  for (int trial = 0; trial < 300; ++trial) {
    const Expression tree(random_tree(rng, 5));
    const std::string printed = tree.to_string();
    CAPTURE(printed);
    const Expression reparsed = parse(printed);
    CHECK(reparsed.structurally_equal(tree));
    CHECK(parse(reparsed.to_string()).structurally_equal(reparsed));
  }
}

TEST_CASE("parameters are reported sorted and unique") {
  const auto names = parse("m + kappa*r^2 - m/(r+1)").parameters();
  REQUIRE(names.size() == 2);
  CHECK(names[0] == "kappa");
  CHECK(names[1] == "m");
  CHECK(parse("r+1").parameters().empty());
}

TEST_CASE("constant folding keeps error cases unfolded") {
  CHECK(parse("2*3+1").is_constant());
  CHECK_FALSE(parse("1/0").is_constant());
  CHECK_FALSE(parse("sqrt(0-2)").is_constant());
  CHECK(parse("sqrt(4)").is_constant());
}

}  // TEST_SUITE
