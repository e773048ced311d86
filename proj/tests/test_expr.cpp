#include <doctest.h>

#include <cmath>
#include <random>

#include "perisolve/expr.hpp"

using namespace perisolve;
using namespace perisolve::expr;

TEST_CASE("grammar accepts the coefficient language") {
  CHECK(parse("1+sin(t)^2") != nullptr);
  CHECK(parse("abs(cos(2*t))") != nullptr);
  CHECK(parse("exp(-cos(t)^2)+1") != nullptr);
  CHECK(parse("2^-3") != nullptr);
  CHECK(parse("1e-3 + 2.5E+2") != nullptr);
}

TEST_CASE("syntax errors carry byte offsets") {
  CHECK_THROWS_AS(parse(""), ParseError);
  try {
    parse("sin(");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  try {
    parse("1 + $");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse("foo(t)"), ParseError);   // unknown function
  CHECK_THROWS_AS(parse("t + x"), ParseError);    // unknown identifier
  CHECK_THROWS_AS(parse("(1+2"), ParseError);
  CHECK_THROWS_AS(parse("1 2"), ParseError);
}

TEST_CASE("evaluation matches closed forms") {
  const auto at = [](const char* src, double t) { return eval(*parse(src), t); };
  CHECK(at("sin(t)^2", M_PI / 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(at("exp(cos(t)^2)", 0.0) == doctest::Approx(M_E).epsilon(1e-14));
  CHECK(at("abs(cos(2*t))", M_PI / 4) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(at("pi", 0.0) == doctest::Approx(M_PI));
  CHECK(at("-t^2", 3.0) == doctest::Approx(-9.0));  // ^ binds tighter than unary minus
  CHECK(at("2^3^2", 0.0) == doctest::Approx(512.0));  // right-associative
  CHECK(at("e", 0.0) == doctest::Approx(M_E));
}

TEST_CASE("domain errors are raised, never silent non-finite values") {
  const auto at = [](const char* src, double t) { return eval(*parse(src), t); };
  CHECK_THROWS_AS(at("log(t)", 0.0), EvalError);
  CHECK_THROWS_AS(at("log(t-2)", 1.0), EvalError);
  CHECK_THROWS_AS(at("1/t", 0.0), EvalError);
  CHECK_THROWS_AS(at("t^-1", 0.0), EvalError);
  CHECK_THROWS_AS(at("sqrt(-1+t)", 0.0), EvalError);
  CHECK_THROWS_AS(at("exp(t)", 1e5), EvalError);  // overflow reported, not inf
  CHECK_THROWS_AS(at("(-2)^(1/2)", 0.0), EvalError);
}

TEST_CASE("signed literals fold to constants and print with protective parens") {
  CHECK(std::holds_alternative<Node::Constant>(parse("-3.5")->v));
  CHECK(eval(*parse("-3.5"), 0.0) == doctest::Approx(-3.5));
  CHECK(eval(*parse("1--2"), 0.0) == doctest::Approx(3.0));
  // a negative base must survive printing even though ^ binds tighter than -
  const NodePtr pow = std::make_shared<Node>(Node{Node::Binary{
      BinaryOp::Pow, std::make_shared<Node>(Node{Node::Constant{-2.0}}), parse("2")}});
  CHECK(structurally_equal(*pow, *parse(to_string(*pow))));
}

TEST_CASE("print / parse round-trip preserves structure") {
  const char* sources[] = {"1+sin(t)^2",      "abs(cos(2*t))",        "exp(-cos(t)^2)+1",
                           "2+cos(2*t)",      "-t^2+4/(1+t^2)",       "sqrt(t^2+1)*log(t+3)",
                           "exp(sin(2*t))"};
  for (const char* src : sources) {
    const NodePtr a = parse(src);
    const NodePtr b = parse(to_string(*a));
    CHECK_MESSAGE(structurally_equal(*a, *b), src);
  }
}

namespace {

// depth-bounded random expression trees for round-trip checks
NodePtr random_tree(std::mt19937_64& rng, int depth) {
  const auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  if (depth <= 0 || pick(4) == 0) {
    if (pick(2) == 0) return parse("t");
    const double value = (pick(2000) - 1000) / 128.0;
    return std::make_shared<Node>(Node{Node::Constant{value}});
  }
  switch (pick(7)) {
    case 0:
      return std::make_shared<Node>(Node{Node::Negate{random_tree(rng, depth - 1)}});
    case 1:
      return std::make_shared<Node>(
          Node{Node::Call{static_cast<Func>(pick(6)), random_tree(rng, depth - 1)}});
    default: {
      const auto op = static_cast<BinaryOp>(pick(5));
      return std::make_shared<Node>(
          Node{Node::Binary{op, random_tree(rng, depth - 1), random_tree(rng, depth - 1)}});
    }
  }
}

}  // namespace

TEST_CASE("print / parse round-trip on random trees") {
  // random trees are normalized through one parse first (the parser folds
  // signed literals), then printing and re-parsing must be the identity
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const NodePtr raw = random_tree(rng, 5);
    const NodePtr tree = parse(to_string(*raw));
    const NodePtr reparsed = parse(to_string(*tree));
    CHECK_MESSAGE(structurally_equal(*tree, *reparsed), to_string(*tree));
  }
}

TEST_CASE("tape evaluation agrees with tree evaluation") {
  const char* sources[] = {"1+sin(t)^2", "exp(-cos(t)^2)+1", "abs(cos(2*t))*sqrt(t^2+1)"};
  for (const char* src : sources) {
    const NodePtr node = parse(src);
    const auto tape = detail::compile(*node);
    for (double t = -3.0; t < 3.0; t += 0.37)
      CHECK(detail::run(tape, t) == doctest::Approx(eval(*node, t)).epsilon(1e-15));
  }
}

TEST_CASE("periodicity check") {
  CHECK(check_periodicity(*parse("sin(t)^2"), M_PI, 64).periodic);
  CHECK(check_periodicity(*parse("3"), 1.0, 64).periodic);

  const auto bad = check_periodicity(*parse("sin(t)"), M_PI, 64);
  CHECK_FALSE(bad.periodic);
  CHECK(bad.max_discrepancy == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(bad.worst_t == doctest::Approx(M_PI / 2).epsilon(1e-9));

  SUBCASE("true verdicts survive grid refinement") {
    CHECK(check_periodicity(*parse("sin(t)^2"), M_PI, 128).periodic);
    CHECK(check_periodicity(*parse("abs(cos(2*t))"), M_PI, 64).periodic);
    CHECK(check_periodicity(*parse("abs(cos(2*t))"), M_PI, 128).periodic);
  }
}

TEST_CASE("PeriodicExpr folds constants and evaluates concurrently-safe state") {
  const auto constant = PeriodicExpr::parse("exp(2)", 1.0);
  CHECK(constant.is_constant());
  CHECK(constant(123.0) == doctest::Approx(std::exp(2.0)).epsilon(1e-15));

  const auto varying = PeriodicExpr::parse("4+sin(t)^2", M_PI);
  CHECK_FALSE(varying.is_constant());
  CHECK(varying(0.25) == doctest::Approx(4.0 + std::pow(std::sin(0.25), 2)).epsilon(1e-15));
}
