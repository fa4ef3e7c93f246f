#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "peaks/expr.hpp"

using namespace peaks;
using namespace peaks::expr;

TEST_CASE("objective expression evaluates the worked form") {
  // phi(x,y) = y^2 - x^2 + p x at (x, y) = (1, 1/2), p = 30
  Expression e = parse("y^2 - x1^2 + p*x1", {"x1", "y", "p"});
  std::vector<double> b{1.0, 0.5, 30.0};
  CHECK(evaluate(e, b) == doctest::Approx(29.25).epsilon(1e-15));
}

TEST_CASE("two-variable bound expression parses and evaluates") {
  Expression e = parse("min(s, 900*exp(t*ln(2/3)/10))", {"s", "t"});
  std::vector<double> b{300.0, 0.0};
  CHECK(evaluate(e, b) == doctest::Approx(300.0));
  b = {300.0, 40.0};
  double expected = 900.0 * std::exp(40.0 * std::log(2.0 / 3.0) / 10.0);
  CHECK(evaluate(e, b) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("truncated input reports the offset") {
  try {
    parse("x1 +", {"x1"});
    FAIL("expected parse error");
  } catch (const parse_error& e) {
    CHECK(e.offset == 4);
  }
}

TEST_CASE("undeclared variable is a parse error with its name") {
  CHECK_THROWS_WITH_AS(parse("q + 1", {"x1"}),
                       doctest::Contains("undeclared variable 'q'"), parse_error);
}

TEST_CASE("precedence and associativity") {
  Expression e = parse("2^3^2", {});
  CHECK(evaluate(e, {}) == 512.0);  // right associative
  e = parse("-2^2", {});
  CHECK(evaluate(e, {}) == -4.0);  // ^ binds tighter than unary minus
  e = parse("2 + 3 * 4 ^ 2", {});
  CHECK(evaluate(e, {}) == 50.0);
  e = parse("8 - 3 - 2", {});
  CHECK(evaluate(e, {}) == 3.0);  // left associative
}

TEST_CASE("piecewise takes the first matching branch") {
  Expression e = parse("piecewise(x1 <= 0: 0, x1 <= 1: x1, else: 1)", {"x1"});
  std::vector<double> b{-2.0};
  CHECK(evaluate(e, b) == 0.0);
  b[0] = 0.5;
  CHECK(evaluate(e, b) == 0.5);
  b[0] = 3.0;
  CHECK(evaluate(e, b) == 1.0);
}

TEST_CASE("domain violations are surfaced, not absorbed") {
  std::vector<double> b{0.0};
  CHECK_THROWS_AS(evaluate(parse("ln(x1)", {"x1"}), b), evaluation_error);
  CHECK_THROWS_AS(evaluate(parse("1/x1", {"x1"}), b), evaluation_error);
  b[0] = -1.0;
  CHECK_THROWS_AS(evaluate(parse("sqrt(x1)", {"x1"}), b), evaluation_error);
}

TEST_CASE("constant expressions ignore bindings") {
  Expression e = parse("min(3, 4) + max(1, 2, 5)", {"x1"});
  std::vector<double> b{123.0};
  CHECK(evaluate(e, b) == 8.0);
  b[0] = -7.0;
  CHECK(evaluate(e, b) == 8.0);
}

namespace {

// Random tree generator for the print/parse roundtrip property.
Node random_tree(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 7);
  std::uniform_real_distribution<double> lit(-4.0, 4.0);
  Node n;
  switch (pick(rng)) {
    case 0: {
      n.kind = NodeKind::literal;
      n.value = lit(rng);
      return n;
    }
    case 1: {
      n.kind = NodeKind::variable;
      n.var_index = static_cast<int>(rng() % 3);
      n.name = std::vector<std::string>{"x", "y", "z"}[static_cast<std::size_t>(n.var_index)];
      return n;
    }
    case 2:
      n.kind = NodeKind::add;
      break;
    case 3:
      n.kind = NodeKind::sub;
      break;
    case 4:
      n.kind = NodeKind::mul;
      break;
    case 5: {
      n.kind = NodeKind::negate;
      n.args.push_back(random_tree(rng, depth - 1));
      return n;
    }
    case 6: {
      n.kind = NodeKind::call;
      n.builtin = Builtin::min;
      n.name = "min";
      n.args.push_back(random_tree(rng, depth - 1));
      n.args.push_back(random_tree(rng, depth - 1));
      return n;
    }
    default: {
      n.kind = NodeKind::call;
      n.builtin = Builtin::abs;
      n.name = "abs";
      n.args.push_back(random_tree(rng, depth - 1));
      return n;
    }
  }
  n.args.push_back(random_tree(rng, depth - 1));
  n.args.push_back(random_tree(rng, depth - 1));
  return n;
}

}  // namespace

TEST_CASE("print/parse roundtrip preserves evaluation on random trees") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> bind(-3.0, 3.0);
  for (int trial = 0; trial < 300; ++trial) {
    Expression e;
    e.root = random_tree(rng, 5);
    e.variables = {"x", "y", "z"};
    std::string text = print(e);
    Expression back = parse(text, e.variables);
    std::vector<double> b{bind(rng), bind(rng), bind(rng)};
    double v1 = evaluate(e, b);
    double v2 = evaluate(back, b);
    CHECK(v1 == doctest::Approx(v2).epsilon(1e-12));
    // and printing is idempotent through a second roundtrip
    CHECK(print(back) == text);
  }
}
