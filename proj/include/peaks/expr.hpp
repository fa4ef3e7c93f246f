#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "peaks/errors.hpp"

namespace peaks::expr {

// A small closed-form expression language so problem files can define maps,
// objectives, envelopes and certificates without recompilation.
//
// Grammar (precedence low to high): +,-  then *,/  then unary -  then ^
// (right associative), with parentheses, the functions exp, ln, abs, min,
// max, floor, sqrt, and first-match piecewise:
//
//   piecewise(x1 <= 0: 0, x1 > 2: 1, else: x1/2)
//
// No implicit multiplication; every product needs an explicit '*'.

enum class NodeKind {
  literal,
  variable,
  negate,
  add,
  sub,
  mul,
  divide,
  power,
  call,
  compare,
  piecewise,
};

enum class Builtin { exp, ln, abs, min, max, floor, sqrt };

enum class CmpOp { le, lt, ge, gt, eq };

struct Node {
  NodeKind kind{NodeKind::literal};
  double value = 0.0;        // literal
  int var_index = -1;        // variable
  std::string name;          // variable name, for diagnostics and printing
  Builtin builtin{};         // call
  CmpOp cmp{};               // compare
  std::size_t offset = 0;    // byte offset in the source text
  std::vector<Node> args;
};

struct Expression {
  Node root;
  std::vector<std::string> variables;  // binding order for evaluate()
};

// Parses `text` over the given variable names. Throws parse_error with the
// byte offset of the first problem (including undeclared variables).
Expression parse(const std::string& text, std::vector<std::string> variables);

// Evaluates with bindings[i] bound to variables[i]. Domain violations
// (ln of a nonpositive value, division by zero, sqrt of a negative, an
// invalid power) throw evaluation_error carrying the node offset.
double evaluate(const Expression& expr, std::span<const double> bindings);

// Canonical fully parenthesised rendering; parse(print(e)) evaluates
// identically to e.
std::string print(const Expression& expr);

}  // namespace peaks::expr
