#include "peaks/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <utility>

namespace peaks::expr {
namespace {

struct Token {
  enum class Type { number, ident, op, lparen, rparen, comma, colon, cmp, end };
  Type type{Type::end};
  double number = 0.0;
  std::string text;
  CmpOp cmp{};
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& s) : src_(s) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= src_.size()) {
      tok_.type = Token::Type::end;
      return;
    }
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      const char* begin = src_.c_str() + pos_;
      char* end = nullptr;
      tok_.number = std::strtod(begin, &end);
      tok_.type = Token::Type::number;
      pos_ += static_cast<std::size_t>(end - begin);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
        ++pos_;
      tok_.type = Token::Type::ident;
      tok_.text = src_.substr(start, pos_ - start);
      return;
    }
    switch (c) {
      case '(': tok_.type = Token::Type::lparen; ++pos_; return;
      case ')': tok_.type = Token::Type::rparen; ++pos_; return;
      case ',': tok_.type = Token::Type::comma; ++pos_; return;
      case ':': tok_.type = Token::Type::colon; ++pos_; return;
      case '+': case '-': case '*': case '/': case '^':
        tok_.type = Token::Type::op;
        tok_.text = std::string(1, c);
        ++pos_;
        return;
      case '<': case '>': case '=': {
        tok_.type = Token::Type::cmp;
        bool eq = pos_ + 1 < src_.size() && src_[pos_ + 1] == '=';
        if (c == '<') tok_.cmp = eq ? CmpOp::le : CmpOp::lt;
        else if (c == '>') tok_.cmp = eq ? CmpOp::ge : CmpOp::gt;
        else {
          if (!eq) throw parse_error("expected '==' comparison", pos_);
          tok_.cmp = CmpOp::eq;
        }
        pos_ += eq ? 2 : 1;
        return;
      }
      default:
        throw parse_error(std::string("unexpected character '") + c + "'", pos_);
    }
  }

  const std::string& src_;
  std::size_t pos_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& text, const std::vector<std::string>& vars)
      : lex_(text), vars_(vars) {}

  Node parse_full() {
    Node n = parse_additive();
    expect_end();
    return n;
  }

 private:
  [[noreturn]] static void fail(const std::string& msg, std::size_t off) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s (offset %zu)", msg.c_str(), off);
    throw parse_error(buf, off);
  }

  void expect_end() {
    if (lex_.peek().type != Token::Type::end)
      fail("trailing input after expression", lex_.peek().offset);
  }

  Node parse_additive() {
    Node left = parse_term();
    while (lex_.peek().type == Token::Type::op &&
           (lex_.peek().text == "+" || lex_.peek().text == "-")) {
      Token op = lex_.take();
      Node right = parse_term();
      Node n;
      n.kind = op.text == "+" ? NodeKind::add : NodeKind::sub;
      n.offset = op.offset;
      n.args.push_back(std::move(left));
      n.args.push_back(std::move(right));
      left = std::move(n);
    }
    return left;
  }

  Node parse_term() {
    Node left = parse_unary();
    while (lex_.peek().type == Token::Type::op &&
           (lex_.peek().text == "*" || lex_.peek().text == "/")) {
      Token op = lex_.take();
      Node right = parse_unary();
      Node n;
      n.kind = op.text == "*" ? NodeKind::mul : NodeKind::divide;
      n.offset = op.offset;
      n.args.push_back(std::move(left));
      n.args.push_back(std::move(right));
      left = std::move(n);
    }
    return left;
  }

  Node parse_unary() {
    if (lex_.peek().type == Token::Type::op && lex_.peek().text == "-") {
      Token op = lex_.take();
      Node n;
      n.kind = NodeKind::negate;
      n.offset = op.offset;
      n.args.push_back(parse_unary());
      return n;
    }
    return parse_power();
  }

  Node parse_power() {
    Node base = parse_primary();
    if (lex_.peek().type == Token::Type::op && lex_.peek().text == "^") {
      Token op = lex_.take();
      Node n;
      n.kind = NodeKind::power;
      n.offset = op.offset;
      n.args.push_back(std::move(base));
      n.args.push_back(parse_unary());  // right associative, allows a^-b
      return n;
    }
    return base;
  }

  Node parse_comparison() {
    Node left = parse_additive();
    if (lex_.peek().type != Token::Type::cmp)
      fail("expected a comparison in piecewise condition", lex_.peek().offset);
    Token op = lex_.take();
    Node n;
    n.kind = NodeKind::compare;
    n.cmp = op.cmp;
    n.offset = op.offset;
    n.args.push_back(std::move(left));
    n.args.push_back(parse_additive());
    return n;
  }

  Node parse_piecewise(std::size_t offset) {
    expect(Token::Type::lparen, "expected '(' after piecewise");
    Node n;
    n.kind = NodeKind::piecewise;
    n.offset = offset;
    bool saw_else = false;
    while (true) {
      if (lex_.peek().type == Token::Type::ident && lex_.peek().text == "else") {
        lex_.take();
        expect(Token::Type::colon, "expected ':' after else");
        n.args.push_back(parse_additive());
        saw_else = true;
        break;
      }
      n.args.push_back(parse_comparison());
      expect(Token::Type::colon, "expected ':' after piecewise condition");
      n.args.push_back(parse_additive());
      if (lex_.peek().type == Token::Type::comma) {
        lex_.take();
        continue;
      }
      break;
    }
    if (!saw_else) fail("piecewise requires a final 'else:' branch", lex_.peek().offset);
    expect(Token::Type::rparen, "expected ')' to close piecewise");
    return n;
  }

  Node parse_primary() {
    Token t = lex_.take();
    switch (t.type) {
      case Token::Type::number: {
        Node n;
        n.kind = NodeKind::literal;
        n.value = t.number;
        n.offset = t.offset;
        return n;
      }
      case Token::Type::lparen: {
        Node inner = parse_additive();
        expect(Token::Type::rparen, "expected ')'");
        return inner;
      }
      case Token::Type::ident: {
        if (t.text == "piecewise") return parse_piecewise(t.offset);
        if (lex_.peek().type == Token::Type::lparen) return parse_call(t);
        for (std::size_t i = 0; i < vars_.size(); ++i) {
          if (vars_[i] == t.text) {
            Node n;
            n.kind = NodeKind::variable;
            n.var_index = static_cast<int>(i);
            n.name = t.text;
            n.offset = t.offset;
            return n;
          }
        }
        fail("undeclared variable '" + t.text + "'", t.offset);
      }
      default:
        fail("expected a value", t.offset);
    }
  }

  Node parse_call(const Token& name) {
    static const std::pair<const char*, Builtin> table[] = {
        {"exp", Builtin::exp},   {"ln", Builtin::ln},   {"abs", Builtin::abs},
        {"min", Builtin::min},   {"max", Builtin::max}, {"floor", Builtin::floor},
        {"sqrt", Builtin::sqrt},
    };
    Node n;
    n.kind = NodeKind::call;
    n.offset = name.offset;
    bool known = false;
    for (auto& [fname, b] : table) {
      if (name.text == fname) {
        n.builtin = b;
        known = true;
        break;
      }
    }
    if (!known) fail("unknown function '" + name.text + "'", name.offset);
    expect(Token::Type::lparen, "expected '('");
    n.args.push_back(parse_additive());
    while (lex_.peek().type == Token::Type::comma) {
      lex_.take();
      n.args.push_back(parse_additive());
    }
    expect(Token::Type::rparen, "expected ')'");
    bool variadic = n.builtin == Builtin::min || n.builtin == Builtin::max;
    if (variadic && n.args.size() < 2)
      fail("min/max need at least two arguments", name.offset);
    if (!variadic && n.args.size() != 1)
      fail("function takes exactly one argument", name.offset);
    n.name = name.text;
    return n;
  }

  void expect(Token::Type type, const char* msg) {
    if (lex_.peek().type != type) fail(msg, lex_.peek().offset);
    lex_.take();
  }

  Lexer lex_;
  const std::vector<std::string>& vars_;
};

[[noreturn]] void eval_fail(const char* what, const Node& n) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%s (offset %zu)", what, n.offset);
  throw evaluation_error(buf, static_cast<long>(n.offset));
}

double eval_node(const Node& n, std::span<const double> b) {
  switch (n.kind) {
    case NodeKind::literal:
      return n.value;
    case NodeKind::variable:
      if (n.var_index < 0 || static_cast<std::size_t>(n.var_index) >= b.size())
        eval_fail("unbound variable", n);
      return b[static_cast<std::size_t>(n.var_index)];
    case NodeKind::negate:
      return -eval_node(n.args[0], b);
    case NodeKind::add:
      return eval_node(n.args[0], b) + eval_node(n.args[1], b);
    case NodeKind::sub:
      return eval_node(n.args[0], b) - eval_node(n.args[1], b);
    case NodeKind::mul:
      return eval_node(n.args[0], b) * eval_node(n.args[1], b);
    case NodeKind::divide: {
      double den = eval_node(n.args[1], b);
      if (den == 0.0) eval_fail("division by zero", n);
      return eval_node(n.args[0], b) / den;
    }
    case NodeKind::power: {
      double base = eval_node(n.args[0], b);
      double exp = eval_node(n.args[1], b);
      double r = std::pow(base, exp);
      if (std::isnan(r)) eval_fail("invalid power", n);
      return r;
    }
    case NodeKind::call: {
      double a0 = eval_node(n.args[0], b);
      switch (n.builtin) {
        case Builtin::exp: return std::exp(a0);
        case Builtin::ln:
          if (a0 <= 0.0) eval_fail("ln of a nonpositive value", n);
          return std::log(a0);
        case Builtin::abs: return std::fabs(a0);
        case Builtin::floor: return std::floor(a0);
        case Builtin::sqrt:
          if (a0 < 0.0) eval_fail("sqrt of a negative value", n);
          return std::sqrt(a0);
        case Builtin::min: {
          double m = a0;
          for (std::size_t i = 1; i < n.args.size(); ++i)
            m = std::min(m, eval_node(n.args[i], b));
          return m;
        }
        case Builtin::max: {
          double m = a0;
          for (std::size_t i = 1; i < n.args.size(); ++i)
            m = std::max(m, eval_node(n.args[i], b));
          return m;
        }
      }
      eval_fail("unknown builtin", n);
    }
    case NodeKind::compare: {
      double l = eval_node(n.args[0], b);
      double r = eval_node(n.args[1], b);
      switch (n.cmp) {
        case CmpOp::le: return l <= r ? 1.0 : 0.0;
        case CmpOp::lt: return l < r ? 1.0 : 0.0;
        case CmpOp::ge: return l >= r ? 1.0 : 0.0;
        case CmpOp::gt: return l > r ? 1.0 : 0.0;
        case CmpOp::eq: return l == r ? 1.0 : 0.0;
      }
      eval_fail("unknown comparison", n);
    }
    case NodeKind::piecewise: {
      // args = cond, expr, cond, expr, ..., else-expr; first match wins.
      std::size_t i = 0;
      for (; i + 1 < n.args.size(); i += 2) {
        if (eval_node(n.args[i], b) != 0.0) return eval_node(n.args[i + 1], b);
      }
      return eval_node(n.args.back(), b);
    }
  }
  eval_fail("malformed node", n);
}

void print_node(const Node& n, std::string& out) {
  char buf[64];
  switch (n.kind) {
    case NodeKind::literal:
      // Negative literals print the way they re-parse (a negated positive),
      // keeping print o parse o print a fixed point.
      if (std::signbit(n.value)) {
        std::snprintf(buf, sizeof buf, "(-%.17g)", -n.value);
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
      }
      out += buf;
      return;
    case NodeKind::variable:
      out += n.name;
      return;
    case NodeKind::negate:
      out += "(-";
      print_node(n.args[0], out);
      out += ")";
      return;
    case NodeKind::add:
    case NodeKind::sub:
    case NodeKind::mul:
    case NodeKind::divide:
    case NodeKind::power: {
      const char* op = n.kind == NodeKind::add      ? " + "
                       : n.kind == NodeKind::sub    ? " - "
                       : n.kind == NodeKind::mul    ? " * "
                       : n.kind == NodeKind::divide ? " / "
                                                    : " ^ ";
      out += "(";
      print_node(n.args[0], out);
      out += op;
      print_node(n.args[1], out);
      out += ")";
      return;
    }
    case NodeKind::call: {
      out += n.name;
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print_node(n.args[i], out);
      }
      out += ")";
      return;
    }
    case NodeKind::compare: {
      const char* op = n.cmp == CmpOp::le   ? " <= "
                       : n.cmp == CmpOp::lt ? " < "
                       : n.cmp == CmpOp::ge ? " >= "
                       : n.cmp == CmpOp::gt ? " > "
                                            : " == ";
      print_node(n.args[0], out);
      out += op;
      print_node(n.args[1], out);
      return;
    }
    case NodeKind::piecewise: {
      out += "piecewise(";
      std::size_t i = 0;
      for (; i + 1 < n.args.size(); i += 2) {
        if (i) out += ", ";
        print_node(n.args[i], out);
        out += ": ";
        print_node(n.args[i + 1], out);
      }
      if (n.args.size() > 1) out += ", ";
      out += "else: ";
      print_node(n.args.back(), out);
      out += ")";
      return;
    }
  }
}

}  // namespace

Expression parse(const std::string& text, std::vector<std::string> variables) {
  Parser p(text, variables);
  Expression e;
  e.root = p.parse_full();
  e.variables = std::move(variables);
  return e;
}

double evaluate(const Expression& expr, std::span<const double> bindings) {
  if (bindings.size() < expr.variables.size())
    throw evaluation_error("not every variable is bound", 0);
  return eval_node(expr.root, bindings);
}

std::string print(const Expression& expr) {
  std::string out;
  print_node(expr.root, out);
  return out;
}

}  // namespace peaks::expr
