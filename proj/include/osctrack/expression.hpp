#ifndef OSCTRACK__EXPRESSION_HPP_
#define OSCTRACK__EXPRESSION_HPP_

/**
 * @file
 * @brief Small arithmetic-expression evaluator in one variable `t`.
 *
 * Grammar: numbers, `t`, `pi`, `e`, `+ - * / ^`, parentheses and the functions
 * sin, cos, tan, exp, sqrt, pow/power(a, b). Evaluation is forward-mode (value, derivative).
 */

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "osctrack/errors.hpp"

namespace osctrack {

/// Value and first derivative with respect to t.
struct Dual
{
  double v{0};
  double d{0};
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }

inline Dual pow(Dual a, Dual b)
{
  const double v = std::pow(a.v, b.v);
  if (b.d == 0.0) {
    const double dv = b.v == 0.0 ? 0.0 : b.v * std::pow(a.v, b.v - 1) * a.d;
    return {v, dv};
  }
  return {v, v * (b.d * std::log(a.v) + b.v * a.d / a.v)};
}

class Expression
{
public:
  enum class Op { constant, variable, add, sub, mul, div, neg, pow, sin, cos, tan, exp, sqrt };

  static Expression parse(const std::string & text)
  {
    Parser p{text, 0};
    auto node = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) { p.fail("unexpected trailing input"); }
    return Expression(std::move(node), text);
  }

  Dual evaluate(double t) const { return eval(*root_, Dual{t, 1.0}); }
  double operator()(double t) const { return evaluate(t).v; }
  const std::string & source() const { return source_; }

private:
  struct Node
  {
    Op op{Op::constant};
    double value{0};
    std::vector<std::shared_ptr<const Node>> args;
  };
  using NodePtr = std::shared_ptr<const Node>;

  Expression(NodePtr root, std::string source) : root_(std::move(root)), source_(std::move(source)) {}

  static NodePtr make(Op op, std::vector<NodePtr> args = {}, double value = 0)
  {
    auto n   = std::make_shared<Node>();
    n->op    = op;
    n->value = value;
    n->args  = std::move(args);
    return n;
  }

  static Dual eval(const Node & n, Dual t)
  {
    auto arg = [&](std::size_t i) { return eval(*n.args[i], t); };
    switch (n.op) {
    case Op::constant: return {n.value, 0.0};
    case Op::variable: return t;
    case Op::add: return arg(0) + arg(1);
    case Op::sub: return arg(0) - arg(1);
    case Op::mul: return arg(0) * arg(1);
    case Op::div: return arg(0) / arg(1);
    case Op::neg: return -arg(0);
    case Op::pow: return osctrack::pow(arg(0), arg(1));
    case Op::sin: {
      const Dual a = arg(0);
      return {std::sin(a.v), std::cos(a.v) * a.d};
    }
    case Op::cos: {
      const Dual a = arg(0);
      return {std::cos(a.v), -std::sin(a.v) * a.d};
    }
    case Op::tan: {
      const Dual a   = arg(0);
      const double c = std::cos(a.v);
      return {std::tan(a.v), a.d / (c * c)};
    }
    case Op::exp: {
      const Dual a   = arg(0);
      const double v = std::exp(a.v);
      return {v, v * a.d};
    }
    case Op::sqrt: {
      const Dual a   = arg(0);
      const double v = std::sqrt(a.v);
      return {v, a.d / (2 * v)};
    }
    }
    return {};
  }

  struct Parser
  {
    const std::string & s;
    std::size_t pos;

    [[noreturn]] void fail(const std::string & what) const
    {
      throw UsageError("expression '" + s + "': " + what + " at position " + std::to_string(pos));
    }

    void skip_ws()
    {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) { ++pos; }
    }

    bool accept(char c)
    {
      skip_ws();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }

    void expect(char c)
    {
      if (!accept(c)) { fail(std::string("expected '") + c + "'"); }
    }

    NodePtr expr()
    {
      auto lhs = term();
      for (;;) {
        if (accept('+')) {
          lhs = make(Op::add, {lhs, term()});
        } else if (accept('-')) {
          lhs = make(Op::sub, {lhs, term()});
        } else {
          return lhs;
        }
      }
    }

    NodePtr term()
    {
      auto lhs = unary();
      for (;;) {
        if (accept('*')) {
          lhs = make(Op::mul, {lhs, unary()});
        } else if (accept('/')) {
          lhs = make(Op::div, {lhs, unary()});
        } else {
          return lhs;
        }
      }
    }

    NodePtr unary()
    {
      if (accept('-')) { return make(Op::neg, {unary()}); }
      if (accept('+')) { return unary(); }
      return power();
    }

    // right-associative, binds tighter than unary minus on its left operand
    NodePtr power()
    {
      auto base = primary();
      if (accept('^')) { return make(Op::pow, {base, unary()}); }
      return base;
    }

    NodePtr primary()
    {
      skip_ws();
      if (pos >= s.size()) { fail("unexpected end of input"); }
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        auto inner = expr();
        expect(')');
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const char * begin = s.c_str() + pos;
        char * end         = nullptr;
        const double v     = std::strtod(begin, &end);
        if (end == begin) { fail("bad number"); }
        pos += static_cast<std::size_t>(end - begin);
        return make(Op::constant, {}, v);
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
          ++pos;
        }
        const std::string id = s.substr(start, pos - start);
        if (id == "t") { return make(Op::variable); }
        if (id == "pi") { return make(Op::constant, {}, std::numbers::pi); }
        if (id == "e") { return make(Op::constant, {}, std::numbers::e); }
        Op op{};
        if (id == "sin") {
          op = Op::sin;
        } else if (id == "cos") {
          op = Op::cos;
        } else if (id == "tan") {
          op = Op::tan;
        } else if (id == "exp") {
          op = Op::exp;
        } else if (id == "sqrt") {
          op = Op::sqrt;
        } else if (id == "pow" || id == "power") {
          expect('(');
          auto a = expr();
          expect(',');
          auto b = expr();
          expect(')');
          return make(Op::pow, {a, b});
        } else {
          pos = start;
          fail("unknown identifier '" + id + "'");
        }
        expect('(');
        auto a = expr();
        expect(')');
        return make(op, {a});
      }
      fail(std::string("unexpected character '") + c + "'");
    }
  };

  NodePtr root_;
  std::string source_;
};

}  // namespace osctrack

#endif  // OSCTRACK__EXPRESSION_HPP_
