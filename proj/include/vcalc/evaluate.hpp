#pragma once

/**
 * @file evaluate.hpp
 * @brief Per-index numeric evaluation of expressions.
 *
 * Domain violations (division by zero, ln of a non-positive number, sqrt of
 * a negative, a non-real power, a piecewise with no matching branch) yield
 * Value::undefined(). Range loss is flagged, never silently rounded to an
 * infinity or a zero.
 */

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "expr.hpp"
#include "value.hpp"

namespace vcalc {

/// Thrown when an expression needs a variable the caller did not bind.
class MissingBinding : public std::invalid_argument {
public:
  explicit MissingBinding(Var v)
      : std::invalid_argument(std::string("missing binding for ") + name(v)), var_(v) {}
  Var var() const { return var_; }

  static const char* name(Var v) {
    switch (v) {
      case Var::Index: return "ν";
      case Var::Arg: return "ξ";
      case Var::Pos: return "k";
    }
    return "?";
  }

private:
  Var var_;
};

struct Bindings {
  std::optional<double> index;
  std::optional<double> arg;
  std::optional<double> pos;

  static Bindings at(Index n) { return {static_cast<double>(n), std::nullopt, std::nullopt}; }
  static Bindings at(Index n, double x) { return {static_cast<double>(n), x, std::nullopt}; }

  std::optional<double> get(Var v) const {
    switch (v) {
      case Var::Index: return index;
      case Var::Arg: return arg;
      case Var::Pos: return pos;
    }
    return std::nullopt;
  }
};

namespace detail {

/// Combines results after computing `r` from operands. Flagged operands make
/// the result flagged unless `r` came out an ordinary nonzero number.
inline Value settle(double r, bool flagged, bool nonzero_expected) {
  if (!flagged) return Value::from_raw(r, nonzero_expected);
  if (std::isnan(r)) return Value::indeterminate();
  if (std::isinf(r)) return Value::huge(r);
  if (r == 0.0 || std::fpclassify(r) == FP_SUBNORMAL) return Value::tiny(r);
  return Value::finite(r);
}

inline double real_pow(double a, double b, bool& ok) {
  ok = true;
  if (a < 0 && !is_integer(b)) {
    ok = false;
    return 0;
  }
  if (a == 0 && b < 0) {
    ok = false;
    return 0;
  }
  return std::pow(a, b);
}

inline std::optional<bool> compare(double a, Rel rel, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::nullopt;
  switch (rel) {
    case Rel::Lt: return a < b;
    case Rel::Le: return a <= b;
    case Rel::Eq: return a == b;
    case Rel::Ge: return a >= b;
    case Rel::Gt: return a > b;
  }
  return std::nullopt;
}

inline Value eval_node(const Node& n, const Bindings& b);

inline Value eval_ptr(const NodePtr& p, const Bindings& b) { return eval_node(*p, b); }

inline Value eval_unary(UnaryOp op, const Value& a) {
  if (!a.is_defined()) return a;
  if (a.kind() == Value::Kind::Indeterminate) return a;
  const bool flagged = a.is_flagged();
  const double x = a.raw();
  switch (op) {
    case UnaryOp::Neg:
      if (a.kind() == Value::Kind::Tiny) return Value::tiny(-x);
      if (a.kind() == Value::Kind::Huge) return Value::huge(-x);
      return Value::finite(-x);
    case UnaryOp::Abs:
      if (a.kind() == Value::Kind::Tiny) return Value::tiny(1);
      if (a.kind() == Value::Kind::Huge) return Value::huge(1);
      return Value::finite(std::fabs(x));
    case UnaryOp::Sqrt:
      if (x < 0) return Value::undefined();
      return settle(std::sqrt(x), flagged, x != 0);
    case UnaryOp::Exp: return settle(std::exp(x), flagged, true);
    case UnaryOp::Ln:
      if (!flagged && x <= 0) return Value::undefined();
      if (flagged && x < 0) return Value::undefined();
      return settle(std::log(x), flagged, false);
    case UnaryOp::Sin:
      if (a.kind() == Value::Kind::Huge) return Value::indeterminate();
      return settle(std::sin(x), flagged, false);
    case UnaryOp::Cos:
      if (a.kind() == Value::Kind::Huge) return Value::indeterminate();
      return settle(std::cos(x), flagged, false);
    case UnaryOp::Tan: {
      if (a.kind() == Value::Kind::Huge) return Value::indeterminate();
      if (std::cos(x) == 0.0) return Value::undefined();
      return settle(std::tan(x), flagged, false);
    }
    case UnaryOp::Arctan: return settle(std::atan(x), flagged, false);
  }
  return Value::undefined();
}

inline Value eval_binary(BinaryOp op, const Value& a, const Value& b) {
  if (!a.is_defined()) return a;
  if (!b.is_defined()) return b;
  if (a.kind() == Value::Kind::Indeterminate || b.kind() == Value::Kind::Indeterminate)
    return Value::indeterminate();
  const bool flagged = a.is_flagged() || b.is_flagged();
  const double x = a.raw(), y = b.raw();
  switch (op) {
    case BinaryOp::Add: return settle(x + y, flagged, false);
    case BinaryOp::Sub: return settle(x - y, flagged, false);
    case BinaryOp::Mul: return settle(x * y, flagged, x != 0 && y != 0);
    case BinaryOp::Div:
      if (b.is_finite() && y == 0) return Value::undefined();
      return settle(x / y, flagged, x != 0);
    case BinaryOp::Pow: {
      if (flagged) {
        if (a.kind() == Value::Kind::Tiny && b.is_finite()) {
          if (y < 0) return Value::huge(1);
          if (y == 0) return Value::finite(1);
          return Value::tiny(1);
        }
        if (a.kind() == Value::Kind::Huge && std::signbit(x) && !is_integer(y)) return Value::undefined();
      }
      bool ok = true;
      double r = real_pow(x, y, ok);
      if (!ok && !flagged) return Value::undefined();
      if (!ok) return Value::indeterminate();
      return settle(r, flagged, x != 0);
    }
  }
  return Value::undefined();
}

inline Value eval_node(const Node& n, const Bindings& b) {
  return std::visit(
      [&](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return Value::finite(x.value);
        } else if constexpr (std::is_same_v<T, ConstantNode>) {
          return Value::finite(x.c == Constant::Pi ? std::numbers::pi : std::numbers::e);
        } else if constexpr (std::is_same_v<T, Variable>) {
          auto v = b.get(x.var);
          if (!v) throw MissingBinding(x.var);
          return Value::finite(*v);
        } else if constexpr (std::is_same_v<T, Cycle>) {
          if (x.values.size() == 1) return Value::finite(x.values.front());
          if (!b.index) throw MissingBinding(Var::Index);
          const double n = *b.index;
          if (n < 1 || !is_integer(n)) return Value::undefined();
          auto i = static_cast<std::size_t>(std::fmod(n - 1, static_cast<double>(x.values.size())));
          return Value::finite(x.values[i]);
        } else if constexpr (std::is_same_v<T, Unary>) {
          return eval_unary(x.op, eval_ptr(x.arg, b));
        } else if constexpr (std::is_same_v<T, Binary>) {
          return eval_binary(x.op, eval_ptr(x.lhs, b), eval_ptr(x.rhs, b));
        } else {
          for (const auto& br : x.branches) {
            Value l = eval_ptr(br.guard.lhs, b);
            Value r = eval_ptr(br.guard.rhs, b);
            if (!l.is_defined() || !r.is_defined()) return Value::undefined();
            auto holds = compare(l.raw(), br.guard.rel, r.raw());
            if (!holds) return Value::indeterminate();
            if ((l.is_flagged() || r.is_flagged()) && l.raw() == r.raw()) return Value::indeterminate();
            if (*holds) return eval_ptr(br.value, b);
          }
          if (x.fallback) return eval_ptr(x.fallback, b);
          return Value::undefined();
        }
      },
      n.v);
}

}  // namespace detail

/// Evaluates `e` under `b`. Throws MissingBinding when a variable that
/// occurs in `e` is unbound; returns an undefined Value on domain errors.
inline Value evaluate_at(const Expr& e, const Bindings& b) { return detail::eval_node(e.node(), b); }

}  // namespace vcalc
