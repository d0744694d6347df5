#pragma once

/**
 * @file expr.hpp
 * @brief Immutable expression trees over the index ν, the argument ξ and the
 * sequence position k.
 *
 * Nodes are shared and never mutated, so copies are cheap and an Expr can be
 * handed to any number of threads. `∞` is the index variable itself and `∂`
 * is the quotient 1/∞; both are spelled out structurally rather than given
 * dedicated node kinds.
 */

#include <cmath>
#include <compare>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace vcalc {

enum class Var { Index, Arg, Pos };
enum class Constant { Pi, E };
enum class UnaryOp { Neg, Abs, Sqrt, Exp, Ln, Sin, Cos, Tan, Arctan };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Rel { Lt, Le, Eq, Ge, Gt };

class Expr;

struct Literal {
  double value;
};
struct ConstantNode {
  Constant c;
};
struct Variable {
  Var var;
};
/// Index-periodic literal: value list[(ν - 1) mod size]. Lets periodic
/// virtual numbers such as ±2 live inside expressions.
struct Cycle {
  std::vector<double> values;
};
struct Unary {
  UnaryOp op;
  std::shared_ptr<const struct Node> arg;
};
struct Binary {
  BinaryOp op;
  std::shared_ptr<const struct Node> lhs;
  std::shared_ptr<const struct Node> rhs;
};
struct Guard {
  std::shared_ptr<const struct Node> lhs;
  Rel rel;
  std::shared_ptr<const struct Node> rhs;
};
struct Branch {
  Guard guard;
  std::shared_ptr<const struct Node> value;
};
struct Piecewise {
  std::vector<Branch> branches;
  std::shared_ptr<const struct Node> fallback;  // may be null
};

struct Node {
  std::variant<Literal, ConstantNode, Variable, Cycle, Unary, Binary, Piecewise> v;
};

using NodePtr = std::shared_ptr<const Node>;

class Expr {
public:
  Expr() : Expr(Literal{0.0}) {}
  explicit Expr(NodePtr n) : node_(std::move(n)) {
    if (!node_) throw std::invalid_argument("null expression node");
  }
  template <class Alt>
    requires std::is_constructible_v<decltype(Node::v), Alt>
  explicit Expr(Alt alt) : node_(std::make_shared<const Node>(Node{std::move(alt)})) {}

  const Node& node() const { return *node_; }
  const NodePtr& ptr() const { return node_; }

  template <class T>
  const T* as() const {
    return std::get_if<T>(&node_->v);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(node_->v);
  }

private:
  NodePtr node_;
};

// ---------------------------------------------------------------------------
// Builders

inline Expr wrap(const NodePtr& p) { return Expr(p); }

/// Literal nodes are kept nonnegative; negative values become Neg(literal).
inline Expr lit(double v) {
  if (std::signbit(v) && v != 0.0) {
    Expr inner(Literal{-v});
    return Expr(Unary{UnaryOp::Neg, inner.ptr()});
  }
  return Expr(Literal{v == 0.0 ? 0.0 : v});
}
inline Expr constant(Constant c) { return Expr(ConstantNode{c}); }
inline Expr var(Var v) { return Expr(Variable{v}); }
inline Expr index_var() { return var(Var::Index); }
inline Expr arg_var() { return var(Var::Arg); }
inline Expr pos_var() { return var(Var::Pos); }
inline Expr cycle(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("cycle needs at least one value");
  return Expr(Cycle{std::move(values)});
}
inline Expr unary(UnaryOp op, const Expr& a) { return Expr(Unary{op, a.ptr()}); }
inline Expr binary(BinaryOp op, const Expr& a, const Expr& b) {
  return Expr(Binary{op, a.ptr(), b.ptr()});
}
inline Expr operator+(const Expr& a, const Expr& b) { return binary(BinaryOp::Add, a, b); }
inline Expr operator-(const Expr& a, const Expr& b) { return binary(BinaryOp::Sub, a, b); }
inline Expr operator*(const Expr& a, const Expr& b) { return binary(BinaryOp::Mul, a, b); }
inline Expr operator/(const Expr& a, const Expr& b) { return binary(BinaryOp::Div, a, b); }
inline Expr operator-(const Expr& a) { return unary(UnaryOp::Neg, a); }
inline Expr pow(const Expr& a, const Expr& b) { return binary(BinaryOp::Pow, a, b); }
inline Expr infinity_expr() { return index_var(); }
inline Expr delta_expr() { return lit(1.0) / index_var(); }

struct GuardSpec {
  Expr lhs;
  Rel rel;
  Expr rhs;
};
struct BranchSpec {
  GuardSpec guard;
  Expr value;
};
inline Expr piecewise(const std::vector<BranchSpec>& branches, std::optional<Expr> fallback) {
  Piecewise p;
  for (const auto& b : branches)
    p.branches.push_back(
        Branch{Guard{b.guard.lhs.ptr(), b.guard.rel, b.guard.rhs.ptr()}, b.value.ptr()});
  if (fallback) p.fallback = fallback->ptr();
  return Expr(std::move(p));
}

// ---------------------------------------------------------------------------
// Structural comparison

namespace detail {

inline int kind_rank(const Node& n) {
  // Orders canonical sums/products: numbers first, then constants, ν, ξ, k,
  // then compound nodes.
  return static_cast<int>(n.v.index());
}

inline std::strong_ordering cmp_double(double a, double b) {
  if (a < b) return std::strong_ordering::less;
  if (a > b) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

inline std::strong_ordering compare_nodes(const Node& a, const Node& b);

inline std::strong_ordering compare_ptr(const NodePtr& a, const NodePtr& b) {
  if (a == b) return std::strong_ordering::equal;
  if (!a || !b) return (a ? 1 : 0) <=> (b ? 1 : 0);
  return compare_nodes(*a, *b);
}

inline std::strong_ordering compare_nodes(const Node& a, const Node& b) {
  if (auto c = kind_rank(a) <=> kind_rank(b); c != 0) return c;
  return std::visit(
      [&](const auto& x) -> std::strong_ordering {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.v);
        if constexpr (std::is_same_v<T, Literal>) {
          return cmp_double(x.value, y.value);
        } else if constexpr (std::is_same_v<T, ConstantNode>) {
          return x.c <=> y.c;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.var <=> y.var;
        } else if constexpr (std::is_same_v<T, Cycle>) {
          if (auto c = x.values.size() <=> y.values.size(); c != 0) return c;
          for (std::size_t i = 0; i < x.values.size(); ++i)
            if (auto c = cmp_double(x.values[i], y.values[i]); c != 0) return c;
          return std::strong_ordering::equal;
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (auto c = x.op <=> y.op; c != 0) return c;
          return compare_ptr(x.arg, y.arg);
        } else if constexpr (std::is_same_v<T, Binary>) {
          if (auto c = x.op <=> y.op; c != 0) return c;
          if (auto c = compare_ptr(x.lhs, y.lhs); c != 0) return c;
          return compare_ptr(x.rhs, y.rhs);
        } else {
          if (auto c = x.branches.size() <=> y.branches.size(); c != 0) return c;
          for (std::size_t i = 0; i < x.branches.size(); ++i) {
            const auto& p = x.branches[i];
            const auto& q = y.branches[i];
            if (auto c = compare_ptr(p.guard.lhs, q.guard.lhs); c != 0) return c;
            if (auto c = p.guard.rel <=> q.guard.rel; c != 0) return c;
            if (auto c = compare_ptr(p.guard.rhs, q.guard.rhs); c != 0) return c;
            if (auto c = compare_ptr(p.value, q.value); c != 0) return c;
          }
          return compare_ptr(x.fallback, y.fallback);
        }
      },
      a.v);
}

}  // namespace detail

/// Total structural order; equality means structurally identical trees.
inline std::strong_ordering operator<=>(const Expr& a, const Expr& b) {
  return detail::compare_ptr(a.ptr(), b.ptr());
}
inline bool operator==(const Expr& a, const Expr& b) { return (a <=> b) == 0; }

// ---------------------------------------------------------------------------
// Queries and rewrites

inline bool depends_on(const Expr& e, Var v) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Variable>) {
          return x.var == v;
        } else if constexpr (std::is_same_v<T, Cycle>) {
          return v == Var::Index && x.values.size() > 1;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return depends_on(wrap(x.arg), v);
        } else if constexpr (std::is_same_v<T, Binary>) {
          return depends_on(wrap(x.lhs), v) || depends_on(wrap(x.rhs), v);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          for (const auto& b : x.branches)
            if (depends_on(wrap(b.guard.lhs), v) || depends_on(wrap(b.guard.rhs), v) ||
                depends_on(wrap(b.value), v))
              return true;
          return x.fallback && depends_on(wrap(x.fallback), v);
        } else {
          return false;
        }
      },
      e.node().v);
}

inline bool contains_piecewise(const Expr& e) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Unary>) {
          return contains_piecewise(wrap(x.arg));
        } else if constexpr (std::is_same_v<T, Binary>) {
          return contains_piecewise(wrap(x.lhs)) || contains_piecewise(wrap(x.rhs));
        } else {
          return std::is_same_v<T, Piecewise>;
        }
      },
      e.node().v);
}

/// Replaces every occurrence of `v` by `replacement`.
inline Expr substitute(const Expr& e, Var v, const Expr& replacement) {
  return std::visit(
      [&](const auto& x) -> Expr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Variable>) {
          return x.var == v ? replacement : e;
        } else if constexpr (std::is_same_v<T, Unary>) {
          Expr a = substitute(wrap(x.arg), v, replacement);
          return a.ptr() == x.arg ? e : unary(x.op, a);
        } else if constexpr (std::is_same_v<T, Binary>) {
          Expr a = substitute(wrap(x.lhs), v, replacement);
          Expr b = substitute(wrap(x.rhs), v, replacement);
          if (a.ptr() == x.lhs && b.ptr() == x.rhs) return e;
          return binary(x.op, a, b);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          Piecewise p;
          for (const auto& b : x.branches)
            p.branches.push_back(Branch{
                Guard{substitute(wrap(b.guard.lhs), v, replacement).ptr(), b.guard.rel,
                      substitute(wrap(b.guard.rhs), v, replacement).ptr()},
                substitute(wrap(b.value), v, replacement).ptr()});
          if (x.fallback) p.fallback = substitute(wrap(x.fallback), v, replacement).ptr();
          return Expr(std::move(p));
        } else {
          return e;
        }
      },
      e.node().v);
}

/// Signed numeric value of a literal or negated literal.
inline std::optional<double> as_number(const Expr& e) {
  if (auto l = e.as<Literal>()) return l->value;
  if (auto u = e.as<Unary>(); u && u->op == UnaryOp::Neg)
    if (auto l = std::get_if<Literal>(&u->arg->v)) return -l->value;
  return std::nullopt;
}

inline bool is_number(const Expr& e, double v) {
  auto n = as_number(e);
  return n && *n == v;
}

inline bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

// ---------------------------------------------------------------------------
// Conservative sign and definedness analysis. ν and k are naturals >= 1.

enum class Sign { Positive, NonNegative, Nonzero, Unknown };

inline Sign sign_of(const Expr& e);

inline bool positive(const Expr& e) { return sign_of(e) == Sign::Positive; }
inline bool nonnegative(const Expr& e) {
  auto s = sign_of(e);
  return s == Sign::Positive || s == Sign::NonNegative;
}
inline bool nonzero(const Expr& e) {
  auto s = sign_of(e);
  return s == Sign::Positive || s == Sign::Nonzero;
}

inline Sign sign_of(const Expr& e) {
  return std::visit(
      [&](const auto& x) -> Sign {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return x.value > 0 ? Sign::Positive : Sign::NonNegative;
        } else if constexpr (std::is_same_v<T, ConstantNode>) {
          return Sign::Positive;
        } else if constexpr (std::is_same_v<T, Variable>) {
          return x.var == Var::Arg ? Sign::Unknown : Sign::Positive;
        } else if constexpr (std::is_same_v<T, Cycle>) {
          bool pos = true, nz = true, nn = true;
          for (double v : x.values) {
            pos = pos && v > 0;
            nz = nz && v != 0;
            nn = nn && v >= 0;
          }
          return pos ? Sign::Positive : nz ? Sign::Nonzero : nn ? Sign::NonNegative : Sign::Unknown;
        } else if constexpr (std::is_same_v<T, Unary>) {
          Expr a = wrap(x.arg);
          switch (x.op) {
            case UnaryOp::Neg: {
              auto s = sign_of(a);
              if (s == Sign::Positive || s == Sign::Nonzero) return Sign::Nonzero;
              if (auto n = as_number(a); n && *n == 0) return Sign::NonNegative;
              return Sign::Unknown;
            }
            case UnaryOp::Abs: return nonzero(a) ? Sign::Positive : Sign::NonNegative;
            case UnaryOp::Sqrt: return positive(a) ? Sign::Positive : Sign::NonNegative;
            case UnaryOp::Exp: return Sign::Positive;
            default: return Sign::Unknown;
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          Expr a = wrap(x.lhs), b = wrap(x.rhs);
          Sign sa = sign_of(a), sb = sign_of(b);
          switch (x.op) {
            case BinaryOp::Add:
              if ((sa == Sign::Positive && nonnegative(b)) || (sb == Sign::Positive && nonnegative(a)))
                return Sign::Positive;
              if (nonnegative(a) && nonnegative(b)) return Sign::NonNegative;
              return Sign::Unknown;
            case BinaryOp::Sub: return Sign::Unknown;
            case BinaryOp::Mul:
            case BinaryOp::Div:
              if (sa == Sign::Positive && sb == Sign::Positive) return Sign::Positive;
              if (nonzero(a) && nonzero(b)) return Sign::Nonzero;
              if (x.op == BinaryOp::Mul && nonnegative(a) && nonnegative(b)) return Sign::NonNegative;
              return Sign::Unknown;
            case BinaryOp::Pow: {
              if (sa == Sign::Positive) return Sign::Positive;
              if (auto p = as_number(b); p && is_integer(*p)) {
                if (std::fmod(*p, 2.0) == 0.0) return nonzero(a) ? Sign::Positive : Sign::NonNegative;
                if (nonzero(a)) return Sign::Nonzero;
              }
              if (sa == Sign::NonNegative) return Sign::NonNegative;
              return Sign::Unknown;
            }
          }
          return Sign::Unknown;
        } else {
          return Sign::Unknown;
        }
      },
      e.node().v);
}

/// True when `e` is defined for every admissible binding (ν, k >= 1, any ξ).
/// Conservative: false means "not proven".
inline bool is_total(const Expr& e) {
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Unary>) {
          Expr a = wrap(x.arg);
          if (!is_total(a)) return false;
          switch (x.op) {
            case UnaryOp::Sqrt: return nonnegative(a);
            case UnaryOp::Ln: return positive(a);
            case UnaryOp::Tan: return false;
            default: return true;
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          Expr a = wrap(x.lhs), b = wrap(x.rhs);
          if (!is_total(a) || !is_total(b)) return false;
          switch (x.op) {
            case BinaryOp::Div: return nonzero(b);
            case BinaryOp::Pow: {
              if (positive(a)) return true;
              auto p = as_number(b);
              return p && is_integer(*p) && (*p >= 0 || nonzero(a));
            }
            default: return true;
          }
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          if (!x.fallback || !is_total(wrap(x.fallback))) return false;
          for (const auto& br : x.branches)
            if (!is_total(wrap(br.guard.lhs)) || !is_total(wrap(br.guard.rhs)) ||
                !is_total(wrap(br.value)))
              return false;
          return true;
        } else {
          return true;
        }
      },
      e.node().v);
}

}  // namespace vcalc
