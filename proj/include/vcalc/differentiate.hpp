#pragma once

/// @file differentiate.hpp
/// @brief Symbolic differentiation. ν (and any variable other than `wrt`)
/// is a constant symbol; piecewise trees are differentiated branchwise with
/// their guards kept.

#include "expr.hpp"
#include "simplify.hpp"

namespace vcalc {

namespace detail {

inline bool is_zero(const Expr& e) { return is_number(e, 0.0); }
inline bool is_one(const Expr& e) { return is_number(e, 1.0); }

// Light local folding so raw derivatives stay readable before simplify().
inline Expr d_add(const Expr& a, const Expr& b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  return a + b;
}
inline Expr d_sub(const Expr& a, const Expr& b) {
  if (is_zero(b)) return a;
  if (is_zero(a)) return -b;
  return a - b;
}
inline Expr d_mul(const Expr& a, const Expr& b) {
  if (is_zero(a) || is_zero(b)) return lit(0);
  if (is_one(a)) return b;
  if (is_one(b)) return a;
  return a * b;
}

}  // namespace detail

inline Expr differentiate(const Expr& e, Var wrt) {
  using namespace detail;
  if (!depends_on(e, wrt)) return lit(0);
  return std::visit(
      [&](const auto& x) -> Expr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Variable>) {
          return lit(x.var == wrt ? 1 : 0);
        } else if constexpr (std::is_same_v<T, Unary>) {
          Expr u = wrap(x.arg);
          Expr du = differentiate(u, wrt);
          switch (x.op) {
            case UnaryOp::Neg: return is_zero(du) ? du : -du;
            case UnaryOp::Abs: return d_mul(u / unary(UnaryOp::Abs, u), du);
            case UnaryOp::Sqrt: return du / (lit(2) * unary(UnaryOp::Sqrt, u));
            case UnaryOp::Exp: return d_mul(e, du);
            case UnaryOp::Ln: return du / u;
            case UnaryOp::Sin: return d_mul(unary(UnaryOp::Cos, u), du);
            case UnaryOp::Cos: return -d_mul(unary(UnaryOp::Sin, u), du);
            case UnaryOp::Tan: return du / pow(unary(UnaryOp::Cos, u), lit(2));
            case UnaryOp::Arctan: return du / (lit(1) + pow(u, lit(2)));
          }
          return lit(0);
        } else if constexpr (std::is_same_v<T, Binary>) {
          Expr a = wrap(x.lhs), b = wrap(x.rhs);
          const bool fa = !depends_on(a, wrt), fb = !depends_on(b, wrt);
          switch (x.op) {
            case BinaryOp::Add: return d_add(differentiate(a, wrt), differentiate(b, wrt));
            case BinaryOp::Sub: return d_sub(differentiate(a, wrt), differentiate(b, wrt));
            case BinaryOp::Mul:
              if (fa) return d_mul(a, differentiate(b, wrt));
              if (fb) return d_mul(differentiate(a, wrt), b);
              return d_add(d_mul(differentiate(a, wrt), b), d_mul(a, differentiate(b, wrt)));
            case BinaryOp::Div:
              if (fb) return differentiate(a, wrt) / b;
              if (fa) return -(d_mul(a, differentiate(b, wrt)) / pow(b, lit(2)));
              return d_sub(d_mul(differentiate(a, wrt), b), d_mul(a, differentiate(b, wrt))) /
                     pow(b, lit(2));
            case BinaryOp::Pow: {
              if (fb) {
                Expr lowered = as_number(b) ? lit(*as_number(b) - 1) : b - lit(1);
                return d_mul(d_mul(b, pow(a, lowered)), differentiate(a, wrt));
              }
              if (fa) {
                Expr ln_a = a.is<ConstantNode>() && a.as<ConstantNode>()->c == Constant::E
                                ? lit(1)
                                : unary(UnaryOp::Ln, a);
                return d_mul(d_mul(e, ln_a), differentiate(b, wrt));
              }
              return d_mul(e, d_add(d_mul(differentiate(b, wrt), unary(UnaryOp::Ln, a)),
                                    d_mul(b, differentiate(a, wrt) / a)));
            }
          }
          return lit(0);
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          Piecewise p;
          for (const auto& br : x.branches)
            p.branches.push_back(Branch{br.guard, differentiate(wrap(br.value), wrt).ptr()});
          if (x.fallback) p.fallback = differentiate(wrap(x.fallback), wrt).ptr();
          return Expr(std::move(p));
        } else {
          return lit(0);
        }
      },
      e.node().v);
}

}  // namespace vcalc
