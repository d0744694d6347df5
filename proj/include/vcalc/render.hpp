#pragma once

/// @file render.hpp
/// @brief Deterministic text rendering; the output reparses to the same tree.

#include <array>
#include <charconv>
#include <string>

#include "expr.hpp"

namespace vcalc {

namespace detail {

enum Prec : int { kAdd = 1, kMul = 2, kNeg = 3, kPow = 4, kAtom = 5 };

inline bool is_delta(const Node& n) {
  auto b = std::get_if<Binary>(&n.v);
  if (!b || b->op != BinaryOp::Div) return false;
  auto l = std::get_if<Literal>(&b->lhs->v);
  auto r = std::get_if<Variable>(&b->rhs->v);
  return l && l->value == 1.0 && r && r->var == Var::Index;
}

inline int precedence(const Node& n) {
  if (is_delta(n)) return kAtom;
  if (auto u = std::get_if<Unary>(&n.v)) return u->op == UnaryOp::Neg ? kNeg : kAtom;
  if (auto b = std::get_if<Binary>(&n.v)) {
    switch (b->op) {
      case BinaryOp::Add:
      case BinaryOp::Sub: return kAdd;
      case BinaryOp::Mul:
      case BinaryOp::Div: return kMul;
      case BinaryOp::Pow: return kPow;
    }
  }
  return kAtom;
}

inline std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

inline const char* func_name(UnaryOp op) {
  switch (op) {
    case UnaryOp::Sqrt: return "sqrt";
    case UnaryOp::Exp: return "exp";
    case UnaryOp::Ln: return "ln";
    case UnaryOp::Sin: return "sin";
    case UnaryOp::Cos: return "cos";
    case UnaryOp::Tan: return "tan";
    case UnaryOp::Arctan: return "arctan";
    default: return "";
  }
}

inline const char* rel_text(Rel r) {
  switch (r) {
    case Rel::Lt: return "<";
    case Rel::Le: return "≤";
    case Rel::Eq: return "=";
    case Rel::Ge: return "≥";
    case Rel::Gt: return ">";
  }
  return "?";
}

inline void render_into(const Node& n, std::string& out);

inline void render_child(const Node& n, bool parens, std::string& out) {
  if (parens) out += '(';
  render_into(n, out);
  if (parens) out += ')';
}

inline void render_into(const Node& n, std::string& out) {
  if (is_delta(n)) {
    out += "∂";
    return;
  }
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          out += format_number(x.value);
        } else if constexpr (std::is_same_v<T, ConstantNode>) {
          out += x.c == Constant::Pi ? "π" : "e";
        } else if constexpr (std::is_same_v<T, Variable>) {
          out += x.var == Var::Index ? "∞" : x.var == Var::Arg ? "ξ" : "k";
        } else if constexpr (std::is_same_v<T, Cycle>) {
          out += "cycle(";
          for (std::size_t i = 0; i < x.values.size(); ++i) {
            if (i) out += ", ";
            out += format_number(x.values[i]);
          }
          out += ')';
        } else if constexpr (std::is_same_v<T, Unary>) {
          if (x.op == UnaryOp::Neg) {
            out += '-';
            render_child(*x.arg, precedence(*x.arg) <= kNeg, out);
          } else if (x.op == UnaryOp::Abs) {
            out += '|';
            render_into(*x.arg, out);
            out += '|';
          } else {
            out += func_name(x.op);
            render_child(*x.arg, true, out);
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int p = precedence(n);
          const int pl = precedence(*x.lhs), pr = precedence(*x.rhs);
          if (x.op == BinaryOp::Pow) {
            render_child(*x.lhs, pl <= kPow, out);
            out += '^';
            render_child(*x.rhs, pr < kPow, out);
            return;
          }
          render_child(*x.lhs, pl < p, out);
          switch (x.op) {
            case BinaryOp::Add: out += " + "; break;
            case BinaryOp::Sub: out += " - "; break;
            case BinaryOp::Mul: out += " * "; break;
            default: out += " / "; break;
          }
          render_child(*x.rhs, pr <= p || pr == kNeg, out);
        } else {
          out += "piecewise(";
          bool first = true;
          for (const auto& br : x.branches) {
            if (!first) out += "; ";
            first = false;
            render_into(*br.guard.lhs, out);
            out += ' ';
            out += rel_text(br.guard.rel);
            out += ' ';
            render_into(*br.guard.rhs, out);
            out += " : ";
            render_into(*br.value, out);
          }
          if (x.fallback) {
            if (!first) out += "; ";
            out += "default : ";
            render_into(*x.fallback, out);
          }
          out += ')';
        }
      },
      n.v);
}

}  // namespace detail

inline std::string render(const Expr& e) {
  std::string out;
  detail::render_into(e.node(), out);
  return out;
}

}  // namespace vcalc
