#pragma once

/// @file breakpoints.hpp
/// @brief Candidate non-smooth points of a family, as expressions in ν.
///
/// The result is a superset: guard boundaries are always reported when the
/// guard is solvable (linear in ξ, or |linear| against a ξ-free side);
/// anything we cannot solve goes into `unresolved` instead of being dropped.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "differentiate.hpp"
#include "evaluate.hpp"
#include "expr.hpp"
#include "render.hpp"
#include "simplify.hpp"

namespace vcalc {

/// e = slope·wrt + offset with slope and offset free of wrt.
struct Linear {
  Expr slope;
  Expr offset;
};

inline std::optional<Linear> linear_in(const Expr& e, Var wrt) {
  if (!depends_on(e, wrt)) return Linear{lit(0), e};
  if (e.is<Variable>()) return Linear{lit(1), lit(0)};
  if (auto u = e.as<Unary>(); u && u->op == UnaryOp::Neg) {
    auto in = linear_in(wrap(u->arg), wrt);
    if (!in) return std::nullopt;
    return Linear{simplify(-in->slope), simplify(-in->offset)};
  }
  auto b = e.as<Binary>();
  if (!b) return std::nullopt;
  Expr l = wrap(b->lhs), r = wrap(b->rhs);
  switch (b->op) {
    case BinaryOp::Add:
    case BinaryOp::Sub: {
      auto x = linear_in(l, wrt), y = linear_in(r, wrt);
      if (!x || !y) return std::nullopt;
      if (b->op == BinaryOp::Add)
        return Linear{simplify(x->slope + y->slope), simplify(x->offset + y->offset)};
      return Linear{simplify(x->slope - y->slope), simplify(x->offset - y->offset)};
    }
    case BinaryOp::Mul: {
      if (!depends_on(l, wrt)) {
        auto y = linear_in(r, wrt);
        if (!y) return std::nullopt;
        return Linear{simplify(l * y->slope), simplify(l * y->offset)};
      }
      if (!depends_on(r, wrt)) {
        auto x = linear_in(l, wrt);
        if (!x) return std::nullopt;
        return Linear{simplify(x->slope * r), simplify(x->offset * r)};
      }
      return std::nullopt;
    }
    case BinaryOp::Div: {
      if (depends_on(r, wrt)) return std::nullopt;
      auto x = linear_in(l, wrt);
      if (!x) return std::nullopt;
      return Linear{simplify(x->slope / r), simplify(x->offset / r)};
    }
    case BinaryOp::Pow: {
      auto p = as_number(r);
      if (p && *p == 1.0) return linear_in(l, wrt);
      return std::nullopt;
    }
  }
  return std::nullopt;
}

struct Breakpoint {
  enum class Kind { Guard, Pole, Branch, Kink };
  Expr at;
  Kind kind;
};

inline const char* to_string(Breakpoint::Kind k) {
  switch (k) {
    case Breakpoint::Kind::Guard: return "guard";
    case Breakpoint::Kind::Pole: return "pole";
    case Breakpoint::Kind::Branch: return "branch";
    case Breakpoint::Kind::Kink: return "kink";
  }
  return "?";
}

struct BreakpointSet {
  std::vector<Breakpoint> points;
  std::vector<std::string> unresolved;  // human-readable descriptions

  bool complete() const { return unresolved.empty(); }

  std::vector<Expr> exprs() const {
    std::vector<Expr> out;
    for (const auto& p : points) out.push_back(p.at);
    return out;
  }

  /// Defined numeric positions at index n, sorted and deduplicated.
  std::vector<double> values_at(Index n, std::optional<Breakpoint::Kind> only = std::nullopt) const {
    std::vector<double> out;
    for (const auto& p : points) {
      if (only && p.kind != *only) continue;
      Value v = evaluate_at(p.at, Bindings::at(n));
      if (v.is_finite()) out.push_back(v.raw());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
};

namespace detail {

class BreakpointCollector {
public:
  explicit BreakpointCollector(Var wrt) : wrt_(wrt) {}

  void walk(const Expr& e) {
    if (!depends_on(e, wrt_)) return;
    std::visit([&](const auto& x) { visit(e, x); }, e.node().v);
  }

  BreakpointSet take() { return std::move(set_); }

private:
  void add(const Expr& at, Breakpoint::Kind kind) {
    Expr s = simplify(at);
    for (const auto& p : set_.points)
      if (p.at == s) return;
    set_.points.push_back({s, kind});
  }

  void unresolved(std::string what, const Expr& e) {
    std::string s = what + ": " + render(e);
    if (std::find(set_.unresolved.begin(), set_.unresolved.end(), s) == set_.unresolved.end())
      set_.unresolved.push_back(std::move(s));
  }

  // Points where e vanishes, as far as we can solve.
  void zeros(const Expr& e, Breakpoint::Kind kind) {
    if (!depends_on(e, wrt_) || nonzero(e)) return;
    if (auto lin = linear_in(e, wrt_)) {
      if (nonzero(lin->slope)) add(-lin->offset / lin->slope, kind);
      else unresolved("degenerate linear zero", e);
      return;
    }
    if (auto u = e.as<Unary>()) {
      switch (u->op) {
        case UnaryOp::Neg:
        case UnaryOp::Abs:
        case UnaryOp::Sqrt: zeros(wrap(u->arg), kind); return;
        case UnaryOp::Exp: return;
        default: break;
      }
    }
    if (auto b = e.as<Binary>()) {
      if (b->op == BinaryOp::Mul) {
        zeros(wrap(b->lhs), kind);
        zeros(wrap(b->rhs), kind);
        return;
      }
      if (b->op == BinaryOp::Div) {
        zeros(wrap(b->lhs), kind);
        return;
      }
      if (b->op == BinaryOp::Pow && !depends_on(wrap(b->rhs), wrt_)) {
        zeros(wrap(b->lhs), kind);
        return;
      }
    }
    unresolved("zero set", e);
  }

  void guard(const Guard& g) {
    Expr l = wrap(g.lhs), r = wrap(g.rhs);
    // |u| rel R with R free of wrt: boundaries u = ±R.
    auto abs_side = [&](const Expr& a, const Expr& other) -> bool {
      auto u = a.as<Unary>();
      if (!u || u->op != UnaryOp::Abs || depends_on(other, wrt_)) return false;
      auto lin = linear_in(wrap(u->arg), wrt_);
      if (!lin || !nonzero(lin->slope)) return false;
      add((-other - lin->offset) / lin->slope, Breakpoint::Kind::Guard);
      add((other - lin->offset) / lin->slope, Breakpoint::Kind::Guard);
      return true;
    };
    if (abs_side(l, r) || abs_side(r, l)) return;
    Expr d = l - r;
    if (auto lin = linear_in(d, wrt_); lin && nonzero(lin->slope)) {
      add(-lin->offset / lin->slope, Breakpoint::Kind::Guard);
      return;
    }
    unresolved("guard", d);
  }

  void visit(const Expr&, const Variable&) {}
  void visit(const Expr&, const Literal&) {}
  void visit(const Expr&, const ConstantNode&) {}
  void visit(const Expr&, const Cycle&) {}

  void visit(const Expr& e, const Unary& u) {
    Expr a = wrap(u.arg);
    walk(a);
    switch (u.op) {
      case UnaryOp::Abs: zeros(a, Breakpoint::Kind::Kink); break;
      case UnaryOp::Sqrt:
      case UnaryOp::Ln: zeros(a, Breakpoint::Kind::Branch); break;
      case UnaryOp::Tan: unresolved("tan poles", e); break;
      default: break;
    }
  }

  void visit(const Expr&, const Binary& b) {
    Expr l = wrap(b.lhs), r = wrap(b.rhs);
    walk(l);
    walk(r);
    if (b.op == BinaryOp::Div) zeros(r, Breakpoint::Kind::Pole);
    if (b.op == BinaryOp::Pow && depends_on(l, wrt_)) {
      auto p = as_number(r);
      if (p && is_integer(*p) && *p >= 0) return;
      if (p && *p > 0) zeros(l, Breakpoint::Kind::Branch);
      else zeros(l, Breakpoint::Kind::Pole);
    }
  }

  void visit(const Expr&, const Piecewise& p) {
    for (const auto& br : p.branches) {
      guard(br.guard);
      walk(wrap(br.guard.lhs));
      walk(wrap(br.guard.rhs));
      walk(wrap(br.value));
    }
    if (p.fallback) walk(wrap(p.fallback));
  }

  Var wrt_;
  BreakpointSet set_;
};

}  // namespace detail

inline BreakpointSet breakpoints(const Expr& e, Var wrt = Var::Arg) {
  detail::BreakpointCollector c(wrt);
  c.walk(e);
  return c.take();
}

}  // namespace vcalc
