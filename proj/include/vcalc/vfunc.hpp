#pragma once

/**
 * @file vfunc.hpp
 * @brief Virtual functions: ν-indexed families of real functions.
 *
 * An expression family keeps its AST so evaluation, composition and
 * differentiation stay symbolic; rule and interleaved families are opaque and
 * every question about them is sampled.
 */

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "breakpoints.hpp"
#include "decision.hpp"
#include "differentiate.hpp"
#include "evaluate.hpp"
#include "expr.hpp"
#include "render.hpp"
#include "simplify.hpp"
#include "vnum.hpp"

namespace vcalc {

class VirtualFunction {
public:
  struct ExprFamily {
    Expr expr;
  };
  struct Empty {};
  struct RuleFamily {
    std::function<Value(Index, double)> fn;
    std::string label;
  };
  struct Interleaved {
    std::vector<VirtualFunction> slots;  // slot (n - 1) mod size serves index n
  };
  using Family = std::variant<ExprFamily, Empty, RuleFamily, Interleaved>;

  explicit VirtualFunction(Family f) : family_(std::move(f)) {}

  const Family& family() const { return family_; }
  bool is_empty() const { return std::holds_alternative<Empty>(family_); }

  std::optional<Expr> expr() const {
    if (auto e = std::get_if<ExprFamily>(&family_)) return e->expr;
    return std::nullopt;
  }

  Value at(Index n, double x) const {
    return std::visit(
        [&](const auto& f) -> Value {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, ExprFamily>) return evaluate_at(f.expr, Bindings::at(n, x));
          else if constexpr (std::is_same_v<T, Empty>) return Value::undefined();
          else if constexpr (std::is_same_v<T, RuleFamily>) return f.fn(n, x);
          else return f.slots[(n - 1) % f.slots.size()].at(n, x);
        },
        family_);
  }

  std::string to_string() const {
    return std::visit(
        [&](const auto& f) -> std::string {
          using T = std::decay_t<decltype(f)>;
          if constexpr (std::is_same_v<T, ExprFamily>) return render(f.expr);
          else if constexpr (std::is_same_v<T, Empty>) return "Ø";
          else if constexpr (std::is_same_v<T, RuleFamily>) return "rule(" + f.label + ")";
          else {
            std::string s = "⟨";
            for (std::size_t i = 0; i < f.slots.size(); ++i) s += (i ? ", " : "") + f.slots[i].to_string();
            return s + ", …⟩";
          }
        },
        family_);
  }

private:
  Family family_;
};

// ---------------------------------------------------------------------------
// Construction

inline VirtualFunction from_expr(const Expr& e) {
  if (depends_on(e, Var::Pos)) throw std::invalid_argument("a virtual function cannot depend on k");
  return VirtualFunction(VirtualFunction::ExprFamily{e});
}

/// The constant family ⟨f, f, …⟩ of a real function.
inline VirtualFunction lift_function(const Expr& e) {
  if (depends_on(e, Var::Index)) throw std::invalid_argument("a lifted real function cannot depend on ν");
  return from_expr(e);
}

inline VirtualFunction identity_function() { return from_expr(arg_var()); }
inline VirtualFunction empty_function() { return VirtualFunction(VirtualFunction::Empty{}); }

inline VirtualFunction rule_family(std::function<Value(Index, double)> fn, std::string label) {
  return VirtualFunction(VirtualFunction::RuleFamily{std::move(fn), std::move(label)});
}

inline VirtualFunction constant_function(const VirtualNumber& c) {
  if (auto e = c.expr()) return from_expr(*e);
  return rule_family([c](Index n, double) { return c.at(n); }, c.to_string());
}

/// ⟨s₁, …, s_p, s₁, …⟩. A family that is empty at infinitely many indices
/// has empty domain and is identified with Ø.
inline VirtualFunction interleave(std::vector<VirtualFunction> slots) {
  if (slots.empty()) throw std::invalid_argument("interleave needs at least one slot");
  for (const auto& s : slots)
    if (s.is_empty()) return empty_function();
  if (slots.size() == 1) return slots.front();
  return VirtualFunction(VirtualFunction::Interleaved{std::move(slots)});
}

// ---------------------------------------------------------------------------
// Symbolic helpers

namespace detail {

inline bool literal_zero_factor(const Expr& e) {
  if (is_number(e, 0.0)) return true;
  if (auto b = e.as<Binary>(); b && b->op == BinaryOp::Mul)
    return literal_zero_factor(wrap(b->lhs)) || literal_zero_factor(wrap(b->rhs));
  return false;
}

/// True when some non-piecewise subterm is undefined for every binding.
inline bool provably_undefined(const Expr& e) {
  if (auto u = e.as<Unary>()) {
    Expr a = wrap(u->arg);
    if (auto v = as_number(a)) {
      if (u->op == UnaryOp::Ln && *v <= 0) return true;
      if (u->op == UnaryOp::Sqrt && *v < 0) return true;
    }
    return provably_undefined(a);
  }
  if (auto b = e.as<Binary>()) {
    Expr l = wrap(b->lhs), r = wrap(b->rhs);
    if (b->op == BinaryOp::Div && literal_zero_factor(r)) return true;
    if (b->op == BinaryOp::Pow) {
      auto base = as_number(l), ex = as_number(r);
      if (base && ex && *base == 0 && *ex < 0) return true;
      if (base && ex && *base < 0 && !is_integer(*ex)) return true;
    }
    return provably_undefined(l) || provably_undefined(r);
  }
  return false;
}

inline Probe definedness(const Value& v) {
  if (!v.is_defined()) return {Observation::False};
  if (v.kind() == Value::Kind::Indeterminate) return {Observation::Undefined};
  return {Observation::True, v.raw()};
}

/// Numeric one-sided limit: 4 decades of h, then Aitken on the last three.
inline std::optional<double> one_sided_limit(const std::function<Value(double)>& f, double x, int side, double h0) {
  std::array<double, 4> v{};
  for (int j = 0; j < 4; ++j) {
    Value y = f(x + side * h0 * std::pow(10.0, -j));
    if (!y.is_finite()) return std::nullopt;
    v[j] = y.raw();
  }
  const double d1 = v[2] - v[1], d2 = v[3] - v[2], dd = d2 - d1;
  if (dd == 0 || !std::isfinite(dd) || std::fabs(d2) >= std::fabs(d1)) return v[3];
  return v[3] - d2 * d2 / dd;
}

inline bool agree(double a, double b, double rel) {
  return std::fabs(a - b) <= rel * std::max({1.0, std::fabs(a), std::fabs(b)});
}

/// Continuity of one real function at x, probed from both sides.
inline Probe continuous_member(const std::function<Value(double)>& f, double x, double h0, double rel = 1e-8) {
  Value fx = f(x);
  if (!fx.is_finite()) return {fx.is_defined() ? Observation::Undefined : Observation::False};
  auto l = one_sided_limit(f, x, -1, h0), r = one_sided_limit(f, x, +1, h0);
  // A side outside the domain is not a discontinuity.
  bool ok = (!l || agree(*l, fx.raw(), rel)) && (!r || agree(*r, fx.raw(), rel));
  return {ok ? Observation::True : Observation::False, fx.raw()};
}

/// Step for probing at x: small, but never reaching another breakpoint.
inline double probe_step(double x, const std::vector<double>& others) {
  double h = 1e-3 * std::max(1.0, std::fabs(x));
  for (double b : others) {
    const double d = std::fabs(b - x);
    if (d > 1e-12 * std::max(1.0, std::fabs(x))) h = std::min(h, d / 10);
  }
  return h;
}

inline bool on_point(double x, double b) { return std::fabs(x - b) <= 1e-12 * std::max(1.0, std::fabs(b)); }

inline std::optional<Index> joint_period(const Expr& e, const VirtualNumber& xi) {
  auto p = cycle_period(e.node());
  auto q = xi.period();
  if (!p || !q) return std::nullopt;
  Index l = std::lcm(*p, *q);
  if (l > 1'000'000) return std::nullopt;
  return l;
}

/// Number from a substituted expression, folded to a periodic list when it
/// no longer mentions ν.
inline VirtualNumber number_from(const Expr& e) {
  if (auto v = as_number(e)) return lift(*v);
  return VirtualNumber(VirtualNumber::IndexExpr{e});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain and evaluation

inline Verdict defined_at(const VirtualFunction& phi, const VirtualNumber& xi, const Settings& cfg = {}) {
  if (phi.is_empty()) return Verdict::symbolic(false, "the empty function is defined nowhere");
  auto fe = phi.expr();
  auto xe = xi.expr();
  if (fe && xe) {
    Expr s = simplify(substitute(*fe, Var::Arg, *xe));
    if (is_total(s)) return Verdict::symbolic(true, "defined for every index: " + render(s));
    if (detail::provably_undefined(s)) return Verdict::symbolic(false, "undefined for every index: " + render(s));
    return eventually(Predicate{[s](Index n) { return detail::definedness(evaluate_at(s, Bindings::at(n))); },
                                detail::joint_period(*fe, xi)},
                      cfg.schedule);
  }
  return eventually(Predicate{[phi, xi](Index n) -> Probe {
                                Value x = xi.at(n);
                                if (!x.is_finite()) return {Observation::Undefined};
                                return detail::definedness(phi.at(n, x.raw()));
                              }},
                    cfg.schedule);
}

/// φ(ξ) without the domain check.
inline VirtualNumber evaluate_unchecked(const VirtualFunction& phi, const VirtualNumber& xi) {
  if (auto fe = phi.expr()) {
    if (auto xe = xi.expr()) {
      Expr s = substitute(*fe, Var::Arg, *xe);
      // Cycle arguments are kept unsimplified so each index evaluates the
      // member function exactly as it would at the corresponding real.
      if (detail::cycle_period(xe->node()).value_or(1) > 1 && !xe->is<Literal>())
        return VirtualNumber(VirtualNumber::IndexExpr{s});
      return detail::number_from(simplify(s));
    }
  }
  return rule(
      [phi, xi](Index n) {
        Value x = xi.at(n);
        if (!x.is_finite()) return x.is_defined() ? Value::indeterminate() : Value::undefined();
        return phi.at(n, x.raw());
      },
      phi.to_string() + " at " + xi.to_string());
}

inline VirtualNumber evaluate(const VirtualFunction& phi, const VirtualNumber& xi, const Settings& cfg = {}) {
  Verdict d = defined_at(phi, xi, cfg);
  if (d.fails()) throw NotDefined(phi.to_string() + " is not defined at " + xi.to_string());
  return evaluate_unchecked(phi, xi);
}

// ---------------------------------------------------------------------------
// Construction from other functions

inline VirtualFunction compose(const VirtualFunction& outer, const VirtualFunction& inner) {
  if (outer.is_empty() || inner.is_empty()) return empty_function();
  auto oe = outer.expr(), ie = inner.expr();
  if (oe && ie) return from_expr(simplify(substitute(*oe, Var::Arg, *ie)));
  return rule_family(
      [outer, inner](Index n, double x) {
        Value y = inner.at(n, x);
        if (!y.is_finite()) return y.is_defined() ? Value::indeterminate() : Value::undefined();
        return outer.at(n, y.raw());
      },
      outer.to_string() + " ∘ " + inner.to_string());
}

inline VirtualFunction pointwise_algebra(BinaryOp op, const VirtualFunction& f, const VirtualFunction& g) {
  if (f.is_empty() || g.is_empty()) return empty_function();
  auto fe = f.expr(), ge = g.expr();
  if (fe && ge) return from_expr(simplify(binary(op, *fe, *ge)));
  return rule_family([op, f, g](Index n, double x) { return detail::eval_binary(op, f.at(n, x), g.at(n, x)); },
                     "(" + f.to_string() + ") ⊕ (" + g.to_string() + ")");
}

/// Index-wise inverse on a bracket, by bisection. Throws when a sampled
/// member is not strictly monotone there.
inline VirtualFunction invert(const VirtualFunction& phi, const VirtualNumber& lo, const VirtualNumber& hi,
                              const Settings& cfg = {}) {
  constexpr int kProbe = 33;
  for (Index n : cfg.schedule.stage_ends()) {
    Value a = lo.at(n), b = hi.at(n);
    if (!a.is_finite() || !b.is_finite() || !(a.raw() < b.raw()))
      throw std::invalid_argument("invert: bracket is not an interval at index " + std::to_string(n));
    int dir = 0;
    double prev = 0;
    for (int j = 0; j <= kProbe; ++j) {
      Value y = phi.at(n, a.raw() + (b.raw() - a.raw()) * j / kProbe);
      if (!y.is_finite()) throw std::invalid_argument("invert: undefined inside the bracket at index " + std::to_string(n));
      if (j > 0) {
        int d = y.raw() > prev ? 1 : y.raw() < prev ? -1 : 0;
        if (d == 0 || (dir != 0 && d != dir))
          throw std::invalid_argument("invert: not strictly monotone at index " + std::to_string(n));
        dir = d;
      }
      prev = y.raw();
    }
  }
  return rule_family(
      [phi, lo, hi](Index n, double y) -> Value {
        double a = lo.at(n).raw(), b = hi.at(n).raw();
        Value fa = phi.at(n, a), fb = phi.at(n, b);
        if (!fa.is_finite() || !fb.is_finite()) return Value::undefined();
        const bool up = fb.raw() > fa.raw();
        if (y < std::min(fa.raw(), fb.raw()) || y > std::max(fa.raw(), fb.raw())) return Value::undefined();
        if (fa.raw() == y) return Value::finite(a);
        if (fb.raw() == y) return Value::finite(b);
        // Bisect to full precision: stop once the midpoint no longer moves.
        for (int it = 0; it < 2200; ++it) {
          const double m = 0.5 * (a + b);
          if (m <= a || m >= b) break;
          Value fm = phi.at(n, m);
          if (!fm.is_finite()) return Value::undefined();
          if (fm.raw() == y) return Value::finite(m);
          if ((fm.raw() < y) == up) a = m;
          else b = m;
        }
        return Value::finite(0.5 * (a + b));
      },
      "inverse of " + phi.to_string());
}

// ---------------------------------------------------------------------------
// Predicates

inline Verdict is_constant(const VirtualFunction& phi, const Settings& cfg = {}) {
  if (auto e = phi.expr()) {
    Expr s = simplify(*e);
    if (!depends_on(s, Var::Arg)) return Verdict::symbolic(true, "no ξ after simplification: " + render(s));
  }
  static constexpr std::array<double, 5> probes{-1.7, -0.4, 0.3, 1.1, 2.9};
  return eventually(Predicate{[phi](Index n) -> Probe {
                                std::optional<double> first;
                                for (double x : probes) {
                                  Value v = phi.at(n, x);
                                  if (!v.is_finite()) continue;
                                  if (!first) first = v.raw();
                                  else if (!detail::agree(*first, v.raw(), 1e-12)) return {Observation::False};
                                }
                                return {first ? Observation::True : Observation::Undefined, first};
                              }},
                    cfg.schedule);
}

inline Verdict continuous_at(const VirtualFunction& phi, const VirtualNumber& xi, const Settings& cfg = {}) {
  Verdict d = defined_at(phi, xi, cfg);
  if (d.fails()) throw NotDefined(phi.to_string() + " is not defined at " + xi.to_string());
  auto fe = phi.expr();
  if (fe && !contains_piecewise(*fe)) {
    if (d.holds()) {
      Verdict v = d;
      v.note = "elementary family: continuous on its open domain";
      return v;
    }
    return d;
  }
  std::optional<BreakpointSet> bps;
  if (fe) bps = breakpoints(*fe);
  std::optional<Index> period;
  if (fe) period = detail::joint_period(*fe, xi);
  return eventually(
      Predicate{[phi, xi, bps](Index n) -> Probe {
                  Value xv = xi.at(n);
                  if (!xv.is_finite()) return {Observation::Undefined};
                  const double x = xv.raw();
                  auto f = [&](double t) { return phi.at(n, t); };
                  if (!bps) return detail::continuous_member(f, x, 1e-6 * std::max(1.0, std::fabs(x)));
                  auto pts = bps->values_at(n, Breakpoint::Kind::Guard);
                  bool hit = !bps->complete();
                  for (double b : pts) hit = hit || detail::on_point(x, b);
                  if (!hit) {
                    Value fx = f(x);
                    return fx.is_finite() ? Probe{Observation::True, fx.raw()} : detail::definedness(fx);
                  }
                  return detail::continuous_member(f, x, detail::probe_step(x, pts));
                },
                period},
      cfg.schedule);
}

inline Verdict is_continuous(const VirtualFunction& phi, const Settings& cfg = {}) {
  if (phi.is_empty()) return Verdict::symbolic(true, "empty domain");
  if (auto in = std::get_if<VirtualFunction::Interleaved>(&phi.family())) {
    std::vector<Verdict> vs;
    for (const auto& s : in->slots) vs.push_back(is_continuous(s, cfg));
    return conjunction(vs);
  }
  auto fe = phi.expr();
  if (!fe) return Verdict::undecided("rule family: continuity cannot be analysed");
  if (!contains_piecewise(*fe))
    return Verdict::symbolic(true, "built from elementary functions: continuous on its domain");
  BreakpointSet bps = breakpoints(*fe);
  std::optional<Index> period = detail::cycle_period(fe->node());
  return eventually(Predicate{[phi, bps](Index n) -> Probe {
                                if (!bps.complete()) return {Observation::Undefined};
                                auto pts = bps.values_at(n, Breakpoint::Kind::Guard);
                                auto f = [&](double t) { return phi.at(n, t); };
                                for (double b : pts) {
                                  Value fb = f(b);
                                  if (!fb.is_defined()) continue;  // boundary outside the domain
                                  Probe p = detail::continuous_member(f, b, detail::probe_step(b, pts));
                                  if (p.obs != Observation::True) return {p.obs, b};
                                }
                                return {Observation::True};
                              },
                              period},
                    cfg.schedule);
}

// ---------------------------------------------------------------------------
// Derivation

namespace detail {

/// Does the derivative extend across guard boundary `b`? Checked at the
/// schedule's stage ends: f continuous there and one-sided slopes agree.
inline bool smooth_across(const Expr& f, const Expr& df, const Expr& b, const SamplingSchedule& schedule) {
  for (Index n : schedule.stage_ends()) {
    Value bv = evaluate_at(b, Bindings::at(n));
    if (!bv.is_finite()) return false;
    const double x = bv.raw();
    auto fn = [&](double t) { return evaluate_at(f, Bindings::at(n, t)); };
    auto dfn = [&](double t) { return evaluate_at(df, Bindings::at(n, t)); };
    const double h = 1e-3 * std::max(1.0, std::fabs(x)) / static_cast<double>(n);
    if (continuous_member(fn, x, h).obs != Observation::True) return false;
    auto l = one_sided_limit(dfn, x, -1, h), r = one_sided_limit(dfn, x, +1, h);
    if (!l || !r || !agree(*l, *r, 1e-6)) return false;
  }
  return true;
}

}  // namespace detail

inline VirtualFunction derivative(const VirtualFunction& phi, const Settings& cfg = {}) {
  return std::visit(
      [&](const auto& f) -> VirtualFunction {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, VirtualFunction::ExprFamily>) {
          Expr d = simplify(differentiate(f.expr, Var::Arg));
          if (!contains_piecewise(f.expr)) return from_expr(d);
          // Guard boundaries leave the domain unless the slopes match.
          std::vector<BranchSpec> holes;
          for (const auto& bp : breakpoints(f.expr).points) {
            if (bp.kind != Breakpoint::Kind::Guard) continue;
            if (!detail::smooth_across(f.expr, d, bp.at, cfg.schedule))
              holes.push_back({{arg_var(), Rel::Eq, bp.at}, lit(0) / lit(0)});
          }
          if (holes.empty()) return from_expr(d);
          return from_expr(piecewise(holes, d));
        } else if constexpr (std::is_same_v<T, VirtualFunction::Empty>) {
          return empty_function();
        } else if constexpr (std::is_same_v<T, VirtualFunction::RuleFamily>) {
          auto fn = f.fn;
          return rule_family(
              [fn](Index n, double x) -> Value {
                const double h = std::max(1e-8, 1e-6 * std::fabs(x));
                Value a = fn(n, x + h), b = fn(n, x - h);
                if (!a.is_finite() || !b.is_finite() || !fn(n, x).is_defined()) return Value::undefined();
                return Value::finite((a.raw() - b.raw()) / (2 * h));
              },
              "d/dξ " + f.label);
        } else {
          std::vector<VirtualFunction> slots;
          for (const auto& s : f.slots) slots.push_back(derivative(s, cfg));
          return interleave(std::move(slots));
        }
      },
      phi.family());
}

struct Differentiability {
  Verdict derivable;
  Verdict differentiable;

  std::string summary() const {
    if (derivable.fails()) return "not derivable";
    if (derivable.holds() && differentiable.holds()) return "differentiable";
    if (derivable.holds() && differentiable.fails()) return "derivable only";
    return "unknown";
  }
};

inline Differentiability differentiability_status(const VirtualFunction& phi, const VirtualNumber& xi,
                                                  const Settings& cfg = {}) {
  if (defined_at(phi, xi, cfg).fails())
    throw NotDefined(xi.to_string() + " is not in the domain of " + phi.to_string());
  VirtualFunction d = derivative(phi, cfg);
  Verdict derivable = defined_at(d, xi, cfg);
  Verdict differentiable = derivable;
  if (derivable.holds()) differentiable = continuous_at(d, xi, cfg);
  else if (derivable.unknown()) differentiable = Verdict::undecided("derivability unknown");
  return {derivable, differentiable};
}

// ---------------------------------------------------------------------------
// Equality

inline Verdict function_equal(const VirtualFunction& f, const VirtualFunction& g, const Settings& cfg = {}) {
  if (f.is_empty() && g.is_empty()) return Verdict::symbolic(true, "both empty");
  auto fe = f.expr(), ge = g.expr();
  if (fe && ge) {
    Expr a = simplify(*fe), b = simplify(*ge);
    if (a == b) return Verdict::symbolic(true, "identical after simplification");
    Expr d = simplify(a - b);
    if (is_number(d, 0.0)) return Verdict::symbolic(true, "difference simplifies to 0");
  }
  static constexpr std::array<double, 10> grid{-2.5, -1.3, -0.7, -0.2, 0.0, 0.15, 0.5, 1.0, 1.7, 3.0};
  std::optional<Index> period;
  if (fe && ge) {
    auto p = detail::cycle_period(fe->node()), q = detail::cycle_period(ge->node());
    if (p && q && std::lcm(*p, *q) <= 1'000'000) period = std::lcm(*p, *q);
  }
  return eventually(Predicate{[f, g](Index n) -> Probe {
                                bool unsure = false;
                                for (double x : grid) {
                                  Value a = f.at(n, x), b = g.at(n, x);
                                  if (a.is_defined() != b.is_defined()) return {Observation::False, x};
                                  if (!a.is_defined()) continue;
                                  if (!a.is_finite() || !b.is_finite()) {
                                    unsure = true;
                                    continue;
                                  }
                                  if (!detail::agree(a.raw(), b.raw(), 1e-9)) return {Observation::False, x};
                                }
                                return {unsure ? Observation::Undefined : Observation::True};
                              },
                              period},
                    cfg.schedule);
}

}  // namespace vcalc
