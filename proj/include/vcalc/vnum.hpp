#pragma once

/**
 * @file vnum.hpp
 * @brief Virtual numbers: classes of real sequences under eventual agreement.
 *
 * A number carries one representative: an index expression over ν, a
 * periodic list cycled from index 1, or an opaque rule. Expression and
 * periodic representatives stay symbolic under arithmetic, which is what
 * lets most relations below be decided exactly.
 */

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "decision.hpp"
#include "evaluate.hpp"
#include "expr.hpp"
#include "render.hpp"
#include "simplify.hpp"

namespace vcalc {

/// Knobs shared by every sampled decision.
struct Settings {
  SamplingSchedule schedule;
  double limit_tol = 1e-8;      // near / reduce
  double equal_rel_tol = 1e-12;  // sampled end-equality
};

class NotDefined : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

class VirtualNumber {
public:
  struct IndexExpr {
    Expr expr;
  };
  struct Periodic {
    std::vector<double> values;
  };
  struct Rule {
    std::function<Value(Index)> fn;
    std::string label;
  };
  using Rep = std::variant<IndexExpr, Periodic, Rule>;

  explicit VirtualNumber(Rep r) : rep_(std::move(r)) {}

  const Rep& rep() const { return rep_; }
  bool is_rule() const { return std::holds_alternative<Rule>(rep_); }

  Value at(Index n) const {
    return std::visit(
        [&](const auto& r) -> Value {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, IndexExpr>) return evaluate_at(r.expr, Bindings::at(n));
          else if constexpr (std::is_same_v<T, Periodic>) return Value::finite(r.values[(n - 1) % r.values.size()]);
          else return r.fn(n);
        },
        rep_);
  }

  /// Symbolic form, if any. Periodic lists become cycle(...) nodes.
  std::optional<Expr> expr() const {
    if (auto e = std::get_if<IndexExpr>(&rep_)) return e->expr;
    if (auto p = std::get_if<Periodic>(&rep_)) return p->values.size() == 1 ? lit_signed(p->values[0]) : cycle(p->values);
    return std::nullopt;
  }

  /// Exact period when the representative does not depend on ν directly.
  std::optional<Index> period() const;

  std::string to_string() const {
    if (auto r = std::get_if<Rule>(&rep_)) return "rule(" + r->label + ")";
    return render(*expr());
  }

  static Expr lit_signed(double v) { return v < 0 ? -lit(-v) : lit(v); }

private:
  Rep rep_;
};

namespace detail {

inline std::optional<Index> cycle_period(const Node& n) {
  return std::visit(
      [&](const auto& x) -> std::optional<Index> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Variable>) {
          if (x.var == Var::Index) return std::nullopt;
          return Index{1};
        } else if constexpr (std::is_same_v<T, Cycle>) {
          return static_cast<Index>(x.values.size());
        } else if constexpr (std::is_same_v<T, Unary>) {
          return cycle_period(*x.arg);
        } else if constexpr (std::is_same_v<T, Binary>) {
          auto a = cycle_period(*x.lhs), b = cycle_period(*x.rhs);
          if (!a || !b) return std::nullopt;
          Index l = std::lcm(*a, *b);
          if (l > 1'000'000) return std::nullopt;
          return l;
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          Index l = 1;
          auto fold = [&](const NodePtr& p) {
            auto q = cycle_period(*p);
            if (!q) return false;
            l = std::lcm(l, *q);
            return l <= 1'000'000;
          };
          for (const auto& br : x.branches)
            if (!fold(br.guard.lhs) || !fold(br.guard.rhs) || !fold(br.value)) return std::nullopt;
          if (x.fallback && !fold(x.fallback)) return std::nullopt;
          return l;
        } else {
          return Index{1};
        }
      },
      n.v);
}

}  // namespace detail

inline std::optional<Index> VirtualNumber::period() const {
  if (auto p = std::get_if<Periodic>(&rep_)) return static_cast<Index>(p->values.size());
  if (auto e = std::get_if<IndexExpr>(&rep_)) return detail::cycle_period(e->expr.node());
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Construction

inline VirtualNumber lift(double r) { return VirtualNumber(VirtualNumber::Periodic{{r}}); }
inline VirtualNumber infinity() { return VirtualNumber(VirtualNumber::IndexExpr{infinity_expr()}); }
inline VirtualNumber delta() { return VirtualNumber(VirtualNumber::IndexExpr{delta_expr()}); }

inline VirtualNumber periodic(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("periodic list must be nonempty");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("periodic entries must be finite reals");
  return VirtualNumber(VirtualNumber::Periodic{std::move(values)});
}

inline VirtualNumber rule(std::function<Value(Index)> fn, std::string label) {
  return VirtualNumber(VirtualNumber::Rule{std::move(fn), std::move(label)});
}

/// Number from an expression over ν. Rejects ξ/k and representatives that
/// stay undefined through the final two sampling stages.
inline VirtualNumber construct(const Expr& e, const SamplingSchedule& schedule = {}) {
  if (depends_on(e, Var::Arg)) throw std::invalid_argument("a virtual number cannot depend on ξ");
  if (depends_on(e, Var::Pos)) throw std::invalid_argument("a virtual number cannot depend on k");
  Expr s = simplify(e);
  if (auto c = s.as<Cycle>()) return periodic(c->values);
  if (auto v = as_number(s)) return lift(*v);
  auto plan = schedule.plan();
  for (std::size_t st = plan.size() - 2; st < plan.size(); ++st)
    for (Index n : plan[st])
      if (!evaluate_at(s, Bindings::at(n)).is_defined())
        throw std::invalid_argument("representative is undefined at sampled index " + std::to_string(n) +
                                    ": " + render(e));
  return VirtualNumber(VirtualNumber::IndexExpr{s});
}

// ---------------------------------------------------------------------------
// Arithmetic

inline VirtualNumber arith(BinaryOp op, const VirtualNumber& a, const VirtualNumber& b) {
  auto ea = a.expr(), eb = b.expr();
  if (ea && eb) {
    Expr s = simplify(binary(op, *ea, *eb));
    auto p = detail::cycle_period(s.node());
    if (p && *p <= 4096) {
      // Fold back to a periodic list when every slot is an ordinary real.
      std::vector<double> vals;
      for (Index n = 1; n <= *p; ++n) {
        Value v = evaluate_at(s, Bindings::at(n));
        if (!v.is_finite()) {
          vals.clear();
          break;
        }
        vals.push_back(v.raw());
      }
      if (!vals.empty()) {
        if (std::all_of(vals.begin(), vals.end(), [&](double x) { return x == vals[0]; })) vals.resize(1);
        return VirtualNumber(VirtualNumber::Periodic{std::move(vals)});
      }
    }
    return VirtualNumber(VirtualNumber::IndexExpr{s});
  }
  std::string label = "(" + a.to_string() + ") op (" + b.to_string() + ")";
  return rule(
      [op, a, b](Index n) { return detail::eval_binary(op, a.at(n), b.at(n)); },
      label);
}

inline VirtualNumber apply(UnaryOp op, const VirtualNumber& a) {
  if (auto e = a.expr()) return VirtualNumber(VirtualNumber::IndexExpr{simplify(unary(op, *e))});
  return rule([op, a](Index n) { return detail::eval_unary(op, a.at(n)); }, "f(" + a.to_string() + ")");
}

inline VirtualNumber operator+(const VirtualNumber& a, const VirtualNumber& b) { return arith(BinaryOp::Add, a, b); }
inline VirtualNumber operator-(const VirtualNumber& a, const VirtualNumber& b) { return arith(BinaryOp::Sub, a, b); }
inline VirtualNumber operator*(const VirtualNumber& a, const VirtualNumber& b) { return arith(BinaryOp::Mul, a, b); }
inline VirtualNumber operator/(const VirtualNumber& a, const VirtualNumber& b) { return arith(BinaryOp::Div, a, b); }
inline VirtualNumber pow(const VirtualNumber& a, const VirtualNumber& b) { return arith(BinaryOp::Pow, a, b); }
inline VirtualNumber operator-(const VirtualNumber& a) { return apply(UnaryOp::Neg, a); }

inline Sequence to_sequence(const VirtualNumber& a) {
  return Sequence{[a](Index n) { return a.at(n); }, a.period()};
}

// ---------------------------------------------------------------------------
// Relations

namespace detail {

/// Sign of a - b at one index, or nullopt when the flags hide it.
inline std::optional<int> value_order(const Value& a, const Value& b) {
  using K = Value::Kind;
  auto sgn = [](double x) { return x > 0 ? 1 : x < 0 ? -1 : 0; };
  if (a.is_finite() && b.is_finite()) return a.raw() < b.raw() ? -1 : a.raw() > b.raw() ? 1 : 0;
  if (a.kind() == K::Huge && b.is_finite()) return sgn(a.raw());
  if (b.kind() == K::Huge && a.is_finite()) return -sgn(b.raw());
  if (a.kind() == K::Huge && b.kind() == K::Huge && sgn(a.raw()) != sgn(b.raw())) return sgn(a.raw());
  if (a.kind() == K::Tiny && b.is_finite() && b.raw() != 0) return b.raw() > 0 ? -1 : 1;
  if (b.kind() == K::Tiny && a.is_finite() && a.raw() != 0) return a.raw() > 0 ? 1 : -1;
  if (a.kind() == K::Tiny && b.kind() == K::Huge) return -sgn(b.raw());
  if (b.kind() == K::Tiny && a.kind() == K::Huge) return sgn(a.raw());
  return std::nullopt;
}

/// Difference expression when both sides are symbolic.
inline std::optional<Expr> symbolic_difference(const VirtualNumber& a, const VirtualNumber& b) {
  auto ea = a.expr(), eb = b.expr();
  if (!ea || !eb) return std::nullopt;
  return simplify(*ea - *eb);
}

// Growth exponents in ν, read off the expression tree: |e| = O(ν^upper) and
// |e| ≥ c·ν^lower > 0 eventually. nullopt when no bound is evident.
inline std::optional<double> growth_lower(const Expr& e);

inline std::optional<double> growth_upper(const Expr& e) {
  constexpr double kZero = -std::numeric_limits<double>::infinity();
  return std::visit(
      [&](const auto& x) -> std::optional<double> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          return x.value == 0 ? kZero : 0.0;
        } else if constexpr (std::is_same_v<T, ConstantNode> || std::is_same_v<T, Cycle>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Variable>) {
          if (x.var == Var::Index) return 1.0;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Unary>) {
          auto u = growth_upper(wrap(x.arg));
          switch (x.op) {
            case UnaryOp::Neg:
            case UnaryOp::Abs: return u;
            case UnaryOp::Sqrt:
              if (u) return 0.5 * *u;
              return std::nullopt;
            case UnaryOp::Sin:
            case UnaryOp::Arctan:
              if (u && *u < 0) return u;  // sin t ~ t for small t
              return 0.0;
            case UnaryOp::Cos: return 0.0;
            case UnaryOp::Exp:
              if (u && *u <= 0) return 0.0;
              return std::nullopt;
            default: return std::nullopt;
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          const Expr l = wrap(x.lhs), r = wrap(x.rhs);
          switch (x.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub: {
              auto a = growth_upper(l), b = growth_upper(r);
              if (a && b) return std::max(*a, *b);
              return std::nullopt;
            }
            case BinaryOp::Mul: {
              auto a = growth_upper(l), b = growth_upper(r);
              if (a && b) return *a + *b;
              return std::nullopt;
            }
            case BinaryOp::Div: {
              auto a = growth_upper(l), b = growth_lower(r);
              if (a && b) return *a - *b;
              return std::nullopt;
            }
            case BinaryOp::Pow: {
              auto c = as_number(r);
              if (!c) return std::nullopt;
              if (*c == 0) return 0.0;
              auto a = *c > 0 ? growth_upper(l) : growth_lower(l);
              if (a) return *c * *a;
              return std::nullopt;
            }
          }
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      e.node().v);
}

inline std::optional<double> growth_lower(const Expr& e) {
  return std::visit(
      [&](const auto& x) -> std::optional<double> {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Literal>) {
          if (x.value != 0) return 0.0;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, ConstantNode>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, Cycle>) {
          if (std::none_of(x.values.begin(), x.values.end(), [](double v) { return v == 0; })) return 0.0;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Variable>) {
          if (x.var == Var::Index) return 1.0;
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Unary>) {
          switch (x.op) {
            case UnaryOp::Neg:
            case UnaryOp::Abs: return growth_lower(wrap(x.arg));
            case UnaryOp::Sqrt: {
              auto a = growth_lower(wrap(x.arg));
              if (a) return 0.5 * *a;
              return std::nullopt;
            }
            case UnaryOp::Exp: {
              auto u = growth_upper(wrap(x.arg));
              if (u && *u <= 0) return 0.0;
              return std::nullopt;
            }
            default: return std::nullopt;
          }
        } else if constexpr (std::is_same_v<T, Binary>) {
          const Expr l = wrap(x.lhs), r = wrap(x.rhs);
          switch (x.op) {
            case BinaryOp::Add:
            case BinaryOp::Sub: {
              auto la = growth_lower(l), lb = growth_lower(r);
              auto ua = growth_upper(l), ub = growth_upper(r);
              // One side dominates the other, or (for +) both are positive.
              if (la && ub && *ub < *la) return la;
              if (lb && ua && *ua < *lb) return lb;
              if (x.op == BinaryOp::Add && positive(l) && positive(r)) {
                if (la && lb) return std::max(*la, *lb);
                if (la) return la;
                if (lb) return lb;
              }
              return std::nullopt;
            }
            case BinaryOp::Mul: {
              auto a = growth_lower(l), b = growth_lower(r);
              if (a && b) return *a + *b;
              return std::nullopt;
            }
            case BinaryOp::Div: {
              auto a = growth_lower(l), b = growth_upper(r);
              if (a && b) return *a - *b;
              return std::nullopt;
            }
            case BinaryOp::Pow: {
              auto c = as_number(r);
              if (!c) return std::nullopt;
              if (*c == 0) return 0.0;
              auto a = *c > 0 ? growth_lower(l) : growth_upper(l);
              if (a) return *c * *a;
              return std::nullopt;
            }
          }
          return std::nullopt;
        } else {
          return std::nullopt;
        }
      },
      e.node().v);
}

/// c when e = c + (terms that are O(ν^p), p < 0), read symbolically.
inline std::optional<double> symbolic_limit(const Expr& e) {
  std::vector<std::pair<Expr, double>> terms;
  std::function<void(const Expr&, double)> split = [&](const Expr& t, double sign) {
    if (auto b = t.as<Binary>(); b && (b->op == BinaryOp::Add || b->op == BinaryOp::Sub)) {
      split(wrap(b->lhs), sign);
      split(wrap(b->rhs), b->op == BinaryOp::Add ? sign : -sign);
      return;
    }
    terms.emplace_back(t, sign);
  };
  split(simplify(e), 1.0);
  double c = 0;
  for (const auto& [t, sign] : terms) {
    if (depends_on(t, Var::Arg) || depends_on(t, Var::Pos)) return std::nullopt;
    if (!depends_on(t, Var::Index)) {
      Value v = evaluate_at(t, Bindings::at(1));
      if (!v.is_finite()) return std::nullopt;
      c += sign * v.raw();
      continue;
    }
    auto u = growth_upper(t);
    if (!u || !(*u < 0)) return std::nullopt;
  }
  return c;
}

inline std::optional<Index> joint_period(const VirtualNumber& a, const VirtualNumber& b) {
  auto p = a.period(), q = b.period();
  if (!p || !q) return std::nullopt;
  Index l = std::lcm(*p, *q);
  if (l > 1'000'000) return std::nullopt;
  return l;
}

}  // namespace detail

inline Verdict end_equal(const VirtualNumber& a, const VirtualNumber& b, const Settings& cfg = {}) {
  if (auto d = detail::symbolic_difference(a, b)) {
    if (auto v = as_number(*d)) return Verdict::symbolic(*v == 0, "difference simplifies to " + render(*d));
  }
  const double rel = cfg.equal_rel_tol;
  Predicate p{[a, b, rel](Index n) -> Probe {
                Value x = a.at(n), y = b.at(n);
                if (!x.is_finite() || !y.is_finite()) return {Observation::Undefined};
                const double diff = x.raw() - y.raw();
                const bool eq = std::fabs(diff) <= rel * std::max(std::fabs(x.raw()), std::fabs(y.raw()));
                return {eq ? Observation::True : Observation::False, diff};
              },
              detail::joint_period(a, b)};
  return eventually(p, cfg.schedule);
}

struct Comparison {
  Verdict lt, le, gt, ge;
  bool incomparable() const { return lt.fails() && gt.fails(); }
};

inline Comparison end_compare(const VirtualNumber& a, const VirtualNumber& b, const Settings& cfg = {}) {
  if (auto d = detail::symbolic_difference(a, b)) {
    if (auto v = as_number(*d)) {
      std::string why = "difference simplifies to " + render(*d);
      return {Verdict::symbolic(*v < 0, why), Verdict::symbolic(*v <= 0, why), Verdict::symbolic(*v > 0, why),
              Verdict::symbolic(*v >= 0, why)};
    }
  }
  auto period = detail::joint_period(a, b);
  auto make = [&](auto accept) {
    return eventually(Predicate{[a, b, accept](Index n) -> Probe {
                                  Value x = a.at(n), y = b.at(n);
                                  auto o = detail::value_order(x, y);
                                  std::optional<double> diff;
                                  if (x.is_defined() && y.is_defined()) diff = x.raw() - y.raw();
                                  if (!o) return {Observation::Undefined, diff};
                                  return {accept(*o) ? Observation::True : Observation::False, diff};
                                },
                                period},
                      cfg.schedule);
  };
  return {make([](int o) { return o < 0; }), make([](int o) { return o <= 0; }),
          make([](int o) { return o > 0; }), make([](int o) { return o >= 0; })};
}

inline LimitResult try_limit(const VirtualNumber& a, const Settings& cfg = {}) {
  LimitResult r = limit(to_sequence(a), cfg.schedule, cfg.limit_tol);
  // Slow or oscillating decay defeats sampling; the tree may still show it.
  if (r.unknown())
    if (auto e = a.expr())
      if (auto c = detail::symbolic_limit(*e)) r.v = Converges{*c, 0.0};
  return r;
}

/// ≈: the difference is infinitesimal.
inline Verdict near(const VirtualNumber& a, const VirtualNumber& b, const Settings& cfg = {}) {
  VirtualNumber d = a - b;
  if (auto e = d.expr(); e && as_number(*e))
    return Verdict::symbolic(*as_number(*e) == 0, "difference simplifies to " + render(*e));
  if (auto e = d.expr())
    if (auto c = detail::symbolic_limit(*e))
      return Verdict::symbolic(*c == 0, "difference is " + render(lit(*c)) + " plus terms vanishing like a negative power of ∞");
  LimitResult lr = try_limit(d, cfg);
  Verdict v;
  v.evidence = lr.evidence;
  v.mode = d.period() ? Mode::Symbolic : Mode::Sampled;
  if (auto c = lr.converged()) {
    v.outcome = std::fabs(c->value) <= cfg.limit_tol ? Outcome::Holds : Outcome::Fails;
    v.note = "difference " + lr.describe();
  } else if (lr.diverged() || lr.no_limit()) {
    v.outcome = Outcome::Fails;
    v.note = "difference " + lr.describe();
  } else {
    v.outcome = Outcome::Unknown;
    v.note = "difference: " + lr.describe();
  }
  return v;
}

/// ~: near but not end-equal.
inline Verdict adjacent(const VirtualNumber& a, const VirtualNumber& b, const Settings& cfg = {}) {
  Verdict n = near(a, b, cfg);
  Verdict e = end_equal(a, b, cfg);
  Verdict v = conjunction({n, negate(e)});
  v.note = "near: " + std::string(to_string(n.outcome)) + ", end-equal: " + to_string(e.outcome);
  return v;
}

class NotReducible : public std::runtime_error {
public:
  explicit NotReducible(LimitResult r) : std::runtime_error("not reducible: " + r.describe()), result_(std::move(r)) {}
  const LimitResult& result() const { return result_; }

private:
  LimitResult result_;
};

/// reduce() plus the limit evidence it rests on (empty for constants).
inline std::pair<double, LimitResult> reduce_detailed(const VirtualNumber& a, const Settings& cfg = {}) {
  if (auto e = a.expr(); e && !depends_on(*e, Var::Index) && a.period() == Index{1}) {
    Value v = evaluate_at(*e, Bindings::at(1));
    if (v.is_finite()) return {v.raw(), LimitResult{Converges{v.raw(), 0.0}, {}}};
  }
  LimitResult r = try_limit(a, cfg);
  // Acceleration leaves rounding residue around an exact zero limit.
  if (auto c = r.converged()) return {std::fabs(c->value) <= cfg.limit_tol * 1e-3 ? 0.0 : c->value, r};
  throw NotReducible(std::move(r));
}

/// The real number `a` is near, or NotReducible.
inline double reduce(const VirtualNumber& a, const Settings& cfg = {}) { return reduce_detailed(a, cfg).first; }

enum class Magnitude { Infinitesimal, FiniteAppreciable, Infinite, Indeterminate };

inline const char* to_string(Magnitude m) {
  switch (m) {
    case Magnitude::Infinitesimal: return "infinitesimal";
    case Magnitude::FiniteAppreciable: return "finite-appreciable";
    case Magnitude::Infinite: return "infinite";
    case Magnitude::Indeterminate: return "indeterminate";
  }
  return "?";
}

inline Magnitude classify(const VirtualNumber& a, const Settings& cfg = {}) {
  if (near(a, lift(0), cfg).holds()) return Magnitude::Infinitesimal;
  LimitResult r = try_limit(a, cfg);
  if (r.diverged()) return Magnitude::Infinite;
  if (auto c = r.converged(); c && std::fabs(c->value) > cfg.limit_tol) return Magnitude::FiniteAppreciable;
  // Bounded away from 0 and ∞ on the tail of the schedule.
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  auto plan = cfg.schedule.plan();
  std::vector<Index> tail;
  if (auto p = a.period()) {
    for (Index n = 1; n <= *p; ++n) tail.push_back(n);
  } else {
    for (std::size_t s = plan.size() - 2; s < plan.size(); ++s) tail.insert(tail.end(), plan[s].begin(), plan[s].end());
  }
  for (Index n : tail) {
    Value v = a.at(n);
    if (!v.is_finite()) return Magnitude::Indeterminate;
    lo = std::min(lo, std::fabs(v.raw()));
    hi = std::max(hi, std::fabs(v.raw()));
  }
  if (lo > cfg.limit_tol && hi < 1.0 / cfg.limit_tol) return Magnitude::FiniteAppreciable;
  return Magnitude::Indeterminate;
}

}  // namespace vcalc
