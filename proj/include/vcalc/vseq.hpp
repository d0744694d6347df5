#pragma once

/// @file vseq.hpp
/// @brief Virtual sequences: per-index real sequences in a position k, sums
/// up to a virtual position, infinitely fine partitions and Riemann sums.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <variant>

#include "differentiate.hpp"
#include "vnum.hpp"

namespace vcalc {

class NotNatural : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class VirtualSequence {
public:
  struct ExprSeq {
    Expr expr;  // over ν and k
  };
  struct RuleSeq {
    std::function<Value(Index, Index)> fn;  // (n, k)
    std::string label;
  };
  using Family = std::variant<ExprSeq, RuleSeq>;

  explicit VirtualSequence(Family f) : family_(std::move(f)) {}

  const Family& family() const { return family_; }

  Value at(Index n, Index k) const {
    if (auto e = std::get_if<ExprSeq>(&family_)) {
      Bindings b = Bindings::at(n);
      b.pos = static_cast<double>(k);
      return evaluate_at(e->expr, b);
    }
    return std::get<RuleSeq>(family_).fn(n, k);
  }

  std::optional<Expr> expr() const {
    if (auto e = std::get_if<ExprSeq>(&family_)) return e->expr;
    return std::nullopt;
  }

  std::string to_string() const {
    if (auto e = std::get_if<ExprSeq>(&family_)) return "(" + render(e->expr) + ")_k";
    return "rule(" + std::get<RuleSeq>(family_).label + ")";
  }

private:
  Family family_;
};

inline VirtualSequence sequence_from(const Expr& e) {
  if (depends_on(e, Var::Arg)) throw std::invalid_argument("a virtual sequence cannot depend on ξ");
  return VirtualSequence(VirtualSequence::ExprSeq{simplify(e)});
}

inline VirtualSequence constant_sequence(const VirtualNumber& c) {
  if (auto e = c.expr()) return sequence_from(*e);
  return VirtualSequence(VirtualSequence::RuleSeq{[c](Index n, Index) { return c.at(n); }, c.to_string()});
}

inline VirtualSequence rule_sequence(std::function<Value(Index, Index)> fn, std::string label) {
  return VirtualSequence(VirtualSequence::RuleSeq{std::move(fn), std::move(label)});
}

namespace detail {

inline std::optional<Index> natural_at(const VirtualNumber& kappa, Index n) {
  auto v = kappa.at(n).real();
  if (!v || !is_integer(*v) || *v < 1 || *v > 1e15) return std::nullopt;
  return static_cast<Index>(*v);
}

inline void require_natural(const VirtualNumber& kappa, const Settings& cfg) {
  Predicate p{[&](Index n) -> Probe { return natural_at(kappa, n) ? Observation::True : Observation::False; },
              kappa.period()};
  Verdict v = eventually(p, cfg.schedule);
  if (v.outcome != Outcome::Holds)
    throw NotNatural("position " + kappa.to_string() + " is not eventually a natural number");
}

/// Sum of s(n, 1..K) with Neumaier compensation; flagged terms fold in via
/// the ordinary flagged arithmetic.
inline Value direct_sum(const VirtualSequence& s, Index n, Index K) {
  constexpr Index kMaxTerms = 100'000'000;
  if (K > kMaxTerms) return Value::indeterminate();
  double sum = 0, comp = 0;
  std::optional<Value> flagged;
  for (Index k = 1; k <= K; ++k) {
    Value t = s.at(n, k);
    if (!t.is_defined()) return Value::undefined();
    if (auto r = t.real()) {
      double y = sum + *r;
      comp += std::fabs(sum) >= std::fabs(*r) ? (sum - y) + *r : (*r - y) + sum;
      sum = y;
    } else {
      flagged = flagged ? eval_binary(BinaryOp::Add, *flagged, t) : t;
    }
  }
  Value total = Value::finite(sum + comp);
  return flagged ? eval_binary(BinaryOp::Add, total, *flagged) : total;
}

/// Σ_{k=1}^{K} s for s a polynomial of degree ≤ 2 in k, else nullopt.
inline std::optional<Expr> polynomial_sum(const Expr& s, const Expr& K) {
  if (contains_piecewise(s)) return std::nullopt;
  Expr d1 = simplify(differentiate(s, Var::Pos));
  Expr d2 = simplify(differentiate(d1, Var::Pos));
  if (!is_zero(simplify(differentiate(d2, Var::Pos)))) return std::nullopt;
  auto at0 = [](const Expr& e) { return substitute(e, Var::Pos, lit(0)); };
  // s(k) = c0 + c1 k + c2 k², with c1 = s'(0), c2 = s''/2.
  Expr c0 = at0(s), c1 = at0(d1), c2 = d2 / lit(2);
  Expr one = lit(1);
  return simplify(c0 * K + c1 * K * (K + one) / lit(2) + c2 * K * (K + one) * (lit(2) * K + one) / lit(6));
}

}  // namespace detail

/// α_κ: position κ of the sequence, index-wise.
inline VirtualNumber term(const VirtualSequence& s, const VirtualNumber& kappa, const Settings& cfg = {}) {
  detail::require_natural(kappa, cfg);
  auto se = s.expr();
  auto ke = kappa.expr();
  if (se && ke) return construct(substitute(*se, Var::Pos, *ke), cfg.schedule);
  return rule(
      [s, kappa](Index n) {
        auto k = detail::natural_at(kappa, n);
        return k ? s.at(n, *k) : Value::undefined();
      },
      s.to_string() + " at " + kappa.to_string());
}

/// Σ_{k=1}^{κ} α_k. Closed forms for quadratics in k, compensated direct
/// summation otherwise.
inline VirtualNumber partial_sum(const VirtualSequence& s, const VirtualNumber& kappa, const Settings& cfg = {}) {
  detail::require_natural(kappa, cfg);
  auto se = s.expr();
  auto ke = kappa.expr();
  if (se && ke) {
    if (auto closed = detail::polynomial_sum(*se, *ke)) {
      // Guard against a simplifier slip: the closed form must agree with the
      // direct sum where both are cheap to compute.
      bool ok = true;
      for (Index n : {1, 2, 7, 64}) {
        auto K = detail::natural_at(kappa, n);
        if (!K || *K > 100000) continue;
        auto direct = detail::direct_sum(s, n, *K).real();
        auto fast = evaluate_at(*closed, Bindings::at(n)).real();
        if (!direct || !fast || !close_rel(*direct, *fast, 1e-9)) ok = false;
      }
      if (ok) return construct(*closed, cfg.schedule);
    }
  }
  return rule(
      [s, kappa](Index n) {
        // κ_n = 0 at an early index is the empty sum.
        if (auto v = kappa.at(n).real(); v && *v == 0) return Value::finite(0);
        auto K = detail::natural_at(kappa, n);
        return K ? detail::direct_sum(s, n, *K) : Value::undefined();
      },
      "Σ " + s.to_string() + " to " + kappa.to_string());
}

inline VirtualNumber infinite_sum(const VirtualSequence& s, const Settings& cfg = {}) {
  return partial_sum(s, infinity(), cfg);
}

/// α_k = a + (b − a)·k/ν.
inline VirtualSequence fine_partition(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("partition endpoints must be finite");
  if (!(a < b)) throw std::invalid_argument("fine partition needs a < b");
  return sequence_from(VirtualNumber::lit_signed(a) + VirtualNumber::lit_signed(b - a) * pos_var() / index_var());
}

/// α_1 ≈ a, α_∞ = b (end-equal) and consecutive terms near each other.
inline Verdict is_fine_partition(const VirtualSequence& s, double a, double b, const Settings& cfg = {}) {
  Verdict first = near(term(s, lift(1), cfg), lift(a), cfg);
  Verdict last = end_equal(term(s, infinity(), cfg), lift(b), cfg);

  Verdict mesh;
  std::optional<Expr> step;
  if (auto e = s.expr()) step = simplify(substitute(*e, Var::Pos, pos_var() + lit(1)) - *e);
  if (step && !depends_on(*step, Var::Pos)) {
    mesh = near(construct(*step, cfg.schedule), lift(0), cfg);
    mesh.note = "step " + render(*step) + ": " + mesh.note;
  } else {
    // Worst step over an evenly spread grid of positions 1..n−1.
    Sequence worst{[s](Index n) -> Value {
                     if (n < 2) return Value::finite(0);
                     double m = 0;
                     constexpr Index kGrid = 32;
                     for (Index i = 0; i <= kGrid; ++i) {
                       Index k = 1 + (n - 2) * i / kGrid;
                       Value d = detail::eval_binary(BinaryOp::Sub, s.at(n, k + 1), s.at(n, k));
                       auto r = d.real();
                       if (!r) return d.is_defined() ? Value::huge(1) : d;
                       m = std::max(m, std::fabs(*r));
                     }
                     return Value::finite(m);
                   },
                   std::nullopt};
    LimitResult L = limit(worst, cfg.schedule, cfg.limit_tol);
    if (auto c = std::get_if<Converges>(&L.v)) {
      mesh = Verdict::undecided();
      mesh.outcome = std::fabs(c->value) <= cfg.limit_tol ? Outcome::Holds : Outcome::Fails;
    } else if (L.unknown()) {
      mesh = Verdict::undecided();
    } else {
      mesh = Verdict::undecided();
      mesh.outcome = Outcome::Fails;
    }
    mesh.mode = Mode::Sampled;
    mesh.evidence = L.evidence;
    mesh.note = "largest step " + L.describe();
  }
  Verdict all = conjunction({first, last, mesh});
  all.note = "first ≈ a: " + std::string(to_string(first.outcome)) + "; last = b: " + to_string(last.outcome) +
             "; mesh: " + to_string(mesh.outcome);
  return all;
}

enum class Tag { Right, Left, Mid };

inline const char* to_string(Tag t) {
  switch (t) {
    case Tag::Right: return "right";
    case Tag::Left: return "left";
    case Tag::Mid: return "mid";
  }
  return "?";
}

/// Σ_{k=1}^{ν} f(t_k)·(b − a)/ν over the fine partition of [a, b].
inline VirtualNumber riemann_sum_integral(const Expr& f, double a, double b, Tag tag = Tag::Right,
                                          const Settings& cfg = {}) {
  if (depends_on(f, Var::Index) || depends_on(f, Var::Pos))
    throw std::invalid_argument("Riemann sums take a real function of ξ only");
  fine_partition(a, b);  // validates the interval
  Expr shift = tag == Tag::Right ? lit(0) : tag == Tag::Left ? lit(1) : lit(0.5);
  Expr width = VirtualNumber::lit_signed(b - a);
  Expr t = VirtualNumber::lit_signed(a) + width * (pos_var() - shift) / index_var();
  Expr summand = substitute(f, Var::Arg, t) * width / index_var();
  VirtualNumber r = infinite_sum(sequence_from(summand), cfg);
  // Undefined grid points at every late sampled index make the sum meaningless.
  auto plan = cfg.schedule.plan();
  for (Index n : plan.back())
    if (!r.at(n).is_defined())
      throw std::domain_error("integrand undefined on the partition grid at index " + std::to_string(n));
  return r;
}

}  // namespace vcalc
