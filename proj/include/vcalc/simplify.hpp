#pragma once

/**
 * @file simplify.hpp
 * @brief Fixed-rule simplifier.
 *
 * The rule list, applied bottom-up until a fixpoint:
 *
 *  - sums are flattened, like terms merged (only when the term is defined
 *    everywhere, so x - x with a pole in x is kept), numbers folded and the
 *    constant moved last;
 *  - products are flattened into coefficient * prod(base^exponent); equal
 *    bases merge their exponents when the base is positive or both
 *    exponents are integers of one sign, so ∂·∞ -> 1 and ν²·ν⁻¹ -> ν;
 *  - a zero factor wipes the product only when every other factor is
 *    defined everywhere;
 *  - integer powers distribute over products; sqrt(u) is u^(1/2);
 *  - e^u -> exp(u), exp(0) -> 1, ln(1) -> 0, ln(e) -> 1, ln(exp u) -> u,
 *    exp(ln u) -> u for positive u;
 *  - sin, cos, tan at rational multiples of π with denominator 1, 2 or 6,
 *    and arctan at 0, ±1, take their exact values;
 *  - a piecewise whose guards are decidable numbers collapses.
 *
 * Nothing here ever enlarges the set of bindings where an expression is
 * defined.
 */

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "expr.hpp"

namespace vcalc {

inline Expr simplify(const Expr& e);

namespace detail {

struct Factor {
  Expr base;
  double exponent;
};

struct ProductParts {
  double coefficient = 1.0;
  std::vector<Factor> factors;
  bool zero = false;  // a literal zero factor was seen
};

inline bool mergeable(const Expr& base, double p, double q) {
  if (positive(base)) return true;
  return is_integer(p) && is_integer(q) && ((p > 0) == (q > 0));
}

inline void add_factor(ProductParts& parts, const Expr& base, double p) {
  for (auto& f : parts.factors) {
    if (f.base == base && mergeable(base, f.exponent, p)) {
      f.exponent += p;
      return;
    }
  }
  parts.factors.push_back({base, p});
}

inline void collect_product(const Expr& e, double p, ProductParts& parts) {
  if (auto n = as_number(e)) {
    if (*n == 0) {
      if (p > 0) {
        parts.zero = true;
        return;
      }
      parts.factors.push_back({lit(0), p});
      return;
    }
    if (is_integer(p)) {
      // Divide rather than multiply by a reciprocal: a/b folds to exactly a/b.
      if (p < 0) parts.coefficient /= std::pow(*n, -p);
      else parts.coefficient *= std::pow(*n, p);
      return;
    }
    if (*n > 0) {
      add_factor(parts, lit(*n), p);
      return;
    }
    parts.factors.push_back({e, p});
    return;
  }
  if (auto u = e.as<Unary>()) {
    if (u->op == UnaryOp::Neg && is_integer(p)) {
      if (std::fmod(std::fabs(p), 2.0) == 1.0) parts.coefficient = -parts.coefficient;
      collect_product(wrap(u->arg), p, parts);
      return;
    }
    if (u->op == UnaryOp::Sqrt) {
      Expr a = wrap(u->arg);
      if (positive(a)) {
        collect_product(a, 0.5 * p, parts);
        return;
      }
      // sqrt(a)^2 is not a: keep the root unless it stands alone
      if (p == 1 || p == -1)
        add_factor(parts, a, 0.5 * p);
      else
        add_factor(parts, e, p);
      return;
    }
  }
  if (auto b = e.as<Binary>()) {
    Expr l = wrap(b->lhs), r = wrap(b->rhs);
    const bool distribute = is_integer(p) || (positive(l) && positive(r));
    if ((b->op == BinaryOp::Mul || b->op == BinaryOp::Div) && distribute) {
      collect_product(l, p, parts);
      collect_product(r, b->op == BinaryOp::Mul ? p : -p, parts);
      return;
    }
    if (b->op == BinaryOp::Pow) {
      if (auto q = as_number(r)) {
        if (positive(l) || (is_integer(*q) && is_integer(p))) {
          collect_product(l, *q * p, parts);
          return;
        }
        if ((*q == 0.5 || *q == -0.5) && (p == 1 || p == -1)) {
          add_factor(parts, l, *q * p);
          return;
        }
      }
    }
  }
  add_factor(parts, e, p);
}

inline Expr rebuild_factor(const Factor& f) {
  if (f.exponent == 1.0) return f.base;
  if (f.exponent == 0.5) return unary(UnaryOp::Sqrt, f.base);
  return pow(f.base, lit(f.exponent));
}

inline Expr chain(BinaryOp op, const std::vector<Expr>& xs) {
  Expr acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = binary(op, acc, xs[i]);
  return acc;
}

/// Builds c * prod(factors) in canonical shape:
///   [c] * n1 * n2 ... / (d1 * d2 ...)
/// with the sign carried by the leading literal, or by an outer negation
/// when |c| == 1.
inline Expr rebuild_product(double c, std::vector<Factor> factors) {
  std::sort(factors.begin(), factors.end(),
            [](const Factor& a, const Factor& b) { return a.base < b.base; });
  std::vector<Expr> num, den;
  for (const auto& f : factors) {
    if (f.exponent == 0) {
      num.push_back(pow(f.base, lit(0)));  // only non-total bases survive to here
      continue;
    }
    if (f.exponent > 0)
      num.push_back(rebuild_factor(f));
    else
      den.push_back(rebuild_factor({f.base, -f.exponent}));
  }
  const double mag = std::fabs(c);
  const bool neg = c < 0;
  bool sign_used = false;
  if (mag != 1.0) {
    const double inv = 1.0 / mag;
    if (!is_integer(mag) && is_integer(inv) && 1.0 / inv == mag) {
      den.insert(den.begin(), lit(inv));
    } else {
      num.insert(num.begin(), neg ? lit(-mag) : lit(mag));
      sign_used = neg;
    }
  }
  Expr result = num.empty() ? lit(1) : chain(BinaryOp::Mul, num);
  if (!den.empty()) result = result / chain(BinaryOp::Mul, den);
  if (neg && !sign_used) result = -result;
  return result;
}

inline bool all_total(const std::vector<Factor>& fs) {
  for (const auto& f : fs) {
    if (!is_total(f.base)) return false;
    if (f.exponent < 0 && !nonzero(f.base)) return false;
    if (!is_integer(f.exponent) && !nonnegative(f.base)) return false;
  }
  return true;
}

inline Expr normalize_product(const Expr& e) {
  ProductParts parts;
  collect_product(e, 1.0, parts);
  std::erase_if(parts.factors, [](const Factor& f) { return f.exponent == 0 && is_total(f.base); });
  if (parts.zero) {
    if (all_total(parts.factors)) return lit(0);
    parts.factors.push_back({lit(0), 1.0});
  }
  if (!std::isfinite(parts.coefficient)) return e;
  if (parts.coefficient == 0 && all_total(parts.factors)) return lit(0);
  return rebuild_product(parts.coefficient, parts.factors);
}

/// Splits a (simplified) term into numeric coefficient and unit monomial.
inline std::pair<double, Expr> split_term(const Expr& e) {
  if (auto n = as_number(e)) return {*n, lit(1)};
  ProductParts parts;
  collect_product(e, 1.0, parts);
  if (parts.zero || !std::isfinite(parts.coefficient)) return {1.0, e};
  std::erase_if(parts.factors, [](const Factor& f) { return f.exponent == 0 && is_total(f.base); });
  if (parts.factors.empty()) return {parts.coefficient, lit(1)};
  return {parts.coefficient, rebuild_product(1.0, parts.factors)};
}

struct Term {
  double coefficient;
  Expr monomial;
};

inline void collect_sum(const Expr& e, double sign, std::vector<Term>& terms, double& constant) {
  if (auto b = e.as<Binary>(); b && (b->op == BinaryOp::Add || b->op == BinaryOp::Sub)) {
    collect_sum(wrap(b->lhs), sign, terms, constant);
    collect_sum(wrap(b->rhs), b->op == BinaryOp::Add ? sign : -sign, terms, constant);
    return;
  }
  if (auto u = e.as<Unary>(); u && u->op == UnaryOp::Neg) {
    collect_sum(wrap(u->arg), -sign, terms, constant);
    return;
  }
  if (auto n = as_number(e)) {
    constant += sign * *n;
    return;
  }
  // c·(A ± B)·rest spreads over the sum when every other factor is total and
  // nonzero where divided by, so no point of definition is gained or lost.
  {
    ProductParts parts;
    collect_product(e, 1.0, parts);
    auto is_sum = [](const Factor& f) {
      auto b = f.base.template as<Binary>();
      return f.exponent == 1.0 && b && (b->op == BinaryOp::Add || b->op == BinaryOp::Sub);
    };
    const auto sums = std::count_if(parts.factors.begin(), parts.factors.end(), is_sum);
    if (sums == 1 && !parts.zero && std::isfinite(parts.coefficient) && all_total(parts.factors)) {
      auto it = std::find_if(parts.factors.begin(), parts.factors.end(), is_sum);
      const Expr inner = it->base;
      parts.factors.erase(it);
      const Expr rest = rebuild_product(parts.coefficient, parts.factors);
      auto b = inner.as<Binary>();
      const double rsign = b->op == BinaryOp::Add ? sign : -sign;
      collect_sum(normalize_product(wrap(b->lhs) * rest), sign, terms, constant);
      collect_sum(normalize_product(wrap(b->rhs) * rest), rsign, terms, constant);
      return;
    }
  }
  auto [c, m] = split_term(e);
  if (is_number(m, 1.0)) {
    constant += sign * c;
    return;
  }
  if (is_total(m)) {
    for (auto& t : terms)
      if (t.monomial == m && is_total(t.monomial)) {
        t.coefficient += sign * c;
        return;
      }
  }
  terms.push_back({sign * c, m});
}

inline Expr term_expr(double c, const Expr& m) {
  // |c| * m, sign handled by caller
  if (c == 1.0) return m;
  return normalize_product(lit(c) * m);
}

inline Expr normalize_sum(const Expr& e) {
  std::vector<Term> terms;
  double constant = 0;
  collect_sum(e, 1.0, terms, constant);
  if (!std::isfinite(constant)) return e;
  std::erase_if(terms, [](const Term& t) { return t.coefficient == 0 && is_total(t.monomial); });
  std::stable_sort(terms.begin(), terms.end(),
                   [](const Term& a, const Term& b) { return a.monomial < b.monomial; });
  if (terms.empty()) return lit(constant);
  auto lead = std::find_if(terms.begin(), terms.end(), [](const Term& t) { return t.coefficient > 0; });
  if (lead != terms.end() && lead != terms.begin()) std::rotate(terms.begin(), lead, lead + 1);
  if (lead == terms.end() && constant > 0) {
    // c - t1 - t2 ... reads better than -t1 - t2 ... + c
    Expr acc = lit(constant);
    for (const auto& t : terms) acc = acc - term_expr(-t.coefficient, t.monomial);
    return acc;
  }
  Expr acc = terms.front().coefficient > 0
                 ? term_expr(terms.front().coefficient, terms.front().monomial)
                 : normalize_product(-term_expr(-terms.front().coefficient, terms.front().monomial));
  for (std::size_t i = 1; i < terms.size(); ++i) {
    const auto& t = terms[i];
    if (t.coefficient >= 0)
      acc = acc + term_expr(t.coefficient, t.monomial);
    else
      acc = acc - term_expr(-t.coefficient, t.monomial);
  }
  if (constant > 0) acc = acc + lit(constant);
  if (constant < 0) acc = acc - lit(-constant);
  return acc;
}

/// q such that e == q·π, for products of a number and π.
inline std::optional<double> pi_multiple(const Expr& e) {
  if (auto n = as_number(e); n && *n == 0) return 0.0;
  ProductParts parts;
  collect_product(e, 1.0, parts);
  if (parts.zero) return std::nullopt;
  if (parts.factors.size() != 1) return std::nullopt;
  const auto& f = parts.factors.front();
  auto c = f.base.as<ConstantNode>();
  if (!c || c->c != Constant::Pi || f.exponent != 1.0) return std::nullopt;
  return parts.coefficient;
}

/// Exact sin/cos at q·π for q a multiple of 1/6 (values 0, ±1/2, ±1).
inline std::optional<double> exact_trig(UnaryOp op, double q) {
  const double six = q * 6.0;
  if (!is_integer(six) || std::fabs(six) > 1e9) return std::nullopt;
  long long k = static_cast<long long>(six) % 12;
  if (k < 0) k += 12;
  // sin(k·π/6) for k = 0..11
  static constexpr double sin_table[12] = {0, 0.5, NAN, 1, NAN, 0.5, 0, -0.5, NAN, -1, NAN, -0.5};
  auto sin_at = [&](long long j) {
    j %= 12;
    if (j < 0) j += 12;
    return sin_table[j];
  };
  double v;
  if (op == UnaryOp::Sin) {
    v = sin_at(k);
  } else if (op == UnaryOp::Cos) {
    v = sin_at(k + 3);
  } else {
    double s = sin_at(k), c = sin_at(k + 3);
    if (std::isnan(s) || std::isnan(c) || c == 0) return std::nullopt;
    if (std::fabs(s) != std::fabs(c) && s != 0) return std::nullopt;
    v = s / c;
  }
  if (std::isnan(v)) return std::nullopt;
  return v;
}

inline Expr simplify_unary(UnaryOp op, const Expr& a) {
  auto n = as_number(a);
  switch (op) {
    case UnaryOp::Neg: return normalize_sum(-a);
    case UnaryOp::Abs:
      if (n) return lit(std::fabs(*n));
      if (auto u = a.as<Unary>(); u && u->op == UnaryOp::Neg) return unary(UnaryOp::Abs, wrap(u->arg));
      if (nonnegative(a)) return a;
      return unary(UnaryOp::Abs, a);
    case UnaryOp::Sqrt:
      if (n && *n >= 0) {
        double r = std::sqrt(*n);
        if (r * r == *n) return lit(r);
        return unary(UnaryOp::Sqrt, a);
      }
      if (n) return unary(UnaryOp::Sqrt, a);
      return normalize_product(unary(UnaryOp::Sqrt, a));
    case UnaryOp::Exp:
      if (n && *n == 0) return lit(1);
      if (n && *n == 1) return constant(Constant::E);
      if (auto u = a.as<Unary>(); u && u->op == UnaryOp::Ln && positive(wrap(u->arg)))
        return wrap(u->arg);
      return unary(UnaryOp::Exp, a);
    case UnaryOp::Ln:
      if (n && *n == 1) return lit(0);
      if (auto c = a.as<ConstantNode>(); c && c->c == Constant::E) return lit(1);
      if (auto u = a.as<Unary>(); u && u->op == UnaryOp::Exp) return wrap(u->arg);
      return unary(UnaryOp::Ln, a);
    case UnaryOp::Sin:
    case UnaryOp::Cos:
    case UnaryOp::Tan:
      if (auto q = pi_multiple(a))
        if (auto v = exact_trig(op, *q)) return lit(*v);
      return unary(op, a);
    case UnaryOp::Arctan:
      if (n && *n == 0) return lit(0);
      if (n && (*n == 1 || *n == -1))
        return *n > 0 ? constant(Constant::Pi) / lit(4) : -(constant(Constant::Pi) / lit(4));
      return unary(op, a);
  }
  return unary(op, a);
}

inline Expr simplify_pow(const Expr& a, const Expr& b) {
  auto na = as_number(a), nb = as_number(b);
  if (nb && *nb == 1) return a;
  if (nb && *nb == 0 && is_total(a) && nonzero(a)) return lit(1);
  if (auto c = a.as<ConstantNode>(); c && c->c == Constant::E) return simplify_unary(UnaryOp::Exp, b);
  if (na && nb) {
    if (is_integer(*nb) && std::fabs(*nb) <= 64 && !(*na == 0 && *nb < 0)) {
      double r = std::pow(*na, *nb);
      if (std::isfinite(r) && (r != 0 || *na == 0)) return lit(r);
    }
    return pow(a, b);
  }
  if (nb) return normalize_product(pow(a, b));
  return pow(a, b);
}

inline std::optional<bool> decide_guard(const Expr& l, Rel rel, const Expr& r) {
  auto a = as_number(l), b = as_number(r);
  if (!a || !b) return std::nullopt;
  switch (rel) {
    case Rel::Lt: return *a < *b;
    case Rel::Le: return *a <= *b;
    case Rel::Eq: return *a == *b;
    case Rel::Ge: return *a >= *b;
    case Rel::Gt: return *a > *b;
  }
  return std::nullopt;
}

inline Expr simplify_once(const Expr& e) {
  return std::visit(
      [&](const auto& x) -> Expr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Cycle>) {
          if (std::all_of(x.values.begin(), x.values.end(),
                          [&](double v) { return v == x.values.front(); }))
            return lit(x.values.front());
          return e;
        } else if constexpr (std::is_same_v<T, Unary>) {
          return simplify_unary(x.op, simplify_once(wrap(x.arg)));
        } else if constexpr (std::is_same_v<T, Binary>) {
          Expr a = simplify_once(wrap(x.lhs)), b = simplify_once(wrap(x.rhs));
          switch (x.op) {
            case BinaryOp::Add: return normalize_sum(a + b);
            case BinaryOp::Sub: return normalize_sum(a - b);
            case BinaryOp::Mul: return normalize_product(a * b);
            case BinaryOp::Div: return normalize_product(a / b);
            case BinaryOp::Pow: return simplify_pow(a, b);
          }
          return e;
        } else if constexpr (std::is_same_v<T, Piecewise>) {
          std::vector<BranchSpec> branches;
          for (const auto& br : x.branches) {
            Expr l = simplify_once(wrap(br.guard.lhs)), r = simplify_once(wrap(br.guard.rhs));
            Expr v = simplify_once(wrap(br.value));
            auto d = decide_guard(l, br.guard.rel, r);
            if (d && !*d) continue;
            if (d && *d) {
              if (branches.empty()) return v;
              return piecewise(branches, v);
            }
            branches.push_back({{l, br.guard.rel, r}, v});
          }
          std::optional<Expr> fb;
          if (x.fallback) fb = simplify_once(wrap(x.fallback));
          if (branches.empty()) {
            if (fb) return *fb;
            return lit(0) / lit(0);
          }
          return piecewise(branches, fb);
        } else {
          return e;
        }
      },
      e.node().v);
}

}  // namespace detail

/// Applies the rule list to a fixpoint. Idempotent and value-preserving
/// wherever the input is defined.
inline Expr simplify(const Expr& e) {
  Expr cur = detail::simplify_once(e);
  for (int i = 0; i < 8; ++i) {
    Expr next = detail::simplify_once(cur);
    if (next == cur) break;
    cur = next;
  }
  return cur;
}

}  // namespace vcalc
