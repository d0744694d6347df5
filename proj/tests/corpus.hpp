#pragma once

// Shared fixtures: the named example families, a seeded random expression
// generator, and a relation corpus for oracle checks.

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vcalc.hpp"

namespace corpus {

using namespace vcalc;

inline Expr phi_expr() { return parse("e^(ξ^2-∞^2)/cos(π*∂*ξ)"); }
inline Expr psi_expr() { return parse("∞/(1+∞^2*ξ^2)"); }
inline Expr chi_expr() { return parse("piecewise(|ξ| < 1/ν : ν/2 ; default : 0)"); }

inline VirtualFunction phi() { return from_expr(phi_expr()); }
inline VirtualFunction psi() { return from_expr(psi_expr()); }
inline VirtualFunction chi() { return from_expr(chi_expr()); }
inline VirtualFunction kappa() { return from_expr(parse("∞")); }

/// Families used for interleaving and integration properties. All are
/// defined on [-3, 3] for every index except where noted.
inline std::vector<std::pair<std::string, Expr>> functions() {
  return {
      {"phi", phi_expr()},
      {"psi", psi_expr()},
      {"chi", chi_expr()},
      {"kappa", parse("∞")},
      {"poly", parse("ξ^3 - 2*ξ + ∂")},
      {"wave", parse("sin(∞*ξ)")},
      {"bump", parse("1/(1+ξ^2)")},
      {"steep", parse("arctan(∞*ξ)")},
      {"kink", parse("|ξ - ∂|")},
      {"growth", parse("e^(ξ/∞) + ξ^2")},
      {"root", parse("sqrt(ξ^2 + ∂)")},
  };
}

/// Random smooth expression trees over ξ and ν.
class ExprGen {
public:
  explicit ExprGen(unsigned seed) : rng_(seed) {}

  Expr operator()(int depth = 3) { return gen(depth); }

  std::mt19937& rng() { return rng_; }

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

private:
  Expr leaf() {
    switch (pick(5)) {
      case 0:
      case 1: return arg_var();
      case 2: return lit(static_cast<double>(1 + pick(4)));
      case 3: return index_var() * arg_var();
      default: return arg_var() / index_var();
    }
  }

  Expr gen(int depth) {
    if (depth <= 0) return leaf();
    switch (pick(10)) {
      case 0: return gen(depth - 1) + gen(depth - 1);
      case 1: return gen(depth - 1) - gen(depth - 1);
      case 2:
      case 3: return gen(depth - 1) * gen(depth - 1);
      case 4: {
        Expr d = gen(depth - 1);
        return gen(depth - 1) / (lit(1) + d * d);
      }
      case 5: return unary(UnaryOp::Sin, gen(depth - 1));
      case 6: return unary(UnaryOp::Cos, gen(depth - 1));
      case 7: return unary(UnaryOp::Arctan, gen(depth - 1));
      case 8: return pow(gen(depth - 1), lit(static_cast<double>(2 + pick(2))));
      default: return unary(UnaryOp::Exp, unary(UnaryOp::Sin, gen(depth - 1)));
    }
  }

  std::mt19937 rng_;
};

/// Virtual numbers for relation soundness checks.
inline std::vector<std::pair<std::string, VirtualNumber>> numbers() {
  auto c = [](const char* s) { return construct(parse(s)); };
  return {
      {"2", lift(2)},
      {"∞", infinity()},
      {"∂", delta()},
      {"[-2,2]", periodic({-2, 2})},
      {"[1,2,3]", periodic({1, 2, 3})},
      {"sin ∞", c("sin(∞)")},
      {"∞-100", c("∞-100")},
      {"1+∂", c("1+∂")},
      {"1000-∞", c("1000-∞")},
      {"sqrt ∞", c("sqrt(∞)")},
      {"ln ∞", c("ln(∞)")},
      {"∞ mod-ish", c("∞ - 3*arctan(∞)")},
      {"cos ∞ / ∞", c("cos(∞)/∞")},
      {"(∞-20)^2", c("(∞-20)^2")},
      {"0", lift(0)},
  };
}

}  // namespace corpus
