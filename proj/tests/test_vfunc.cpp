#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "vcalc.hpp"

using namespace vcalc;

namespace {
VirtualNumber num(const char* s) { return construct(parse(s)); }
VirtualFunction fn(const char* s) { return from_expr(parse(s)); }
}  // namespace

TEST(Lift, ReproducesRealEvaluation) {
  EXPECT_TRUE(end_equal(evaluate(lift_function(parse("sin(ξ)")), lift(0)), lift(0)).holds());
  EXPECT_TRUE(defined_at(lift_function(parse("1/ξ")), lift(0)).fails());
  EXPECT_TRUE(is_continuous(lift_function(parse("arctan(ξ)"))).holds());
  EXPECT_THROW(lift_function(parse("ξ + ∞")), std::invalid_argument);
}

TEST(DefinedAt, Examples) {
  EXPECT_TRUE(defined_at(corpus::phi(), num("∞/2")).fails());
  for (double x : {-3.0, 0.0, 0.5, 100.0}) EXPECT_TRUE(defined_at(corpus::psi(), lift(x)).holds()) << x;
  EXPECT_TRUE(defined_at(empty_function(), lift(1)).fails());
}

TEST(Evaluate, Examples) {
  VirtualNumber phi0 = evaluate(corpus::phi(), lift(0));
  ASSERT_TRUE(phi0.expr());
  EXPECT_EQ(*phi0.expr(), simplify(parse("e^(-∞^2)")));
  EXPECT_TRUE(end_equal(evaluate(corpus::phi(), infinity()), lift(-1)).holds());
  EXPECT_TRUE(end_equal(evaluate(corpus::psi(), num("sqrt(∂)")), num("∞/(1+∞)")).holds());
  EXPECT_THROW(evaluate(corpus::phi(), num("∞/2")), NotDefined);
}

TEST(Compose, Examples) {
  EXPECT_TRUE(function_equal(compose(corpus::psi(), identity_function()), corpus::psi()).holds());
  EXPECT_TRUE(defined_at(compose(lift_function(parse("e^ξ")), lift_function(parse("ln(ξ)"))), lift(-1)).fails());
  EXPECT_TRUE(is_continuous(compose(corpus::psi(), fn("sin(ξ)"))).holds());
}

TEST(PointwiseAlgebra, Examples) {
  auto s = pointwise_algebra(BinaryOp::Add, lift_function(parse("sin(ξ)")), lift_function(parse("cos(ξ)")));
  EXPECT_TRUE(end_equal(evaluate(s, lift(0)), lift(1)).holds());
  auto kk = pointwise_algebra(BinaryOp::Add, corpus::kappa(), corpus::kappa());
  EXPECT_TRUE(end_equal(evaluate(kk, lift(5)), num("2*∞")).holds());
  EXPECT_TRUE(is_continuous(pointwise_algebra(BinaryOp::Mul, corpus::psi(), fn("arctan(ξ)"))).holds());
}

TEST(Invert, Examples) {
  VirtualFunction ln = invert(lift_function(parse("e^ξ")), lift(-3), lift(3));
  for (double y : {0.1, 1.0, 7.5, 19.0}) EXPECT_NEAR(ln.at(5, y).raw(), std::log(y), 1e-10);
  VirtualFunction inv = invert(fn("ξ*∞"), lift(0), lift(1));
  VirtualNumber half = evaluate(inv, lift(0.5));
  for (Index n : {1, 2, 10, 1000}) EXPECT_NEAR(half.at(n).raw(), 0.5 / static_cast<double>(n), 1e-12);
  EXPECT_THROW(invert(fn("ξ^2"), lift(-1), lift(1)), std::invalid_argument);
}

TEST(Invert, RoundTripsThroughFamily) {
  VirtualFunction f = fn("ξ^3 + ∂*ξ");
  VirtualFunction g = invert(f, lift(-2), lift(2));
  for (double x : {-1.5, -0.2, 0.0, 0.7, 1.9})
    EXPECT_TRUE(end_equal(evaluate(g, evaluate(f, lift(x))), lift(x)).outcome != Outcome::Fails) << x;
  for (Index n : {1, 3, 50})
    for (double x : {-1.5, 0.3, 1.9}) EXPECT_NEAR(g.at(n, f.at(n, x).raw()).raw(), x, 1e-10);
}

TEST(IsConstant, Examples) {
  EXPECT_TRUE(is_constant(corpus::kappa()).holds());
  EXPECT_TRUE(is_constant(identity_function()).fails());
  EXPECT_TRUE(is_constant(rule_family([](Index n, double) { return Value::finite(static_cast<double>(n)); }, "n")).holds());
}

TEST(Continuity, Examples) {
  EXPECT_TRUE(continuous_at(corpus::chi(), delta()).fails());
  EXPECT_TRUE(continuous_at(corpus::chi(), lift(0)).holds());
  EXPECT_TRUE(continuous_at(corpus::psi(), lift(0)).holds());
  EXPECT_TRUE(is_continuous(corpus::psi()).holds());
  EXPECT_TRUE(is_continuous(corpus::phi()).holds());
  EXPECT_TRUE(is_continuous(corpus::chi()).fails());
}

TEST(Continuity, NonInvariantWitness) {
  EXPECT_TRUE(near(num("sqrt(∂)"), lift(0)).holds());
  EXPECT_TRUE(near(evaluate(corpus::psi(), num("sqrt(∂)")), evaluate(corpus::psi(), lift(0))).fails());
}

TEST(Derivative, Examples) {
  auto d = derivative(fn("∂*ξ^∞ + ∞^2"));
  EXPECT_EQ(*d.expr(), simplify(parse("ξ^(∞-1)")));
  EXPECT_TRUE(function_equal(derivative(corpus::kappa()), fn("0")).holds());
  EXPECT_TRUE(function_equal(derivative(corpus::psi()), fn("-2*∞^3*ξ/(1+∞^2*ξ^2)^2")).holds());
}

TEST(Derivative, DifferenceQuotientGap) {
  VirtualFunction psi = corpus::psi();
  VirtualNumber q = (evaluate(psi, delta()) - evaluate(psi, lift(0))) / delta();
  EXPECT_TRUE(end_equal(q, num("-∞^2/2")).holds());
  EXPECT_TRUE(end_equal(evaluate(derivative(psi), lift(0)), lift(0)).holds());
  EXPECT_TRUE(end_equal(evaluate(derivative(corpus::phi()), lift(0)), lift(0)).holds());
}

TEST(Derivative, RuleFamilyUsesCentralDifferences) {
  auto f = rule_family([](Index n, double x) { return Value::finite(std::sin(static_cast<double>(n) * x)); }, "sin nx");
  auto d = derivative(f);
  for (Index n : {1, 3})
    for (double x : {-0.4, 0.0, 1.1}) EXPECT_NEAR(d.at(n, x).raw(), static_cast<double>(n) * std::cos(n * x), 1e-5);
}

TEST(Differentiability, Examples) {
  EXPECT_EQ(differentiability_status(corpus::phi(), lift(0)).summary(), "differentiable");
  EXPECT_EQ(differentiability_status(corpus::chi(), delta()).summary(), "not derivable");
  EXPECT_EQ(differentiability_status(lift_function(parse("|ξ|")), lift(0)).summary(), "not derivable");
  EXPECT_EQ(differentiability_status(fn("ξ^2"), lift(3)).summary(), "differentiable");
}

TEST(FunctionEqual, Examples) {
  VirtualFunction alternating = interleave({identity_function(), empty_function()});
  EXPECT_TRUE(function_equal(alternating, empty_function()).holds());
  EXPECT_TRUE(function_equal(corpus::psi(), pointwise_algebra(BinaryOp::Add, corpus::psi(), fn("0"))).holds());
  EXPECT_TRUE(function_equal(corpus::psi(), corpus::chi()).fails());
}

// Any virtual function takes interleaved values at an interleaved argument,
// so no family maps ±2 to 0 while mapping 2 and −2 to 1.
TEST(Interleaving, PeriodicArgumentGivesInterleavedValues) {
  for (const auto& [name, e] : corpus::functions()) {
    VirtualFunction f = from_expr(e);
    for (auto [a, b] : {std::pair{0.3, -1.2}, std::pair{2.0, -2.0}, std::pair{0.0, 1.5}}) {
      if (!defined_at(f, lift(a)).holds() || !defined_at(f, lift(b)).holds()) continue;
      VirtualNumber v = evaluate(f, periodic({a, b}));
      for (Index n = 1; n <= 40; ++n) {
        Value want = f.at(n, n % 2 ? a : b), got = v.at(n);
        EXPECT_EQ(got, want) << name << " n=" << n;
      }
    }
  }
}
