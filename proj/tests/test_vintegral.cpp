#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "vcalc.hpp"

using namespace vcalc;

namespace {
VirtualNumber num(const char* s) { return construct(parse(s)); }
VirtualFunction fn(const char* s) { return from_expr(parse(s)); }

void expect_per_index(const VirtualNumber& got, const VirtualNumber& want, double tol) {
  for (Index n : SamplingSchedule{}.indices()) {
    Value g = got.at(n), w = want.at(n);
    ASSERT_TRUE(g.real() && w.real()) << "n=" << n;
    EXPECT_NEAR(*g.real(), *w.real(), tol * std::max(1.0, std::fabs(*w.real()))) << "n=" << n;
  }
}
}  // namespace

TEST(Integrable, Examples) {
  EXPECT_TRUE(integrable_between(corpus::psi(), lift(0), delta()).holds());
  EXPECT_TRUE(integrable_between(corpus::chi(), lift(-1), lift(1)).holds());
  EXPECT_TRUE(integrable_between(lift_function(parse("1/ξ")), lift(-1), lift(1)).fails());
}

TEST(Integrate, WorkedIntegrals) {
  expect_per_index(integrate(corpus::psi(), lift(0), delta()), lift(M_PI / 4), 1e-12);
  expect_per_index(integrate(fn("ξ^(-2)"), lift(1), infinity()), lift(1) - delta(), 1e-12);
  expect_per_index(integrate(fn("ξ^(-1/2)"), delta(), lift(1)), num("2-2*sqrt(∂)"), 1e-12);
}

TEST(Integrate, QuadratureAgreesWithSymbolicPath) {
  QuadratureConfig q;
  q.force_numeric = true;
  expect_per_index(integrate(corpus::psi(), lift(0), delta(), q), lift(M_PI / 4), 1e-9);
  expect_per_index(integrate(fn("ξ^(-2)"), lift(1), infinity(), q), lift(1) - delta(), 1e-9);
  expect_per_index(integrate(fn("ξ^(-1/2)"), delta(), lift(1), q), num("2-2*sqrt(∂)"), 1e-9);
}

TEST(Integrate, PiecewiseChiHasUnitMass) {
  expect_per_index(integrate(corpus::chi(), lift(-1), lift(1)), lift(1), 1e-9);
}

TEST(Integrate, DegenerateInterval) {
  EXPECT_TRUE(end_equal(integrate(corpus::psi(), delta(), delta()), lift(0)).holds());
  EXPECT_THROW(integrate(lift_function(parse("1/ξ")), lift(0), lift(0)), NotDefined);
}

TEST(Integrate, NotIntegrableThrows) {
  EXPECT_THROW(integrate(lift_function(parse("1/ξ")), lift(-1), lift(1)), NotIntegrable);
}

TEST(ReduceIntegral, Examples) {
  EXPECT_NEAR(reduce_integral(fn("ξ^(-2)"), lift(1), infinity()), 1.0, 1e-8);
  EXPECT_NEAR(reduce_integral(fn("ξ^(-1/2)"), delta(), lift(1)), 2.0, 1e-8);
  EXPECT_NEAR(reduce_integral(corpus::psi(), lift(0), delta()), M_PI / 4, 1e-8);
  EXPECT_THROW(reduce_integral(fn("1"), lift(0), infinity()), NotReducible);
}

TEST(ReduceIntegral, ReducedDiffersFromVirtual) {
  VirtualNumber v = integrate(fn("ξ^(-2)"), lift(1), infinity());
  EXPECT_NEAR(reduce(v), 1.0, 1e-8);
  EXPECT_TRUE(end_equal(v, lift(1)).fails());
}

TEST(ReduceIntegral, RealAgreement) {
  QuadratureConfig numeric;
  numeric.force_numeric = true;
  const std::vector<std::tuple<const char*, double, double, double>> cases = {
      {"e^ξ", 0, 1, std::exp(1.0) - 1},
      {"1/(1+ξ^2)", -1, 1, M_PI / 2},
      {"sin(ξ)^2", 0, M_PI, M_PI / 2},
      {"sqrt(ξ)", 0, 4, 16.0 / 3},
  };
  for (const auto& [f, a, b, exact] : cases) {
    EXPECT_NEAR(reduce_integral(lift_function(parse(f)), lift(a), lift(b)), exact, 1e-9) << f;
    EXPECT_NEAR(reduce_integral(lift_function(parse(f)), lift(a), lift(b), numeric), exact, 1e-9) << f;
  }
}

TEST(Antiderivative, Examples) {
  EXPECT_EQ(antiderivative(corpus::psi()).to_string(), "arctan(∞ * ξ) + κ");
  EXPECT_EQ(antiderivative(fn("cos(ξ)")).to_string(), "sin(ξ) + κ");
  Primitive p = antiderivative(fn("ξ^∞"));
  EXPECT_TRUE(function_equal(p.particular, fn("ξ^(∞+1)/(∞+1)")).holds());
  EXPECT_TRUE(primitive_check(p.particular, fn("ξ^∞")).holds());
  EXPECT_THROW(antiderivative(fn("e^(ξ^2)")), Unsupported);
}

TEST(Antiderivative, PrimitiveOfRandomCorpusDifferentiatesBack) {
  for (const char* s : {"3*ξ^2 - ∂", "e^(∞*ξ)", "sin(2*ξ + ∂)", "1/(1 + (∞*ξ - 1)^2)", "ξ^(-3)", "cos(ξ/∞)"}) {
    Primitive p = antiderivative(fn(s));
    EXPECT_TRUE(primitive_check(p.particular, fn(s)).holds()) << s << " → " << p.to_string();
  }
}

TEST(PrimitiveCheck, Examples) {
  EXPECT_TRUE(primitive_check(fn("arctan(∞*ξ)"), corpus::psi()).holds());
  EXPECT_TRUE(primitive_check(fn("arctan(∞*ξ) + ∞^2"), corpus::psi()).holds());
  EXPECT_TRUE(primitive_check(fn("sin(ξ)"), fn("cos(2*ξ)")).fails());
}

TEST(Ftc, FormTwo) {
  FtcReport r = ftc_form2(corpus::psi(), lift(0), delta());
  EXPECT_TRUE(r.verdict.holds());
  EXPECT_NEAR(reduce(r.rhs), M_PI / 4, 1e-12);
  EXPECT_TRUE(ftc_check(lift_function(parse("cos(ξ)")), lift(0), lift(M_PI / 2), 2).holds());
  EXPECT_THROW(ftc_form2(fn("e^(ξ^2)"), lift(0), lift(1)), Unsupported);
}

TEST(Ftc, FormOneExponentialExample) {
  FtcReport r = ftc_form1(fn("e^(∂*ξ)"), num("-∞^2"), parse("∞^ξ"), lift(1));
  EXPECT_TRUE(r.verdict.holds());
  VirtualNumber expected = num("e^(∞^(1-1)) * ∞^1 * ln(∞)");
  for (Index n : {4, 8, 16}) {
    const double want = expected.at(n).raw();
    EXPECT_NEAR(r.lhs.at(n).raw(), want, 1e-5 * std::fabs(want)) << n;
  }
}

TEST(Ftc, FormOneOnQuadratureFamily) {
  // No primitive exists, so the accumulated integral is a quadrature family.
  EXPECT_TRUE(ftc_check(fn("e^(-ξ^2) + ∂"), lift(0), lift(0.7), 1).holds());
}

TEST(Properties, AdditivityAndOrientation) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  auto fs = corpus::functions();
  std::vector<VirtualNumber> pts{delta(), num("1-∂"), num("-sqrt(∂)")};
  for (int i = 0; i < 50; ++i) {
    const auto& [name, e] = fs[static_cast<std::size_t>(i) % fs.size()];
    VirtualFunction f = from_expr(e);
    VirtualNumber a = i % 3 ? lift(u(rng)) : pts[static_cast<std::size_t>(i) % 3], b = lift(u(rng)), c = lift(u(rng));
    if (defined_at(f, a).fails() || defined_at(f, b).fails() || defined_at(f, c).fails()) continue;
    if (!integrable_between(f, lift(-3), lift(3)).holds()) continue;
    VirtualNumber ac = integrate(f, a, c), ab = integrate(f, a, b), bc = integrate(f, b, c);
    VirtualNumber ca = integrate(f, c, a);
    for (Index n : {1, 2, 5, 17, 64}) {
      const double vac = ac.at(n).raw(), sum = ab.at(n).raw() + bc.at(n).raw();
      const double scale = std::max({std::fabs(vac), std::fabs(ab.at(n).raw()) + std::fabs(bc.at(n).raw()), 1.0});
      EXPECT_NEAR(vac, sum, 1e-8 * scale) << name << " n=" << n;
      EXPECT_EQ(ca.at(n).raw(), -vac) << name << " n=" << n;
    }
  }
}

TEST(Properties, SumAndProductClosure) {
  for (auto [f, g] : {std::pair{"sin(∞*ξ)", "1/(1+ξ^2)"}, std::pair{"|ξ - ∂|", "ξ^3"}}) {
    ASSERT_TRUE(integrable_between(fn(f), lift(-1), lift(2)).holds());
    ASSERT_TRUE(integrable_between(fn(g), lift(-1), lift(2)).holds());
    EXPECT_TRUE(integrable_between(pointwise_algebra(BinaryOp::Add, fn(f), fn(g)), lift(-1), lift(2)).holds());
    EXPECT_TRUE(integrable_between(pointwise_algebra(BinaryOp::Mul, fn(f), fn(g)), lift(-1), lift(2)).holds());
  }
}

TEST(Quadrature, ConfigValidation) {
  QuadratureConfig q;
  q.abs_tol = 0;
  EXPECT_THROW(integrate(corpus::psi(), lift(0), lift(1), q), std::invalid_argument);
  q = {};
  q.max_depth = 5;
  EXPECT_THROW(q.validate(), std::invalid_argument);
}
