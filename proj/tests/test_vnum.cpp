#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "corpus.hpp"
#include "vcalc.hpp"

using namespace vcalc;

namespace {
VirtualNumber num(const char* s) { return construct(parse(s)); }
}  // namespace

TEST(Construct, NamedConstants) {
  EXPECT_DOUBLE_EQ(infinity().at(37).raw(), 37.0);
  EXPECT_DOUBLE_EQ(delta().at(4).raw(), 0.25);
  EXPECT_EQ(*delta().expr(), simplify(*(lift(1) / infinity()).expr()));
  EXPECT_EQ(lift(2).period(), Index{1});
}

TEST(Construct, PeriodicPlusMinusTwo) {
  VirtualNumber pm = periodic({-2, 2});
  EXPECT_DOUBLE_EQ(pm.at(1).raw(), -2.0);
  EXPECT_DOUBLE_EQ(pm.at(2).raw(), 2.0);
  EXPECT_DOUBLE_EQ(pm.at(3).raw(), -2.0);
  EXPECT_THROW(periodic({}), std::invalid_argument);
}

TEST(Construct, RejectsArgumentVariable) { EXPECT_THROW(construct(parse("ξ + ∞")), std::invalid_argument); }

TEST(Arith, IndexWise) {
  EXPECT_TRUE(end_equal(delta() * infinity(), lift(1)).holds());
  EXPECT_DOUBLE_EQ((lift(1) - delta()).at(5).raw(), 0.8);
  EXPECT_DOUBLE_EQ(pow(infinity(), lift(2)).at(9).raw(), 81.0);
}

TEST(Arith, RuleOperandGivesRule) {
  VirtualNumber r = rule([](Index n) { return Value::finite(std::sin(static_cast<double>(n))); }, "sin n");
  VirtualNumber s = r + infinity();
  EXPECT_TRUE(s.is_rule());
  EXPECT_DOUBLE_EQ(s.at(3).raw(), std::sin(3.0) + 3.0);
}

TEST(EndEqual, Examples) {
  EXPECT_TRUE(end_equal(delta() * infinity(), lift(1)).holds());
  EXPECT_TRUE(end_equal(periodic({-2, 2}), lift(2)).fails());
  VirtualNumber sinc = rule([](Index n) { return Value::finite(std::sin(static_cast<double>(n)) / static_cast<double>(n)); },
                            "sin n / n");
  EXPECT_TRUE(end_equal(lift(0), sinc).fails());
}

TEST(EndCompare, Examples) {
  Comparison a = end_compare(delta(), lift(0.001));
  EXPECT_TRUE(a.lt.holds());
  ASSERT_TRUE(a.lt.witness);
  EXPECT_EQ(*a.lt.witness, 1001u);
  EXPECT_TRUE(end_compare(lift(0), delta()).lt.holds());
  Comparison pm = end_compare(periodic({-2, 2}), lift(0));
  EXPECT_TRUE(pm.lt.fails());
  EXPECT_TRUE(pm.gt.fails());
}

TEST(Near, Examples) {
  EXPECT_TRUE(near(num("sqrt(∂)"), lift(0)).holds());
  EXPECT_TRUE(near(lift(1) - delta(), lift(1)).holds());
  VirtualFunction psi = corpus::psi();
  EXPECT_TRUE(near(evaluate(psi, num("sqrt(∂)")), evaluate(psi, lift(0))).fails());
}

TEST(Adjacent, Examples) {
  EXPECT_TRUE(adjacent(delta(), lift(0)).holds());
  EXPECT_TRUE(adjacent(lift(1), lift(1)).fails());
  EXPECT_TRUE(adjacent(infinity(), lift(0)).fails());
}

TEST(Reduce, Examples) {
  EXPECT_NEAR(reduce(lift(1) - delta()), 1.0, 1e-8);
  try {
    reduce(infinity());
    FAIL();
  } catch (const NotReducible& e) {
    EXPECT_STREQ(e.what(), "not reducible: diverges to +∞");
    EXPECT_TRUE(e.result().diverged());
  }
  try {
    reduce(periodic({-2, 2}));
    FAIL();
  } catch (const NotReducible& e) {
    EXPECT_TRUE(e.result().no_limit());
  }
}

TEST(Reduce, LiftedRealsExactly) {
  for (double r : {0.0, -3.5, 1e-300, 7.25, 1e300, M_PI}) EXPECT_EQ(reduce(lift(r)), r);
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify(delta()), Magnitude::Infinitesimal);
  EXPECT_EQ(classify(num("∞^2")), Magnitude::Infinite);
  EXPECT_EQ(classify(num("2+∂")), Magnitude::FiniteAppreciable);
  EXPECT_EQ(classify(periodic({-2, 2})), Magnitude::FiniteAppreciable);
}

TEST(Properties, EmbeddingHomomorphism) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 200; ++i) {
    const double r = u(rng), s = u(rng);
    EXPECT_TRUE(end_equal(lift(r) + lift(s), lift(r + s)).holds());
    EXPECT_TRUE(end_equal(lift(r) - lift(s), lift(r - s)).holds());
    EXPECT_TRUE(end_equal(lift(r) * lift(s), lift(r * s)).holds());
    if (s != 0) {
      EXPECT_TRUE(end_equal(lift(r) / lift(s), lift(r / s)).holds());
    }
    if (r > 0) {
      EXPECT_TRUE(end_equal(pow(lift(r), lift(s / 10)), lift(std::pow(r, s / 10))).holds());
    }
  }
}

TEST(Properties, EndEqualReflexiveSymmetric) {
  auto ns = corpus::numbers();
  for (const auto& [a, x] : ns) {
    EXPECT_TRUE(end_equal(x, x).holds()) << a;
    for (const auto& [b, y] : ns) EXPECT_EQ(end_equal(x, y).outcome, end_equal(y, x).outcome) << a << " vs " << b;
  }
}

TEST(Properties, NearEquivalenceOnConvergentCorpus) {
  std::vector<VirtualNumber> xs{lift(0), delta(), num("sqrt(∂)"), lift(1), lift(1) - delta(), num("1+∂^2"),
                                num("cos(∞)/∞")};
  for (const auto& a : xs) {
    EXPECT_TRUE(near(a, a).holds());
    for (const auto& b : xs) {
      Verdict ab = near(a, b);
      EXPECT_EQ(ab.outcome, near(b, a).outcome);
      for (const auto& c : xs)
        if (ab.holds() && near(b, c).holds()) {
          EXPECT_TRUE(near(a, c).holds());
        }
    }
  }
}

TEST(Properties, AdjacentImpliesNearAndDistinct) {
  auto ns = corpus::numbers();
  for (const auto& [a, x] : ns)
    for (const auto& [b, y] : ns)
      if (adjacent(x, y).holds()) {
        EXPECT_TRUE(near(x, y).holds()) << a << " ~ " << b;
        EXPECT_TRUE(end_equal(x, y).fails()) << a << " ~ " << b;
      }
}
