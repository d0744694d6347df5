#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "vcalc.hpp"

using namespace vcalc;

namespace {
VirtualNumber num(const char* s) { return construct(parse(s)); }
VirtualSequence seq(const char* s) { return sequence_from(parse(s)); }
}  // namespace

TEST(Term, Examples) {
  VirtualSequence p = seq("k/∞");
  EXPECT_TRUE(end_equal(term(p, infinity()), lift(1)).holds());
  EXPECT_TRUE(end_equal(term(p, lift(1)), delta()).holds());
  EXPECT_TRUE(end_equal(term(constant_sequence(delta()), lift(7)), delta()).holds());
}

TEST(Term, RejectsNonNaturalIndex) {
  EXPECT_THROW(term(seq("k"), lift(0.5)), NotNatural);
  EXPECT_THROW(term(seq("k"), lift(0)), NotNatural);
  EXPECT_THROW(term(seq("k"), num("∞/2")), NotNatural);
  EXPECT_NO_THROW(term(seq("k"), num("2*∞")));
}

TEST(Construction, RejectsArgumentVariable) { EXPECT_THROW(seq("k*ξ"), std::invalid_argument); }

TEST(PartialSum, Examples) {
  EXPECT_TRUE(end_equal(infinite_sum(constant_sequence(delta())), lift(1)).holds());
  EXPECT_TRUE(end_equal(partial_sum(seq("k"), infinity()), num("∞*(∞+1)/2")).holds());
  EXPECT_TRUE(end_equal(infinite_sum(seq("∂^2")), delta()).holds());
}

TEST(PartialSum, ClosedFormMatchesBruteForce) {
  VirtualNumber s = partial_sum(seq("k"), infinity());
  for (Index n = 1; n <= 1000; ++n) {
    double direct = 0;
    for (Index k = 1; k <= n; ++k) direct += static_cast<double>(k);
    ASSERT_EQ(s.at(n).raw(), direct) << n;
  }
}

TEST(PartialSum, NonPolynomialSummandSumsDirectly) {
  VirtualNumber s = partial_sum(seq("1/k^2"), infinity());
  EXPECT_TRUE(s.is_rule());
  EXPECT_NEAR(reduce(s), M_PI * M_PI / 6, 1e-6);
  VirtualNumber h = partial_sum(rule_sequence([](Index, Index k) { return Value::finite(1.0 / static_cast<double>(k)); },
                                              "1/k"),
                                infinity());
  EXPECT_NEAR(h.at(4).raw(), 1 + 0.5 + 1.0 / 3 + 0.25, 1e-15);
}

TEST(PartialSum, Telescoping) {
  const std::vector<const char*> seqs{"k", "k^2/∞", "sin(k)/∞", "∂", "1/(k*(k+1))", "(-1)^k"};
  for (const char* s : seqs) {
    for (VirtualNumber kappa : {lift(2), lift(9), infinity(), num("∞+3"), num("2*∞")}) {
      VirtualNumber lhs = partial_sum(seq(s), kappa) - partial_sum(seq(s), kappa - lift(1));
      VirtualNumber rhs = term(seq(s), kappa);
      for (Index n : {1, 2, 7, 30, 500}) {
        const double a = lhs.at(n).raw(), b = rhs.at(n).raw();
        EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::fabs(partial_sum(seq(s), kappa).at(n).raw())))
            << s << " κ=" << kappa.to_string() << " n=" << n;
      }
    }
  }
}

TEST(FinePartition, Examples) {
  VirtualSequence p = fine_partition(0, 1);
  ASSERT_TRUE(p.expr());
  EXPECT_EQ(*p.expr(), simplify(parse("k/∞")));
  EXPECT_TRUE(end_equal(term(p, infinity()), lift(1)).holds());
  EXPECT_TRUE(near(term(p, lift(1)), lift(0)).holds());
  EXPECT_TRUE(is_fine_partition(p, 0, 1).holds());
  EXPECT_THROW(fine_partition(1, 1), std::invalid_argument);
  EXPECT_THROW(fine_partition(2, 1), std::invalid_argument);
}

TEST(FinePartition, Rejections) {
  EXPECT_TRUE(is_fine_partition(seq("k/sqrt(∞)"), 0, 1).fails());
  EXPECT_TRUE(is_fine_partition(seq("0"), 0, 1).fails());
  EXPECT_TRUE(is_fine_partition(seq("(k/∞)^2"), 0, 1).holds());
  // Uneven but still fine: the widest step, (√2 − 1)/√n, is infinitesimal.
  EXPECT_TRUE(is_fine_partition(seq("sqrt(k/∞)"), 0, 1).holds());
}

TEST(FinePartition, MeshIsExactlyScaledDelta) {
  for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{-2.0, 3.0}, std::pair{0.5, 0.75}}) {
    VirtualSequence p = fine_partition(a, b);
    VirtualNumber step = term(p, infinity() + lift(1)) - term(p, infinity());
    ASSERT_TRUE(step.expr());
    EXPECT_EQ(simplify(*step.expr() - *(lift(b - a) * delta()).expr()), lit(0))
        << render(*step.expr()) << " for [" << a << ", " << b << "]";
  }
}

TEST(Riemann, Examples) {
  VirtualNumber sq = riemann_sum_integral(parse("ξ^2"), 0, 1);
  EXPECT_TRUE(end_equal(sq, num("(∞+1)*(2*∞+1)/(6*∞^2)")).holds());
  EXPECT_NEAR(reduce(sq), 1.0 / 3, 1e-5);
  VirtualNumber one = riemann_sum_integral(parse("1"), 0, 1);
  for (Index n : {1, 2, 3, 100}) EXPECT_NEAR(one.at(n).raw(), 1.0, 1e-15);
  VirtualNumber id = riemann_sum_integral(parse("ξ"), 0, 1);
  EXPECT_TRUE(end_equal(id, num("(∞+1)/(2*∞)")).holds());
  EXPECT_NEAR(reduce(id), 0.5, 1e-8);
}

TEST(Riemann, TagsAgreeInTheLimit) {
  for (Tag t : {Tag::Left, Tag::Mid, Tag::Right})
    EXPECT_NEAR(reduce(riemann_sum_integral(parse("e^ξ"), 0, 1, t)), std::exp(1.0) - 1, 1e-6) << to_string(t);
  EXPECT_NEAR(riemann_sum_integral(parse("ξ"), 0, 1, Tag::Left).at(4).raw(), 6.0 / 16, 1e-15);
  EXPECT_NEAR(riemann_sum_integral(parse("ξ"), 0, 1, Tag::Mid).at(4).raw(), 0.5, 1e-15);
}

TEST(Riemann, UndefinedAtGridPointThrows) {
  EXPECT_THROW(riemann_sum_integral(parse("1/ξ"), -1, 1, Tag::Left), std::domain_error);
  EXPECT_THROW(riemann_sum_integral(parse("∞*ξ"), 0, 1), std::invalid_argument);
}

TEST(Riemann, ConsistentWithIntegralModule) {
  for (auto [f, a, b] : {std::tuple{"ξ^2", 0.0, 1.0}, std::tuple{"sin(ξ)", 0.0, M_PI}, std::tuple{"e^ξ", -1.0, 1.0},
                         std::tuple{"1/(1+ξ^2)", -2.0, 2.0}, std::tuple{"|ξ|", -1.0, 2.0}}) {
    const double r = reduce(riemann_sum_integral(parse(f), a, b));
    const double q = reduce_integral(lift_function(parse(f)), lift(a), lift(b));
    EXPECT_NEAR(r, q, 1e-5) << f;
  }
}
