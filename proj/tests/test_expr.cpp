#include <gtest/gtest.h>

#include <cmath>

#include "corpus.hpp"
#include "vcalc.hpp"

using namespace vcalc;

namespace {

double at(const Expr& e, Index n, double x) {
  Value v = evaluate_at(e, Bindings::at(n, x));
  EXPECT_TRUE(v.is_finite()) << render(e) << " at n=" << n << " x=" << x;
  return v.raw();
}

}  // namespace

// ---- parser ----------------------------------------------------------------

TEST(Parse, GreekAndAsciiAliasesAgree) {
  EXPECT_EQ(parse("∞^2 + ∂*ξ"), parse("inf^2 + del*xi"));
  EXPECT_EQ(parse("ν"), parse("∞"));
  EXPECT_EQ(parse("τ"), parse("ξ"));
  EXPECT_EQ(parse("π"), parse("pi"));
}

TEST(Parse, DeltaIsReciprocalOfInfinity) { EXPECT_EQ(parse("∂"), parse("1/∞")); }

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(at(parse("2^3^2"), 1, 0), 512.0);
  EXPECT_DOUBLE_EQ(at(parse("-2^2"), 1, 0), -4.0);
  EXPECT_DOUBLE_EQ(at(parse("8/4/2"), 1, 0), 1.0);
  EXPECT_DOUBLE_EQ(at(parse("1 - 2 - 3"), 1, 0), -4.0);
}

TEST(Parse, AbsoluteValueBars) { EXPECT_DOUBLE_EQ(at(parse("|ξ - 3|"), 1, 1), 2.0); }

TEST(Parse, BracketsAreCycles) {
  EXPECT_EQ(parse("[-2, 2]"), parse("cycle(-2, 2)"));
  EXPECT_DOUBLE_EQ(at(parse("[-2,2]"), 1, 0), -2.0);
  EXPECT_DOUBLE_EQ(at(parse("[-2,2]"), 2, 0), 2.0);
}

TEST(Parse, PiecewiseChi) {
  Expr chi = corpus::chi_expr();
  EXPECT_DOUBLE_EQ(at(chi, 10, 0.05), 5.0);
  EXPECT_DOUBLE_EQ(at(chi, 10, 0.2), 0.0);
  EXPECT_DOUBLE_EQ(at(chi, 10, -0.05), 5.0);
}

TEST(Parse, PiecewiseWithoutMatchingBranchIsUndefined) {
  Expr e = parse("piecewise(ξ > 0 : 1)");
  EXPECT_FALSE(evaluate_at(e, Bindings::at(1, -1)).is_defined());
}

TEST(Parse, ErrorsCarryPosition) {
  try {
    parse("1 + * 2");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.diagnostic().position, 4u);
    EXPECT_FALSE(e.diagnostic().message.empty());
  }
  EXPECT_THROW(parse("foo(ξ)"), ParseError);
  EXPECT_THROW(parse("sin ξ"), ParseError);
  EXPECT_THROW(parse("(1 + 2"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(Parse, PrefixStopsAtSecondOperand) {
  const std::string text = "sqrt(∂) 0";
  auto [e, pos] = parse_prefix(text);
  EXPECT_EQ(e, parse("sqrt(∂)"));
  EXPECT_EQ(text.substr(pos), "0");
}

TEST(Parse, ContextSubstitutesDefinitions) {
  ParseContext ctx{[](std::string_view n) -> std::optional<Definition> {
    if (n == "sq") return Definition{Definition::Kind::Function, parse("ξ^2")};
    if (n == "c") return Definition{Definition::Kind::Number, parse("∞")};
    return std::nullopt;
  }};
  EXPECT_EQ(parse("sq(c + 1)", &ctx), parse("(∞ + 1)^2"));
}

// ---- renderer --------------------------------------------------------------

TEST(Render, DeltaNotation) {
  EXPECT_EQ(render(parse("1/∞")), "∂");
  EXPECT_EQ(render(parse("ξ^(∞-1)")), "ξ^(∞ - 1)");
}

TEST(Render, RoundTripOnFixedCorpus) {
  for (const auto& [name, e] : corpus::functions()) {
    SCOPED_TRACE(name);
    EXPECT_EQ(parse(render(e)), e) << render(e);
  }
  for (const char* s : {"-(-ξ)", "(-2)^ξ", "-2^ξ", "2^-ξ", "ξ - (1 - ξ)", "ξ/(ξ/2)", "e^(ξ^2-∞^2)", "[1, -2.5, 3]",
                        "piecewise(ξ ≤ 0 : -ξ ; ξ ≥ 1 : 1 ; default : ξ^2)", "|ξ|^3", "1e-300 * ξ"}) {
    Expr e = parse(s);
    EXPECT_EQ(parse(render(e)), e) << s << " → " << render(e);
  }
}

TEST(Render, RoundTripOnRandomTrees) {
  corpus::ExprGen gen(7);
  for (int i = 0; i < 300; ++i) {
    Expr e = gen(4);
    ASSERT_EQ(parse(render(e)), e) << render(e);
  }
}

// ---- simplifier ------------------------------------------------------------

TEST(Simplify, FoldsConstantsAndIdentities) {
  EXPECT_EQ(simplify(parse("0*ξ + 1*ξ")), parse("ξ"));
  EXPECT_EQ(simplify(parse("∂*∞")), lit(1));
  EXPECT_EQ(simplify(parse("ξ - ξ")), lit(0));
  EXPECT_EQ(simplify(parse("cos(π)")), simplify(parse("-1")));
  EXPECT_EQ(simplify(parse("6/3")), lit(2));
}

TEST(Simplify, KeepsPartialityOfCancelledTerms) {
  // ξ/ξ is undefined at 0, so it must not fold to 1 blindly.
  Expr s = simplify(parse("ξ/ξ"));
  EXPECT_FALSE(evaluate_at(s, Bindings::at(1, 0)).is_defined());
}

TEST(Simplify, PreservesValuesOnRandomTrees) {
  corpus::ExprGen gen(11);
  int compared = 0;
  for (int i = 0; i < 300; ++i) {
    Expr e = gen(3);
    Expr s = simplify(e);
    for (int j = 0; j < 5; ++j) {
      Index n = 1 + gen.pick(40);
      double x = gen.uniform(-2, 2);
      Value a = evaluate_at(e, Bindings::at(n, x)), b = evaluate_at(s, Bindings::at(n, x));
      if (!a.is_finite() || !b.is_finite()) continue;
      // Sensitivity to a 1e-12 relative nudge of ξ bounds what reassociation
      // may change (e.g. sin of a ν^5-sized argument).
      Value nudged = evaluate_at(e, Bindings::at(n, x * (1 + 1e-12)));
      const double sens = nudged.is_finite() ? std::fabs(nudged.raw() - a.raw()) : 0.0;
      ++compared;
      EXPECT_NEAR(a.raw(), b.raw(), 1e-9 * std::max(1.0, std::fabs(a.raw())) + sens)
          << render(e) << " vs " << render(s);
    }
  }
  EXPECT_GT(compared, 1000);
}

TEST(Simplify, Idempotent) {
  corpus::ExprGen gen(5);
  for (int i = 0; i < 100; ++i) {
    Expr s = simplify(gen(3));
    EXPECT_EQ(simplify(s), s) << render(s);
  }
}

// ---- evaluation ------------------------------------------------------------

TEST(Evaluate, DomainViolationsAreUndefined) {
  EXPECT_FALSE(evaluate_at(parse("1/ξ"), Bindings::at(1, 0)).is_defined());
  EXPECT_FALSE(evaluate_at(parse("ln(ξ)"), Bindings::at(1, -1)).is_defined());
  EXPECT_FALSE(evaluate_at(parse("sqrt(ξ)"), Bindings::at(1, -1)).is_defined());
}

TEST(Evaluate, RangeLossIsFlagged) {
  Value big = evaluate_at(parse("e^(∞^2)"), Bindings::at(100));
  EXPECT_EQ(big.kind(), Value::Kind::Huge);
  Value small = evaluate_at(parse("e^(-∞^2)"), Bindings::at(100));
  EXPECT_EQ(small.kind(), Value::Kind::Tiny);
  ASSERT_TRUE(small.real());
  EXPECT_EQ(*small.real(), 0.0);
}

TEST(Evaluate, MissingBindingThrows) { EXPECT_THROW(evaluate_at(parse("ξ"), Bindings::at(1)), MissingBinding); }

TEST(Evaluate, ExampleFamilies) {
  // φ(0) at n = 2 is e^(−4)/cos(0).
  EXPECT_NEAR(at(corpus::phi_expr(), 2, 0), std::exp(-4.0), 1e-15);
  EXPECT_DOUBLE_EQ(at(corpus::psi_expr(), 3, 0), 3.0);
}

// ---- differentiation -------------------------------------------------------

TEST(Differentiate, WorkedExamples) {
  EXPECT_EQ(simplify(differentiate(parse("∂*ξ^∞ + ∞^2"), Var::Arg)), simplify(parse("ξ^(∞-1)")));
  EXPECT_EQ(simplify(differentiate(parse("∞"), Var::Arg)), lit(0));
}

TEST(Differentiate, MatchesCentralDifferences) {
  corpus::ExprGen gen(23);
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    Expr e = gen(3);
    Expr d = differentiate(e, Var::Arg);
    for (int j = 0; j < 3; ++j) {
      Index n = 1 + gen.pick(8);
      double x = gen.uniform(-1.5, 1.5), h = 1e-5;
      Value fp = evaluate_at(e, Bindings::at(n, x + h)), fm = evaluate_at(e, Bindings::at(n, x - h));
      Value dv = evaluate_at(d, Bindings::at(n, x));
      if (!fp.is_finite() || !fm.is_finite() || !dv.is_finite() || std::fabs(dv.raw()) > 1e4) continue;
      const double fd = (fp.raw() - fm.raw()) / (2 * h);
      ++compared;
      EXPECT_NEAR(dv.raw(), fd, 1e-4 * std::max(1.0, std::fabs(fd))) << render(e);
    }
  }
  EXPECT_GT(compared, 300);
}

TEST(Differentiate, WithRespectToPosition) {
  EXPECT_EQ(simplify(differentiate(parse("k^2/∞"), Var::Pos)), simplify(parse("2*k/∞")));
}

// ---- breakpoints -----------------------------------------------------------

TEST(Breakpoints, ChiGuardsAtPlusMinusDelta) {
  BreakpointSet b = breakpoints(corpus::chi_expr());
  EXPECT_TRUE(b.complete());
  auto xs = b.values_at(4, Breakpoint::Kind::Guard);
  ASSERT_EQ(xs.size(), 2u);
  EXPECT_DOUBLE_EQ(xs[0], -0.25);
  EXPECT_DOUBLE_EQ(xs[1], 0.25);
}

TEST(Breakpoints, PolesAndKinks) {
  auto pole = breakpoints(parse("1/(ξ - ∂)")).values_at(2, Breakpoint::Kind::Pole);
  ASSERT_EQ(pole.size(), 1u);
  EXPECT_DOUBLE_EQ(pole[0], 0.5);
  auto kink = breakpoints(parse("|ξ - ∂|")).values_at(4, Breakpoint::Kind::Kink);
  ASSERT_EQ(kink.size(), 1u);
  EXPECT_DOUBLE_EQ(kink[0], 0.25);
}

TEST(Breakpoints, SmoothFamilyHasNone) { EXPECT_TRUE(breakpoints(corpus::psi_expr()).points.empty()); }
