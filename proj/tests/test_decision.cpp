#include <gtest/gtest.h>

#include <cmath>

#include "vcalc.hpp"

using namespace vcalc;

namespace {

Predicate pred(std::function<bool(Index)> f) {
  return Predicate([f](Index n) -> Probe { return f(n) ? Observation::True : Observation::False; });
}

Sequence seq(std::function<double(Index)> f) {
  return Sequence([f](Index n) { return Value::from_raw(f(n)); });
}

}  // namespace

TEST(Schedule, DefaultPlan) {
  SamplingSchedule s;
  EXPECT_EQ(s.max_index(), 16384u);
  auto plan = s.plan();
  ASSERT_EQ(plan.size(), 12u);
  EXPECT_EQ(plan.front().size(), 8u);  // 1..8 exhaustively
  for (std::size_t i = 1; i < plan.size(); ++i) EXPECT_LE(plan[i].size(), 12u);
  EXPECT_EQ(plan.back().back(), 16384u);
}

TEST(Schedule, RejectsBadParameters) {
  SamplingSchedule s;
  s.growth = 1.0;
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = {};
  s.stages = 1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Eventually, HoldsWithTightWitness) {
  Verdict v = eventually(pred([](Index n) { return n > 1000; }));
  EXPECT_TRUE(v.holds());
  ASSERT_TRUE(v.witness);
  EXPECT_EQ(*v.witness, 1001u);
  EXPECT_EQ(v.mode, Mode::Sampled);
}

TEST(Eventually, FailsWhenFinalStagesAllFalse) {
  EXPECT_TRUE(eventually(pred([](Index n) { return n < 50; })).fails());
}

TEST(Eventually, MixedFinalStagesAreUnknown) {
  EXPECT_TRUE(eventually(pred([](Index n) { return std::sin(static_cast<double>(n)) > 0; })).unknown());
}

TEST(Eventually, PeriodicPredicateIsExact) {
  Predicate even([](Index n) -> Probe { return n % 2 == 0 ? Observation::True : Observation::False; }, 2);
  Verdict v = eventually(even);
  EXPECT_TRUE(v.fails());
  EXPECT_EQ(v.mode, Mode::Symbolic);
  Predicate always([](Index) -> Probe { return Observation::True; }, 3);
  EXPECT_TRUE(eventually(always).holds());
}

TEST(Eventually, UndefinedObservationsAreNotTrue) {
  Verdict v = eventually(Predicate([](Index) -> Probe { return Observation::Undefined; }));
  EXPECT_FALSE(v.holds());
}

TEST(Eventually, EvidenceListsComputedIndices) {
  Verdict v = eventually(pred([](Index n) { return n > 3; }));
  ASSERT_FALSE(v.evidence.empty());
  for (const auto& e : v.evidence) EXPECT_EQ(e.observation == Observation::True, e.index > 3) << e.index;
}

// Oracle: no Holds or Fails the brute-force window contradicts.
TEST(Eventually, SoundAgainstBruteForceWindow) {
  const std::vector<std::pair<const char*, std::function<bool(Index)>>> cases = {
      {"n > 777", [](Index n) { return n > 777; }},
      {"n mod 3 != 0", [](Index n) { return n % 3 != 0; }},
      {"n < 10", [](Index n) { return n < 10; }},
      {"n != 5120", [](Index n) { return n != 5120; }},  // a sampled index
      {"n^2 > 9000", [](Index n) { return n * n > 9000; }},
      {"sin n > -0.99", [](Index n) { return std::sin(static_cast<double>(n)) > -0.99; }},
      {"1/n < 1e-3", [](Index n) { return 1.0 / static_cast<double>(n) < 1e-3; }},
  };
  SamplingSchedule s;
  for (const auto& [name, f] : cases) {
    SCOPED_TRACE(name);
    Predicate p = pred(f);
    Verdict v = eventually(p, s);
    auto window = brute_force_window(p, 1, s.max_index());
    if (v.holds()) {
      for (const auto& e : window)
        if (e.index >= *v.witness) {
          EXPECT_EQ(e.observation, Observation::True) << "at " << e.index;
        }
    }
    if (v.fails()) {
      // a violation at or after the start of the final stage
      const Index last_stage = s.stage_ends()[s.stages - 2];
      bool violated = false;
      for (const auto& e : window) violated |= e.index > last_stage && e.observation != Observation::True;
      EXPECT_TRUE(violated);
    }
  }
}

TEST(Connectives, Kleene) {
  Verdict h = Verdict::symbolic(true), f = Verdict::symbolic(false), u = Verdict::undecided();
  EXPECT_TRUE(conjunction({h, h}).holds());
  EXPECT_TRUE(conjunction({h, f}).fails());
  EXPECT_TRUE(conjunction({u, f}).fails());
  EXPECT_TRUE(conjunction({h, u}).unknown());
  EXPECT_TRUE(disjunction({u, h}).holds());
  EXPECT_TRUE(disjunction({f, f}).fails());
  EXPECT_TRUE(negate(f).holds());
  EXPECT_TRUE(negate(u).unknown());
}

TEST(Limit, ConvergentWithAcceleration) {
  LimitResult r = limit(seq([](Index n) { return 1.0 - 1.0 / static_cast<double>(n); }));
  ASSERT_TRUE(r.converged());
  EXPECT_NEAR(r.converged()->value, 1.0, 1e-8);
  LimitResult q = limit(seq([](Index n) { return std::pow(1.0 + 1.0 / static_cast<double>(n), static_cast<double>(n)); }));
  ASSERT_TRUE(q.converged());
  EXPECT_NEAR(q.converged()->value, std::exp(1.0), 1e-7);
}

TEST(Limit, Divergence) {
  LimitResult up = limit(seq([](Index n) { return static_cast<double>(n); }));
  ASSERT_TRUE(up.diverged());
  EXPECT_GT(up.diverged()->sign, 0);
  LimitResult down = limit(seq([](Index n) { return -std::log(static_cast<double>(n)); }));
  ASSERT_TRUE(down.diverged());
  EXPECT_LT(down.diverged()->sign, 0);
}

TEST(Limit, OscillationHasNoLimit) {
  EXPECT_TRUE(limit(seq([](Index n) { return n % 2 ? -1.0 : 1.0; })).no_limit());
}

TEST(Limit, SlowOscillationHasNoLimit) {
  EXPECT_TRUE(limit(seq([](Index n) { return std::sin(static_cast<double>(n)); })).no_limit());
}

TEST(Limit, SlowConvergenceIsNotMistakenForOscillation) {
  EXPECT_FALSE(limit(seq([](Index n) { return 1.0 / std::log(static_cast<double>(n) + 1); })).no_limit());
  EXPECT_FALSE(limit(seq([](Index n) { return std::cos(static_cast<double>(n)) / std::sqrt(static_cast<double>(n)); }))
                   .no_limit());
}
