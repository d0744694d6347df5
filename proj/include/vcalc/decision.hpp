#pragma once

/**
 * @file decision.hpp
 * @brief "Eventually P(n)" verdicts and limits of real sequences.
 *
 * Eventual properties of arbitrary computable sequences are undecidable, so
 * every answer is three-valued. Periodic sources are decided exactly by cycle
 * inspection; everything else is sampled on a geometric schedule and the
 * samples travel with the verdict as evidence.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "value.hpp"

namespace vcalc {

enum class Outcome { Holds, Fails, Unknown };
enum class Mode { Symbolic, Sampled };
enum class Observation { True, False, Undefined };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "holds";
    case Outcome::Fails: return "fails";
    case Outcome::Unknown: return "unknown";
  }
  return "?";
}
inline const char* to_string(Mode m) { return m == Mode::Symbolic ? "symbolic" : "sampled"; }
inline const char* to_string(Observation o) {
  switch (o) {
    case Observation::True: return "true";
    case Observation::False: return "false";
    case Observation::Undefined: return "undefined";
  }
  return "?";
}

struct EvidencePoint {
  Index index = 0;
  Observation observation = Observation::Undefined;
  std::optional<double> value;  // the quantity that was tested, when one exists
};

struct Verdict {
  Outcome outcome = Outcome::Unknown;
  std::optional<Index> witness;
  std::vector<EvidencePoint> evidence;
  Mode mode = Mode::Sampled;
  std::string note;

  bool holds() const { return outcome == Outcome::Holds; }
  bool fails() const { return outcome == Outcome::Fails; }
  bool unknown() const { return outcome == Outcome::Unknown; }

  static Verdict symbolic(bool holds, std::string note = {}) {
    Verdict v;
    v.outcome = holds ? Outcome::Holds : Outcome::Fails;
    v.mode = Mode::Symbolic;
    if (holds) v.witness = 1;
    v.note = std::move(note);
    return v;
  }
  static Verdict undecided(std::string note = {}) {
    Verdict v;
    v.note = std::move(note);
    return v;
  }
};

// Kleene connectives. Evidence is not merged; the mode is Symbolic only when
// every input that mattered was.
inline Verdict negate(Verdict v) {
  if (v.outcome == Outcome::Holds) v.outcome = Outcome::Fails;
  else if (v.outcome == Outcome::Fails) v.outcome = Outcome::Holds;
  v.witness.reset();
  return v;
}

inline Verdict conjunction(const std::vector<Verdict>& vs) {
  Verdict out;
  out.outcome = Outcome::Holds;
  out.mode = Mode::Symbolic;
  Index w = 1;
  for (const auto& v : vs) {
    if (v.fails()) {
      Verdict f = v;
      f.witness.reset();
      return f;
    }
    if (v.unknown()) out.outcome = Outcome::Unknown;
    if (v.mode == Mode::Sampled) out.mode = Mode::Sampled;
    if (v.witness) w = std::max(w, *v.witness);
    if (out.evidence.empty()) out.evidence = v.evidence;
  }
  if (out.holds()) out.witness = w;
  return out;
}

inline Verdict disjunction(const std::vector<Verdict>& vs) {
  std::vector<Verdict> neg;
  for (const auto& v : vs) neg.push_back(negate(v));
  return negate(conjunction(neg));
}

/// Geometric sampling plan. Stage 0 is [1, N0] exhaustively; stage i covers
/// (N_{i-1}, N_i] with N_i = round(N0·growth^i), sampled at up to
/// `per_stage` evenly spaced indices that always include N_i.
struct SamplingSchedule {
  Index start = 8;
  double growth = 2.0;
  unsigned stages = 12;
  unsigned per_stage = 12;

  void validate() const {
    if (start < 1) throw std::invalid_argument("schedule start must be >= 1");
    if (!(growth > 1.0)) throw std::invalid_argument("schedule growth must be > 1");
    if (stages < 2) throw std::invalid_argument("schedule needs at least 2 stages");
    if (per_stage < 3) throw std::invalid_argument("schedule needs at least 3 samples per stage");
  }

  std::vector<Index> stage_ends() const {
    validate();
    std::vector<Index> ends{start};
    double x = static_cast<double>(start);
    for (unsigned i = 1; i < stages; ++i) {
      x *= growth;
      Index e = std::max<Index>(ends.back() + 1, static_cast<Index>(std::llround(x)));
      ends.push_back(e);
    }
    return ends;
  }

  Index max_index() const { return stage_ends().back(); }

  std::vector<std::vector<Index>> plan() const {
    auto ends = stage_ends();
    std::vector<std::vector<Index>> out;
    std::vector<Index> first(start);
    std::iota(first.begin(), first.end(), Index{1});
    out.push_back(std::move(first));
    for (std::size_t i = 1; i < ends.size(); ++i) {
      const Index lo = ends[i - 1], hi = ends[i], width = hi - lo;
      std::vector<Index> s;
      if (width <= per_stage) {
        for (Index k = lo + 1; k <= hi; ++k) s.push_back(k);
      } else {
        for (unsigned j = 1; j <= per_stage; ++j)
          s.push_back(lo + static_cast<Index>(std::llround(static_cast<double>(width) * j / per_stage)));
        s.erase(std::unique(s.begin(), s.end()), s.end());
      }
      out.push_back(std::move(s));
    }
    return out;
  }

  std::vector<Index> indices() const {
    std::vector<Index> all;
    for (auto& s : plan()) all.insert(all.end(), s.begin(), s.end());
    return all;
  }
};

/// One observation plus, optionally, the number it was derived from.
struct Probe {
  Observation obs;
  std::optional<double> value;
  Probe(Observation o, std::optional<double> v = std::nullopt) : obs(o), value(v) {}  // NOLINT
};

/// A per-index test. `period`, when set, promises pred(n) = pred(n + period)
/// for all n >= 1, which makes the verdict exact.
struct Predicate {
  Predicate(std::function<Probe(Index)> f, std::optional<Index> p = std::nullopt) : fn(std::move(f)), period(p) {}
  std::function<Probe(Index)> fn;
  std::optional<Index> period;
};

inline Verdict eventually(const Predicate& pred, const SamplingSchedule& schedule = {}) {
  if (pred.period) {
    const Index p = *pred.period;
    Verdict v;
    v.mode = Mode::Symbolic;
    bool all = true;
    for (Index n = 1; n <= p; ++n) {
      Probe o = pred.fn(n);
      v.evidence.push_back({n, o.obs, o.value});
      all = all && o.obs == Observation::True;
    }
    v.outcome = all ? Outcome::Holds : Outcome::Fails;
    if (all) v.witness = 1;
    v.note = "decided over one period of length " + std::to_string(p);
    return v;
  }

  Verdict v;
  v.mode = Mode::Sampled;
  auto plan = schedule.plan();
  std::vector<std::vector<Observation>> seen;
  for (const auto& stage : plan) {
    seen.emplace_back();
    for (Index n : stage) {
      Probe o = pred.fn(n);
      v.evidence.push_back({n, o.obs, o.value});
      seen.back().push_back(o.obs);
    }
  }
  auto all_are = [&](std::size_t s, Observation want) {
    return std::all_of(seen[s].begin(), seen[s].end(), [&](Observation o) { return o == want; });
  };
  const std::size_t last = seen.size() - 1;
  if (all_are(last, Observation::True) && all_are(last - 1, Observation::True)) {
    v.outcome = Outcome::Holds;
    std::optional<std::size_t> last_bad;
    for (std::size_t i = 0; i < v.evidence.size(); ++i)
      if (v.evidence[i].observation != Observation::True) last_bad = i;
    v.witness = last_bad ? v.evidence[*last_bad + 1].index : v.evidence.front().index;
    if (last_bad) {
      // Tighten the witness over the unsampled gap after the last violation.
      constexpr Index kGapScan = 1024;
      const Index bad = v.evidence[*last_bad].index;
      for (Index n = *v.witness - 1, scanned = 0; n > bad && scanned < kGapScan; --n, ++scanned) {
        if (pred.fn(n).obs != Observation::True) {
          v.witness = n + 1;
          break;
        }
      }
    }
    // Confirm exhaustively on [w, 4w] within the sampled range; a violation
    // there moves the witness past it.
    constexpr Index kConfirmBudget = 4096;
    Index spent = 0;
    for (Index n = *v.witness; n <= std::min(4 * *v.witness, schedule.max_index()) && spent < kConfirmBudget;
         ++n, ++spent) {
      if (pred.fn(n).obs != Observation::True) v.witness = n + 1;
    }
  } else if (all_are(last, Observation::False) && all_are(last - 1, Observation::False)) {
    v.outcome = Outcome::Fails;
    v.note = "violated at every sample of the final two stages";
  } else {
    v.outcome = Outcome::Unknown;
    v.note = "no stable pattern in the final two stages";
  }
  return v;
}

/// Exhaustive evaluation, the oracle for sampled verdicts.
inline std::vector<EvidencePoint> brute_force_window(const Predicate& pred, Index from, Index to) {
  if (from < 1 || from > to) throw std::invalid_argument("window must satisfy 1 <= from <= to");
  if (to > 1'000'000) throw std::invalid_argument("window too large (limit 10^6)");
  std::vector<EvidencePoint> out;
  out.reserve(to - from + 1);
  for (Index n = from; n <= to; ++n) {
    Probe o = pred.fn(n);
    out.push_back({n, o.obs, o.value});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Limits

struct Converges {
  double value;
  double error;
};
struct DivergesTo {
  int sign;  // +1 or -1
};
struct NoLimit {};
struct LimitUnknown {
  std::string reason;
};

struct LimitResult {
  std::variant<Converges, DivergesTo, NoLimit, LimitUnknown> v;
  std::vector<EvidencePoint> evidence;

  bool converges() const { return std::holds_alternative<Converges>(v); }
  const Converges* converged() const { return std::get_if<Converges>(&v); }
  const DivergesTo* diverged() const { return std::get_if<DivergesTo>(&v); }
  bool no_limit() const { return std::holds_alternative<NoLimit>(v); }
  bool unknown() const { return std::holds_alternative<LimitUnknown>(v); }

  std::string describe() const {
    if (auto c = converged()) return "converges to " + std::to_string(c->value);
    if (auto d = diverged()) return d->sign > 0 ? "diverges to +∞" : "diverges to -∞";
    if (no_limit()) return "no limit (oscillates)";
    return "unknown (" + std::get<LimitUnknown>(v).reason + ")";
  }
};

/// A real sequence given index-wise; `period` as in Predicate.
struct Sequence {
  Sequence(std::function<Value(Index)> f, std::optional<Index> p = std::nullopt) : fn(std::move(f)), period(p) {}
  std::function<Value(Index)> fn;
  std::optional<Index> period;
};

namespace detail {

// Aitken Δ² over a whole sample vector; falls back to the raw value where the
// second difference vanishes.
inline std::vector<double> aitken(const std::vector<double>& x) {
  std::vector<double> out;
  for (std::size_t k = 0; k + 2 < x.size(); ++k) {
    const double d1 = x[k + 1] - x[k], d2 = x[k + 2] - x[k + 1];
    const double dd = d2 - d1;
    if (dd == 0.0 || !std::isfinite(dd)) out.push_back(x[k + 2]);
    else out.push_back(x[k + 2] - d2 * d2 / dd);
  }
  return out;
}

inline std::optional<double> tail_cauchy(const std::vector<double>& a, double tol, double& spread) {
  if (a.size() < 3) return std::nullopt;
  const double v = a.back();
  spread = 0;
  for (std::size_t k = a.size() - 3; k < a.size(); ++k) spread = std::max(spread, std::fabs(a[k] - v));
  if (spread <= tol * std::max(1.0, std::fabs(v))) return v;
  return std::nullopt;
}

inline std::optional<double> usable(const Value& v) { return v.real(); }

}  // namespace detail

/// Limit of a sequence: Aitken-accelerated geometric samples, guarded by the
/// intermediate samples so that parity effects cannot fake convergence.
inline LimitResult limit(const Sequence& seq, const SamplingSchedule& schedule = {}, double tol = 1e-8) {
  LimitResult res;
  if (seq.period) {
    std::vector<double> vals;
    for (Index n = 1; n <= *seq.period; ++n) {
      Value x = seq.fn(n);
      auto u = detail::usable(x);
      res.evidence.push_back({n, u ? Observation::True : Observation::Undefined, u});
      if (!u) {
        res.v = LimitUnknown{"undefined inside the period"};
        return res;
      }
      vals.push_back(*u);
    }
    const bool flat = std::all_of(vals.begin(), vals.end(), [&](double x) { return x == vals.front(); });
    if (flat) res.v = Converges{vals.front(), 0.0};
    else res.v = NoLimit{};
    return res;
  }

  auto plan = schedule.plan();
  std::vector<std::vector<std::pair<Index, Value>>> stages;
  for (const auto& st : plan) {
    stages.emplace_back();
    for (Index n : st) {
      Value x = seq.fn(n);
      auto u = detail::usable(x);
      Observation o = u ? Observation::True : Observation::Undefined;
      res.evidence.push_back({n, o, x.is_defined() && x.kind() != Value::Kind::Indeterminate
                                        ? std::optional<double>(x.raw())
                                        : std::nullopt});
      stages.back().emplace_back(n, x);
    }
  }

  // Geometric points: the last sample of each stage.
  std::vector<Value> geo;
  for (auto& st : stages) geo.push_back(st.back().second);
  const std::size_t m = geo.size();

  // Overflow in the tail with a stable sign.
  {
    int sign = 0;
    bool huge = false, ok = true;
    for (std::size_t k = m - 2; k < m; ++k) {
      const Value& g = geo[k];
      if (!g.is_defined() || g.kind() == Value::Kind::Indeterminate) ok = false;
      else {
        int s = g.raw() > 0 ? 1 : g.raw() < 0 ? -1 : 0;
        if (sign == 0) sign = s;
        else if (s != sign) ok = false;
        huge = huge || g.kind() == Value::Kind::Huge;
      }
    }
    if (ok && huge && sign != 0 && geo.back().kind() == Value::Kind::Huge) {
      res.v = DivergesTo{sign};
      return res;
    }
  }

  const std::size_t need = std::min<std::size_t>(m, 8);
  std::vector<double> x;
  for (std::size_t k = m - need; k < m; ++k) {
    auto u = detail::usable(geo[k]);
    if (!u) {
      res.v = LimitUnknown{"undefined or out of range in the sampled tail"};
      return res;
    }
    x.push_back(*u);
  }

  // Intermediate-sample deviation from v over a stage.
  auto deviation = [&](std::size_t s, double v) {
    double d = 0;
    for (auto& [n, val] : stages[s]) {
      auto u = detail::usable(val);
      if (!u) return std::numeric_limits<double>::infinity();
      d = std::max(d, std::fabs(*u - v));
    }
    return d;
  };
  auto settled = [&](double v) {
    const double scale = tol * std::max(1.0, std::fabs(v));
    const double last = deviation(m - 1, v), prev = deviation(m - 2, v);
    return last <= scale || last <= 0.95 * prev;
  };

  // Divergence: one sign, growing magnitude, non-shrinking increments.
  {
    const std::size_t k0 = x.size() - 4;
    bool grow = true;
    int sign = x.back() > 0 ? 1 : -1;
    for (std::size_t k = k0; k < x.size(); ++k) grow = grow && x[k] != 0 && (x[k] > 0 ? 1 : -1) == sign;
    for (std::size_t k = k0 + 1; k < x.size() && grow; ++k) grow = std::fabs(x[k]) > std::fabs(x[k - 1]);
    bool steady = grow;
    for (std::size_t k = k0 + 2; k < x.size() && steady; ++k)
      steady = std::fabs(x[k] - x[k - 1]) >= (1 - 1e-9) * std::fabs(x[k - 1] - x[k - 2]);
    if (grow && (steady || std::fabs(x.back()) > 1.0 / tol)) {
      bool mono = true;
      for (std::size_t s = m - 2; s < m && mono; ++s)
        for (auto& [n, val] : stages[s]) {
          auto u = detail::usable(val);
          mono = mono && u && (*u > 0 ? 1 : -1) == sign;
        }
      if (mono) {
        res.v = DivergesTo{sign};
        return res;
      }
    }
  }

  // Exactly constant tail: report the raw value so lifted reals round-trip.
  if (x[x.size() - 1] == x[x.size() - 2] && x[x.size() - 2] == x[x.size() - 3]) {
    const double v = x.back();
    if (deviation(m - 1, v) <= tol * std::max(1.0, std::fabs(v)) &&
        deviation(m - 2, v) <= tol * std::max(1.0, std::fabs(v))) {
      res.v = Converges{v, 0.0};
      return res;
    }
  }

  double spread = 0;
  std::vector<double> acc = x;
  for (int round = 0; round < 3; ++round) {
    if (auto v = detail::tail_cauchy(acc, tol, spread); v && settled(*v)) {
      res.v = Converges{*v, spread};
      return res;
    }
    acc = detail::aitken(acc);
    if (acc.size() < 3) break;
  }
  // Persistent oscillation: both final stages swing back and forth by a
  // non-shrinking amount that tolerance cannot absorb.
  {
    auto swing = [&](std::size_t s, double& spread_out) {
      std::vector<double> v;
      for (auto& [n, val] : stages[s]) {
        auto u = detail::usable(val);
        if (!u) return false;
        v.push_back(*u);
      }
      if (v.size() < 3) return false;
      int turns = 0;
      for (std::size_t i = 2; i < v.size(); ++i) turns += (v[i] - v[i - 1]) * (v[i - 1] - v[i - 2]) < 0;
      auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      spread_out = *hi - *lo;
      return turns >= 2;
    };
    // Twelve samples give a noisy amplitude, so the last stage is also held
    // against one four stages (16x in n) earlier, where decay would show.
    double last = 0, prev = 0, early = 0;
    if (m >= 5 && swing(m - 1, last) && swing(m - 2, prev) && swing(m - 5, early)) {
      const double scale = std::max(1.0, std::fabs(x.back()));
      if (last >= std::sqrt(tol) * scale && last >= 0.85 * prev && last >= 0.85 * early) {
        res.v = NoLimit{};
        return res;
      }
    }
  }

  res.v = LimitUnknown{"accelerated tail is not Cauchy within tolerance"};
  return res;
}

}  // namespace vcalc
