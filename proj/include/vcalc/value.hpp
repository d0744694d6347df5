#pragma once

/**
 * @file value.hpp
 * @brief Per-index real values with overflow/underflow flags.
 *
 * Every per-index computation in the engine produces a Value. Besides an
 * ordinary finite double it can be NotDefined (the member function is not
 * defined there), or one of three flagged states that record a loss of
 * binary64 range:
 *
 *   Huge           the exact value overflowed (sign kept in `x` as +-inf)
 *   Tiny           the exact value underflowed to zero (sign kept in `x`)
 *   Indeterminate  flagged inputs combined into something unknowable
 *
 * Relations that see a flagged value answer Unknown instead of guessing.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>

namespace vcalc {

using Index = std::uint64_t;

class Value {
public:
  enum class Kind { Finite, Huge, Tiny, Indeterminate, NotDefined };

  constexpr Value() = default;

  static Value finite(double x) { return Value(Kind::Finite, x); }
  static Value huge(double sign) {
    return Value(Kind::Huge, std::copysign(std::numeric_limits<double>::infinity(), sign));
  }
  static Value tiny(double sign) { return Value(Kind::Tiny, std::copysign(0.0, sign)); }
  static Value indeterminate() {
    return Value(Kind::Indeterminate, std::numeric_limits<double>::quiet_NaN());
  }
  static Value undefined() {
    return Value(Kind::NotDefined, std::numeric_limits<double>::quiet_NaN());
  }

  /// Classifies a raw double produced from finite, unflagged inputs.
  /// `nonzero_expected` marks operations whose exact result cannot be 0.
  static Value from_raw(double r, bool nonzero_expected = false) {
    if (std::isnan(r)) return undefined();
    if (std::isinf(r)) return huge(r);
    if (nonzero_expected && (r == 0.0 || std::fpclassify(r) == FP_SUBNORMAL)) return tiny(r);
    return finite(r);
  }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::Finite; }
  bool is_defined() const { return kind_ != Kind::NotDefined; }
  bool is_flagged() const {
    return kind_ == Kind::Huge || kind_ == Kind::Tiny || kind_ == Kind::Indeterminate;
  }

  /// The finite value, or the stand-in used for arithmetic on flagged values
  /// (+-inf for Huge, signed zero for Tiny, NaN otherwise).
  double raw() const { return x_; }

  /// A usable real: finite values as-is, Tiny as its signed zero.
  std::optional<double> real() const {
    if (kind_ == Kind::Finite || kind_ == Kind::Tiny) return x_;
    return std::nullopt;
  }

  friend bool operator==(const Value&, const Value&) = default;

private:
  constexpr Value(Kind k, double x) : kind_(k), x_(x) {}

  Kind kind_ = Kind::NotDefined;
  double x_ = std::numeric_limits<double>::quiet_NaN();
};

inline const char* to_string(Value::Kind k) {
  switch (k) {
    case Value::Kind::Finite: return "finite";
    case Value::Kind::Huge: return "huge";
    case Value::Kind::Tiny: return "tiny";
    case Value::Kind::Indeterminate: return "indeterminate";
    case Value::Kind::NotDefined: return "undefined";
  }
  return "?";
}

inline std::ostream& operator<<(std::ostream& os, const Value& v) {
  if (v.is_finite()) return os << v.raw();
  os << to_string(v.kind());
  if (v.kind() == Value::Kind::Huge || v.kind() == Value::Kind::Tiny)
    os << (std::signbit(v.raw()) ? "(-)" : "(+)");
  return os;
}

/// Relative closeness used by sampled equality checks. Exact zeros only
/// match exact zeros.
inline bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  return std::fabs(a - b) <= rel * std::fmax(std::fabs(a), std::fabs(b));
}

}  // namespace vcalc
