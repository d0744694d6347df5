#pragma once

// REPL / batch session for the vcalc command language. One input line yields
// at most one OutputRecord; input errors become error records and never
// abort the session.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vcalc.hpp"

namespace vcalc::cli {

using Json = nlohmann::ordered_json;

enum class RecordKind { Value, Verdict, Definition, Error };

inline const char* to_string(RecordKind k) {
  switch (k) {
    case RecordKind::Value: return "value";
    case RecordKind::Verdict: return "verdict";
    case RecordKind::Definition: return "definition";
    case RecordKind::Error: return "error";
  }
  return "?";
}

struct ConfigSnapshot {
  SamplingSchedule schedule;
  double limit_tol = 1e-8;
  double equal_rel_tol = 1e-12;
  double quad_abs_tol = 1e-10;
  double quad_rel_tol = 1e-10;
};

struct OutputRecord {
  std::string input;
  RecordKind kind = RecordKind::Value;
  Json payload = Json::object();
  std::vector<EvidencePoint> evidence;
  ConfigSnapshot config;
};

/// Initial configuration shared by --eval, --script and the REPL.
struct Options {
  Settings settings;
  QuadratureConfig quad;
  Tag tag = Tag::Right;
  bool json = false;
};

struct SessionState {
  using Binding = std::variant<VirtualNumber, VirtualFunction, VirtualSequence>;

  explicit SessionState(Options o = {}) : opts(std::move(o)) {}

  Options opts;
  std::map<std::string, Binding> names;
  int checks = 0;
  int failed_checks = 0;
  bool quit = false;

  ConfigSnapshot snapshot() const {
    return {opts.settings.schedule, opts.settings.limit_tol, opts.settings.equal_rel_tol, opts.quad.abs_tol,
            opts.quad.rel_tol};
  }
};

class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Formatting

/// Shortest round-trip decimal form.
inline std::string format_number(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline Json value_json(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Finite: return v.raw();
    case Value::Kind::Huge: return v.raw() > 0 ? "+huge" : "-huge";
    case Value::Kind::Tiny: return std::signbit(v.raw()) ? "-tiny" : "+tiny";
    case Value::Kind::Indeterminate: return "indeterminate";
    case Value::Kind::NotDefined: return "undefined";
  }
  return nullptr;
}

inline std::string export_json(const OutputRecord& r) {
  Json evidence = Json::array();
  for (const auto& e : r.evidence) {
    Json p{{"index", e.index}, {"observation", to_string(e.observation)}};
    p["value"] = e.value && std::isfinite(*e.value) ? Json(*e.value) : Json(nullptr);
    evidence.push_back(std::move(p));
  }
  const auto& c = r.config;
  Json out{{"input", r.input},
           {"kind", to_string(r.kind)},
           {"payload", r.payload},
           {"evidence", std::move(evidence)},
           {"schedule",
            {{"start", c.schedule.start},
             {"growth", c.schedule.growth},
             {"stages", c.schedule.stages},
             {"per_stage", c.schedule.per_stage}}},
           {"tolerances",
            {{"limit", c.limit_tol}, {"equal_rel", c.equal_rel_tol}, {"quad_abs", c.quad_abs_tol},
             {"quad_rel", c.quad_rel_tol}}}};
  return out.dump(-1, ' ', false, Json::error_handler_t::replace);
}

inline std::string plain_scalar(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_float()) return format_number(j.get<double>());
  return j.dump();
}

inline std::string format_plain(const OutputRecord& r) {
  const Json& p = r.payload;
  std::string s;
  switch (r.kind) {
    case RecordKind::Error: return "error: " + p.value("message", std::string("?"));
    case RecordKind::Definition:
      return p.value("name", std::string("?")) + " := " + plain_scalar(p["value"]) + "  [" +
             p.value("kind", std::string("?")) + "]";
    case RecordKind::Verdict: {
      s = p.value("outcome", std::string("?")) + " (" + p.value("mode", std::string("?"));
      if (p.contains("witness") && !p["witness"].is_null()) s += ", from n = " + plain_scalar(p["witness"]);
      s += ")";
      if (p.contains("note") && !p["note"].get<std::string>().empty()) s += " — " + p["note"].get<std::string>();
      for (const auto& [k, v] : p.items())
        if (k != "outcome" && k != "mode" && k != "witness" && k != "note") s += "\n  " + k + ": " + plain_scalar(v);
      return s;
    }
    case RecordKind::Value: {
      s = "= " + (p.contains("value") ? plain_scalar(p["value"]) : std::string("?"));
      for (const auto& [k, v] : p.items())
        if (k != "value") s += "\n  " + k + ": " + plain_scalar(v);
      return s;
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Command parsing helpers

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto sp = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && sp(s.front())) s.remove_prefix(1);
  while (!s.empty() && sp(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// First whitespace-delimited word and the trimmed remainder.
inline std::pair<std::string_view, std::string_view> split_word(std::string_view s) {
  s = trim(s);
  auto end = s.find_first_of(" \t");
  if (end == std::string_view::npos) return {s, {}};
  return {s.substr(0, end), trim(s.substr(end))};
}

/// Splits at the first top-level, whitespace-delimited keyword (any case).
inline std::optional<std::pair<std::string_view, std::string_view>> split_keyword(std::string_view s,
                                                                                  std::string_view kw) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(') ++depth;
    else if (c == ')') --depth;
    if (depth != 0 || i + kw.size() > s.size()) continue;
    const bool left = i > 0 && (s[i - 1] == ' ' || s[i - 1] == '\t');
    if (!left) continue;
    const std::size_t j = i + kw.size();
    const bool right = j == s.size() || s[j] == ' ' || s[j] == '\t';
    if (right && lower(s.substr(i, kw.size())) == kw) return std::pair{trim(s.substr(0, i)), trim(s.substr(j))};
  }
  return std::nullopt;
}

/// Splits at the first comma outside parentheses and brackets.
inline std::optional<std::pair<std::string_view, std::string_view>> split_comma(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(' || c == '[') ++depth;
    else if (c == ')' || c == ']') --depth;
    else if (c == ',' && depth == 0) return std::pair{trim(s.substr(0, i)), trim(s.substr(i + 1))};
  }
  return std::nullopt;
}

inline std::pair<std::string_view, std::string_view> require_keyword(std::string_view s, std::string_view kw,
                                                                     std::string_view usage) {
  auto r = split_keyword(s, kw);
  if (!r || r->first.empty() || r->second.empty()) throw UsageError("usage: " + std::string(usage));
  return *r;
}

inline double parse_double(std::string_view s) {
  s = trim(s);
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw UsageError("not a number: '" + std::string(s) + "'");
  return v;
}

inline Json verdict_payload(const Verdict& v) {
  Json p{{"outcome", to_string(v.outcome)}, {"mode", to_string(v.mode)}};
  p["witness"] = v.witness ? Json(*v.witness) : Json(nullptr);
  p["note"] = v.note;
  return p;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The interpreter

class Interpreter {
public:
  explicit Interpreter(SessionState& s) : s_(s) {}

  OutputRecord run(std::string_view line) {
    OutputRecord rec;
    rec.input = std::string(detail::trim(line));
    rec.config = s_.snapshot();
    try {
      command(rec.input, rec);
    } catch (const std::exception& e) {
      rec.kind = RecordKind::Error;
      rec.payload = Json{{"message", e.what()}};
      rec.evidence.clear();
    }
    rec.config = s_.snapshot();
    return rec;
  }

private:
  using Binding = SessionState::Binding;

  const Settings& cfg() const { return s_.opts.settings; }
  const QuadratureConfig& quad() const { return s_.opts.quad; }

  // -- names ---------------------------------------------------------------

  static bool reserved(const std::string& n) {
    static const char* words[] = {"let", "eval", "near",   "eq",      "cmp",    "adj",       "diff",    "deriv", "cont",
                                  "defined", "int", "reduce",  "antider", "ftc1",     "ftc2",    "sum",   "partition",
                                  "class", "assert", "riemann", "at",    "from",      "to",      "as",    "piecewise",
                                  "cycle", "default"};
    const std::string l = detail::lower(n);
    for (const char* w : words)
      if (l == w) return true;
    // Anything the parser already understands on its own is built in.
    try {
      parse(n);
      return true;
    } catch (const ParseError&) {
      return false;
    }
  }

  void check_name(const std::string& n) const {
    if (n.empty()) throw UsageError("missing name");
    if (reserved(n)) throw UsageError("'" + n + "' is built in and cannot be rebound");
    ParseContext probe{[&](std::string_view q) -> std::optional<Definition> {
      if (q == n) return Definition{Definition::Kind::Number, lit(0)};
      return std::nullopt;
    }};
    try {
      if (!is_number(parse(n, &probe), 0.0)) throw UsageError("'" + n + "' is not a valid name");
    } catch (const ParseError&) {
      throw UsageError("'" + n + "' is not a valid name");
    }
  }

  std::optional<Definition> lookup(std::string_view name, const std::map<std::string, Definition>& params) const {
    if (auto p = params.find(std::string(name)); p != params.end()) return p->second;
    auto it = s_.names.find(std::string(name));
    if (it == s_.names.end()) return std::nullopt;
    return std::visit(
        [&](const auto& b) -> std::optional<Definition> {
          using T = std::decay_t<decltype(b)>;
          auto e = b.expr();
          if (!e) throw UsageError("'" + std::string(name) + "' has no symbolic form; use it on its own");
          if constexpr (std::is_same_v<T, VirtualNumber>) return Definition{Definition::Kind::Number, *e};
          else if constexpr (std::is_same_v<T, VirtualFunction>) return Definition{Definition::Kind::Function, *e};
          else return Definition{Definition::Kind::Sequence, *e};
        },
        it->second);
  }

  Expr parse_expr(std::string_view text, const std::map<std::string, Definition>& params = {}) const {
    ParseContext ctx{[&](std::string_view n) { return lookup(n, params); }};
    return parse(detail::trim(text), &ctx);
  }

  const Binding* bound(std::string_view text) const {
    auto it = s_.names.find(std::string(detail::trim(text)));
    return it == s_.names.end() ? nullptr : &it->second;
  }

  // -- operands ------------------------------------------------------------

  VirtualNumber number_of(std::string_view text) {
    text = detail::trim(text);
    if (text.empty()) throw UsageError("missing number");
    if (auto b = bound(text)) {
      if (auto v = std::get_if<VirtualNumber>(b)) return *v;
      throw UsageError("'" + std::string(text) + "' is not a number");
    }
    auto [w, rest] = detail::split_word(text);
    const std::string head = detail::lower(w);
    if (head == "int") return integral_of(rest);
    if (head == "sum") return sum_of(rest);
    if (head == "riemann") return riemann_of(rest);
    if (head == "reduce") return lift(reduce(number_of(rest), cfg()));
    if (head == "eval") return eval_of(rest);
    Expr e = parse_expr(text);
    if (depends_on(e, Var::Arg)) throw UsageError("expected a number but '" + std::string(text) + "' depends on ξ");
    if (depends_on(e, Var::Pos)) throw UsageError("expected a number but '" + std::string(text) + "' depends on k");
    return construct(e, cfg().schedule);
  }

  VirtualFunction function_of(std::string_view text) {
    text = detail::trim(text);
    if (text.empty()) throw UsageError("missing function");
    if (auto b = bound(text)) {
      if (auto f = std::get_if<VirtualFunction>(b)) return *f;
      if (auto v = std::get_if<VirtualNumber>(b)) return constant_function(*v);
      throw UsageError("'" + std::string(text) + "' is a sequence, not a function");
    }
    auto [w, rest] = detail::split_word(text);
    const std::string head = detail::lower(w);
    if (head == "diff" || head == "deriv") return derivative(function_of(rest), cfg());
    if (head == "antider") return antiderivative(function_of(rest)).particular;
    Expr e = parse_expr(text);
    return from_expr(e);
  }

  VirtualSequence sequence_of(std::string_view text) {
    text = detail::trim(text);
    if (text.empty()) throw UsageError("missing sequence");
    if (auto b = bound(text)) {
      if (auto q = std::get_if<VirtualSequence>(b)) return *q;
      if (auto v = std::get_if<VirtualNumber>(b)) return constant_sequence(*v);
      throw UsageError("'" + std::string(text) + "' is a function, not a sequence");
    }
    auto [w, rest] = detail::split_word(text);
    if (detail::lower(w) == "partition") {
      auto [a, b] = two_numbers(rest);
      return fine_partition(reduce(a, cfg()), reduce(b, cfg()));
    }
    return sequence_from(parse_expr(text));
  }

  /// "A B" → two numbers. A bound name or the longest expression prefix is A.
  std::pair<VirtualNumber, VirtualNumber> two_numbers(std::string_view text) {
    auto [a, b] = split_two(text);
    return {number_of(a), number_of(b)};
  }

  std::pair<std::string_view, std::string_view> split_two(std::string_view text) const {
    text = detail::trim(text);
    if (auto c = detail::split_comma(text)) {
      if (c->first.empty() || c->second.empty()) throw UsageError("empty operand around ','");
      return *c;
    }
    auto [w, rest] = detail::split_word(text);
    if (bound(w) && !rest.empty()) return {w, rest};
    ParseContext ctx{[&](std::string_view n) { return lookup(n, {}); }};
    auto [e, pos] = parse_prefix(text, &ctx);
    (void)e;
    std::string_view a = detail::trim(text.substr(0, pos)), b = detail::trim(text.substr(pos));
    if (b.empty()) throw UsageError("expected two operands (separate them with ',' when ambiguous)");
    return {a, b};
  }

  VirtualNumber integral_of(std::string_view rest) {
    constexpr std::string_view usage = "int F from A to B";
    auto [f, limits] = detail::require_keyword(rest, "from", usage);
    auto [a, b] = detail::require_keyword(limits, "to", usage);
    return integrate(function_of(f), number_of(a), number_of(b), quad(), cfg());
  }

  VirtualNumber eval_of(std::string_view rest) {
    auto [f, p] = detail::require_keyword(rest, "at", "eval F at P");
    return evaluate(function_of(f), number_of(p), cfg());
  }

  /// True when text names or denotes a function rather than a number.
  bool is_function_text(std::string_view text) const {
    text = detail::trim(text);
    if (auto b = bound(text)) return std::holds_alternative<VirtualFunction>(*b);
    const std::string head = detail::lower(detail::split_word(text).first);
    if (head == "diff" || head == "deriv" || head == "antider") return true;
    if (head == "int" || head == "sum" || head == "riemann" || head == "reduce" || head == "eval") return false;
    try {
      return depends_on(parse_expr(text), Var::Arg);
    } catch (const std::exception&) {
      return false;
    }
  }

  Verdict equal(std::string_view text) {
    auto [a, b] = split_two(text);
    if (is_function_text(a) || is_function_text(b)) return function_equal(function_of(a), function_of(b), cfg());
    return end_equal(number_of(a), number_of(b), cfg());
  }

  VirtualNumber sum_of(std::string_view rest) {
    auto [seq, upper] = detail::require_keyword(rest, "to", "sum SEQ to K");
    return partial_sum(sequence_of(seq), number_of(upper), cfg());
  }

  VirtualNumber riemann_of(std::string_view rest) {
    constexpr std::string_view usage = "riemann F from a to b";
    auto [f, limits] = detail::require_keyword(rest, "from", usage);
    auto [a, b] = detail::require_keyword(limits, "to", usage);
    Expr fe = parse_expr(f);
    return riemann_sum_integral(fe, reduce(number_of(a), cfg()), reduce(number_of(b), cfg()), s_.opts.tag, cfg());
  }

  // -- records -------------------------------------------------------------

  void verdict(OutputRecord& rec, const Verdict& v) const {
    rec.kind = RecordKind::Verdict;
    rec.payload = detail::verdict_payload(v);
    rec.evidence = v.evidence;
  }

  /// A number, with its limit when it has one worth reporting. Sums and
  /// integrals always carry `reduced`, even when they fold to a constant.
  void number(OutputRecord& rec, const VirtualNumber& v, bool always_reduce = false) const {
    rec.kind = RecordKind::Value;
    rec.payload = Json{{"value", v.to_string()}};
    if (v.period() == Index{1} && v.expr()) {
      auto x = as_number(simplify(*v.expr()));
      if (!x) {
        Value c = evaluate_at(*v.expr(), Bindings::at(1));
        if (c.is_finite()) x = c.raw();
      }
      if (x) {
        rec.payload["value"] = *x;
        if (always_reduce) rec.payload["reduced"] = *x;
      }
      return;
    }
    if (auto p = v.period()) {
      rec.payload["period"] = *p;
      return;
    }
    LimitResult lr = try_limit(v, cfg());
    rec.payload["limit"] = lr.describe();
    if (auto c = lr.converged())
      rec.payload["reduced"] = std::fabs(c->value) <= cfg().limit_tol * 1e-3 ? 0.0 : c->value;
    rec.payload["class"] = to_string(classify(v, cfg()));
    rec.evidence = lr.evidence;
  }

  void text_value(OutputRecord& rec, const std::string& text) const {
    rec.kind = RecordKind::Value;
    rec.payload = Json{{"value", text}};
  }

  // -- dispatch ------------------------------------------------------------

  void command(std::string_view line, OutputRecord& rec) {
    auto [w, rest] = detail::split_word(line);
    const std::string head = detail::lower(w);
    if (head.starts_with(":")) return meta(head, rest, rec);
    if (head == "let") return let(rest, rec);
    if (head == "eq") return verdict(rec, equal(rest));
    if (head == "eval") return number(rec, eval_of(rest));
    if (head == "near" || head == "adj") {
      auto [a, b] = two_numbers(rest);
      return verdict(rec, head == "near" ? near(a, b, cfg()) : adjacent(a, b, cfg()));
    }
    if (head == "cmp") return compare(rest, rec);
    if (head == "class") return text_value(rec, to_string(classify(number_of(rest), cfg())));
    if (head == "diff" || head == "deriv") return diff(rest, rec);
    if (head == "cont") {
      if (auto at = detail::split_keyword(rest, "at"))
        return verdict(rec, continuous_at(function_of(at->first), number_of(at->second), cfg()));
      return verdict(rec, is_continuous(function_of(rest), cfg()));
    }
    if (head == "defined") {
      auto [f, p] = detail::require_keyword(rest, "at", "defined F at P");
      return verdict(rec, defined_at(function_of(f), number_of(p), cfg()));
    }
    if (head == "int") return number(rec, integral_of(rest), true);
    if (head == "sum") return number(rec, sum_of(rest), true);
    if (head == "riemann") return number(rec, riemann_of(rest), true);
    if (head == "reduce") return reduce_cmd(rest, rec);
    if (head == "antider") return text_value(rec, antiderivative(function_of(rest)).to_string());
    if (head == "ftc1") return ftc1(rest, rec);
    if (head == "ftc2") return ftc2(rest, rec);
    if (head == "partition") return partition(rest, rec);
    if (head == "assert") return check(rest, rec);
    if (line.empty()) throw UsageError("empty command");
    return bare(line, rec);
  }

  void let(std::string_view rest, OutputRecord& rec) {
    auto eq = rest.find('=');
    if (eq == std::string_view::npos) throw UsageError("usage: let NAME = EXPR  or  let NAME(ξ) = EXPR");
    std::string_view lhs = detail::trim(rest.substr(0, eq)), rhs = detail::trim(rest.substr(eq + 1));
    if (rhs.empty()) throw UsageError("missing definition after '='");
    std::string name(lhs);
    std::optional<std::string> param;
    if (auto open = lhs.find('('); open != std::string_view::npos) {
      if (lhs.back() != ')') throw UsageError("malformed parameter list in '" + std::string(lhs) + "'");
      name = std::string(detail::trim(lhs.substr(0, open)));
      param = std::string(detail::trim(lhs.substr(open + 1, lhs.size() - open - 2)));
    }
    check_name(name);

    Binding b = lift(0);
    if (param) {
      // The parameter may be spelled ξ or k, or any fresh name standing for one.
      const bool builtin = parse_is_builtin(*param);
      const Expr p = builtin ? parse(*param) : arg_var();
      const bool seq = p == pos_var();
      if (builtin && !seq && p != arg_var()) throw UsageError("parameter must be ξ, k or a fresh name");
      std::map<std::string, Definition> params;
      if (!builtin) params[*param] = Definition{Definition::Kind::Number, arg_var()};
      Expr body = parse_expr(rhs, params);
      if (seq) b = sequence_from(body);
      else b = from_expr(body);
    } else {
      auto [w, tail] = detail::split_word(rhs);
      const std::string head = detail::lower(w);
      if (head == "diff" || head == "deriv" || head == "antider") {
        b = function_of(rhs);
      } else if (head == "partition") {
        b = sequence_of(rhs);
      } else if (bound(rhs)) {
        b = *bound(rhs);
      } else if (head == "int" || head == "sum" || head == "riemann" || head == "reduce") {
        b = number_of(rhs);
      } else {
        Expr e = parse_expr(rhs);
        if (depends_on(e, Var::Pos)) b = sequence_from(e);
        else if (depends_on(e, Var::Arg)) b = from_expr(e);
        else b = construct(e, cfg().schedule);
      }
    }
    s_.names.insert_or_assign(name, b);
    rec.kind = RecordKind::Definition;
    std::string kind = std::holds_alternative<VirtualNumber>(b) ? "number"
                       : std::holds_alternative<VirtualFunction>(b) ? "function"
                                                                     : "sequence";
    std::string shown = std::visit([](const auto& x) { return x.to_string(); }, b);
    rec.payload = Json{{"name", name}, {"kind", kind}, {"value", shown}};
  }

  static bool parse_is_builtin(const std::string& s) {
    try {
      parse(s);
      return true;
    } catch (const ParseError&) {
      return false;
    }
  }

  void compare(std::string_view rest, OutputRecord& rec) {
    auto [a, b] = two_numbers(rest);
    Comparison c = end_compare(a, b, cfg());
    std::string rel = "unknown";
    if (c.lt.holds()) rel = "<";
    else if (c.gt.holds()) rel = ">";
    else if (c.le.holds() && c.ge.holds()) rel = "=";
    else if (c.le.holds()) rel = "≤";
    else if (c.ge.holds()) rel = "≥";
    else if (c.le.fails() && c.ge.fails()) rel = "incomparable";
    rec.kind = RecordKind::Value;
    rec.payload = Json{{"value", rel},
                       {"lt", to_string(c.lt.outcome)},
                       {"le", to_string(c.le.outcome)},
                       {"gt", to_string(c.gt.outcome)},
                       {"ge", to_string(c.ge.outcome)},
                       {"mode", to_string(conjunction({c.lt, c.gt}).mode)}};
    rec.evidence = c.lt.evidence;
  }

  void diff(std::string_view rest, OutputRecord& rec) {
    if (auto at = detail::split_keyword(rest, "at")) {
      Differentiability d = differentiability_status(function_of(at->first), number_of(at->second), cfg());
      verdict(rec, d.differentiable);
      rec.payload["status"] = d.summary();
      rec.payload["derivable"] = to_string(d.derivable.outcome);
      return;
    }
    text_value(rec, derivative(function_of(rest), cfg()).to_string());
  }

  void reduce_cmd(std::string_view rest, OutputRecord& rec) {
    auto [x, lr] = reduce_detailed(number_of(rest), cfg());
    rec.kind = RecordKind::Value;
    rec.payload = Json{{"value", x}};
    if (!lr.evidence.empty()) rec.payload["limit"] = lr.describe();
    rec.evidence = lr.evidence;
  }

  void ftc1(std::string_view rest, OutputRecord& rec) {
    constexpr std::string_view usage = "ftc1 F from A [to U] at X";
    auto [f, tail] = detail::require_keyword(rest, "from", usage);
    auto [limits, point] = detail::require_keyword(tail, "at", usage);
    std::string_view lower = limits;
    Expr upper = arg_var();
    if (auto to = detail::split_keyword(limits, "to")) {
      lower = to->first;
      upper = parse_expr(to->second);
    }
    FtcReport r = ftc_form1(function_of(f), number_of(lower), upper, number_of(point), quad(), cfg());
    verdict(rec, r.verdict);
    rec.payload["expected"] = r.rhs.to_string();
  }

  void ftc2(std::string_view rest, OutputRecord& rec) {
    constexpr std::string_view usage = "ftc2 F from A to B";
    auto [f, limits] = detail::require_keyword(rest, "from", usage);
    auto [a, b] = detail::require_keyword(limits, "to", usage);
    FtcReport r = ftc_form2(function_of(f), number_of(a), number_of(b), quad(), cfg());
    verdict(rec, r.verdict);
    rec.payload["primitive difference"] = r.rhs.to_string();
    try {
      rec.payload["reduced"] = reduce(r.rhs, cfg());
    } catch (const NotReducible&) {
    }
  }

  void partition(std::string_view rest, OutputRecord& rec) {
    auto [a, b] = two_numbers(rest);
    const double lo = reduce(a, cfg()), hi = reduce(b, cfg());
    VirtualSequence p = fine_partition(lo, hi);
    Verdict v = is_fine_partition(p, lo, hi, cfg());
    verdict(rec, v);
    rec.payload["sequence"] = p.to_string();
  }

  /// assert holds|fails|unknown CMD, assert error CMD, assert NUMBER [± TOL] CMD,
  /// assert "TEXT" CMD.
  void check(std::string_view rest, OutputRecord& rec) {
    ++s_.checks;
    auto [want, cmd] = detail::split_word(rest);
    std::string expect(want);
    std::optional<double> tol;
    if (!want.empty() && want.front() == '"') {
      auto close = rest.find('"', 1);
      if (close == std::string_view::npos) throw UsageError("unterminated string in assert");
      expect = std::string(rest.substr(1, close - 1));
      cmd = detail::trim(rest.substr(close + 1));
    } else if (auto [t, after] = detail::split_word(cmd); t == "±" || t == "+-") {
      auto [tv, inner] = detail::split_word(after);
      tol = detail::parse_double(tv);
      cmd = inner;
    }
    if (cmd.empty()) throw UsageError("usage: assert holds|fails|unknown|error|NUMBER|\"TEXT\" COMMAND");
    OutputRecord inner;
    inner.input = std::string(cmd);
    try {
      command(cmd, inner);
    } catch (const std::exception& e) {
      inner.kind = RecordKind::Error;
      inner.payload = Json{{"message", e.what()}};
    }
    std::string got;
    bool ok = false;
    const std::string w = detail::lower(expect);
    if (!want.empty() && want.front() == '"') {
      got = inner.payload.contains("value") ? plain_scalar(inner.payload["value"]) : to_string(inner.kind);
      ok = got == expect;
    } else if (w == "holds" || w == "fails" || w == "unknown") {
      got = inner.kind == RecordKind::Verdict ? inner.payload["outcome"].get<std::string>() : to_string(inner.kind);
      ok = got == w;
    } else if (w == "error") {
      got = to_string(inner.kind);
      ok = inner.kind == RecordKind::Error;
    } else {
      const double x = detail::parse_double(expect);
      const double t = tol.value_or(cfg().limit_tol * std::max(1.0, std::fabs(x)));
      got = inner.payload.contains("value") ? plain_scalar(inner.payload["value"]) : to_string(inner.kind);
      ok = inner.kind == RecordKind::Value && inner.payload["value"].is_number() &&
           std::fabs(inner.payload["value"].get<double>() - x) <= t;
    }
    if (inner.kind == RecordKind::Error && w != "error") got += " (" + inner.payload.value("message", "") + ")";
    if (!ok) {
      ++s_.failed_checks;
      throw UsageError("check failed: expected " + expect + ", got " + got);
    }
    rec.kind = RecordKind::Verdict;
    rec.payload = Json{{"outcome", "holds"},
                       {"mode", inner.payload.value("mode", std::string("symbolic"))},
                       {"witness", nullptr},
                       {"note", "check passed: " + std::string(cmd) + " → " + got}};
    rec.evidence = inner.evidence;
  }

  void bare(std::string_view line, OutputRecord& rec) {
    if (auto b = bound(line)) {
      if (auto v = std::get_if<VirtualNumber>(b)) return number(rec, *v);
      return text_value(rec, std::visit([](const auto& x) { return x.to_string(); }, *b));
    }
    Expr e = parse_expr(line);
    if (depends_on(e, Var::Arg) && depends_on(e, Var::Pos))
      throw UsageError("an expression may use ξ or k, not both");
    if (depends_on(e, Var::Arg)) return text_value(rec, from_expr(simplify(e)).to_string());
    if (depends_on(e, Var::Pos)) return text_value(rec, sequence_from(e).to_string());
    number(rec, construct(e, cfg().schedule));
  }

  void meta(const std::string& head, std::string_view rest, OutputRecord& rec) {
    if (head == ":quit" || head == ":q") {
      s_.quit = true;
      return text_value(rec, "bye");
    }
    if (head == ":config") return configure(rest, rec);
    if (head == ":show") return show(rec);
    if (head == ":summary") {
      const int n = s_.checks, bad = s_.failed_checks;
      if (bad) throw UsageError(std::to_string(bad) + " of " + std::to_string(n) + " checks failed");
      rec.kind = RecordKind::Value;
      rec.payload = Json{{"value", "all " + std::to_string(n) + " checks passed"}, {"checks", n}, {"failed", 0}};
      return;
    }
    throw UsageError("unknown meta command '" + head + "' (try :config, :show, :summary, :quit)");
  }

  void configure(std::string_view rest, OutputRecord& rec) {
    auto [key, value] = detail::split_word(rest);
    const std::string k = detail::lower(key);
    if (value.empty()) throw UsageError("usage: :config KEY VALUE");
    Options o = s_.opts;
    if (k == "schedule") {
      o.settings.schedule = parse_schedule(value, o.settings.schedule);
    } else if (k == "per-stage" || k == "per_stage") {
      o.settings.schedule.per_stage = static_cast<unsigned>(detail::parse_double(value));
    } else if (k == "tol") {
      o.settings.limit_tol = positive(value);
    } else if (k == "eq-tol" || k == "eqtol") {
      o.settings.equal_rel_tol = positive(value);
    } else if (k == "quad-tol" || k == "quadtol") {
      o.quad.abs_tol = o.quad.rel_tol = positive(value);
    } else if (k == "tag") {
      const std::string t = detail::lower(value);
      if (t == "right") o.tag = Tag::Right;
      else if (t == "left") o.tag = Tag::Left;
      else if (t == "mid") o.tag = Tag::Mid;
      else throw UsageError("tag must be right, left or mid");
    } else if (k == "output") {
      const std::string t = detail::lower(value);
      if (t != "json" && t != "plain") throw UsageError("output must be json or plain");
      o.json = t == "json";
    } else {
      throw UsageError("unknown setting '" + std::string(key) + "' (schedule, per-stage, tol, eq-tol, quad-tol, tag, output)");
    }
    o.settings.schedule.validate();
    o.quad.validate();
    s_.opts = o;
    rec.kind = RecordKind::Value;
    rec.payload = Json{{"value", "ok"}, {"setting", k}};
  }

  void show(OutputRecord& rec) const {
    const auto& sc = cfg().schedule;
    Json names = Json::object();
    for (const auto& [n, b] : s_.names) names[n] = std::visit([](const auto& x) { return x.to_string(); }, b);
    rec.kind = RecordKind::Value;
    rec.payload = Json{{"value", "schedule " + std::to_string(sc.start) + "," + format_number(sc.growth) + "," +
                                     std::to_string(sc.stages) + " (max index " + std::to_string(sc.max_index()) + ")"},
                       {"tol", cfg().limit_tol},
                       {"eq-tol", cfg().equal_rel_tol},
                       {"quad-tol", quad().rel_tol},
                       {"tag", to_string(s_.opts.tag)},
                       {"names", names}};
  }

  static double positive(std::string_view v) {
    double x = detail::parse_double(v);
    if (!(x > 0)) throw UsageError("tolerance must be positive");
    return x;
  }

public:
  /// "N0,RATIO,STEPS".
  static SamplingSchedule parse_schedule(std::string_view text, SamplingSchedule base = {}) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i)
      if (i == text.size() || text[i] == ',') {
        parts.push_back(detail::trim(text.substr(start, i - start)));
        start = i + 1;
      }
    if (parts.size() != 3) throw UsageError("schedule must be N0,RATIO,STEPS");
    const double n0 = detail::parse_double(parts[0]), steps = detail::parse_double(parts[2]);
    if (n0 < 1 || n0 != std::floor(n0) || steps != std::floor(steps) || steps < 2)
      throw UsageError("schedule N0 and STEPS must be whole numbers (N0 >= 1, STEPS >= 2)");
    base.start = static_cast<Index>(n0);
    base.growth = detail::parse_double(parts[1]);
    base.stages = static_cast<unsigned>(steps);
    base.validate();
    if (base.max_index() > 1'000'000) throw UsageError("schedule reaches past index 10^6");
    return base;
  }

private:
  SessionState& s_;
};

/// One line in, at most one record out (blank lines and comments give none).
inline std::optional<OutputRecord> repl_eval_line(SessionState& state, std::string_view line) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  line = detail::trim(line);
  if (line.empty()) return std::nullopt;
  return Interpreter(state).run(line);
}

inline void emit(const SessionState& state, const OutputRecord& r, std::ostream& out, bool echo) {
  if (state.opts.json) {
    out << export_json(r) << '\n';
    return;
  }
  if (echo) out << "> " << r.input << '\n';
  out << format_plain(r) << '\n';
}

/// Runs every line of `in`; returns 1 if any record was an error, else 0.
inline int run_stream(SessionState& state, std::istream& in, std::ostream& out, bool echo = true) {
  int errors = 0;
  std::string line;
  while (!state.quit && std::getline(in, line)) {
    auto rec = repl_eval_line(state, line);
    if (!rec) continue;
    errors += rec->kind == RecordKind::Error;
    emit(state, *rec, out, echo);
  }
  out.flush();
  return errors ? 1 : 0;
}

/// Executes a script in a fresh session. Missing file → 2.
inline int run_script(const std::string& path, const Options& opts, std::ostream& out, std::ostream& err) {
  std::ifstream f(path);
  if (!f) {
    err << "vcalc: cannot open script '" << path << "'\n";
    return 2;
  }
  SessionState state(opts);
  return run_stream(state, f, out);
}

}  // namespace vcalc::cli
