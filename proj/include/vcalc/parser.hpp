#pragma once

/**
 * @file parser.hpp
 * @brief Recursive-descent parser for the expression language.
 *
 * Grammar (see docs/grammar.md for the full EBNF):
 *
 *   expr    := term (('+' | '-') term)*
 *   term    := unary (('*' | '/') unary | <adjacent> power)*
 *   unary   := '-' unary | power
 *   power   := primary ('^' unary)?
 *   primary := number | name | name '(' args ')' | '(' expr ')' | '|' expr '|'
 *            | 'piecewise' '(' branch (';' branch)* ')'
 *
 * Juxtaposition without whitespace ("2ξ", "π∂ξ") multiplies. Whitespace
 * ends an implicit product, which lets callers split "near sqrt(∂) 0" into
 * two expressions with parse_prefix().
 */

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "expr.hpp"

namespace vcalc {

struct ParseDiagnostic {
  std::size_t position = 0;
  std::string message;
  std::vector<std::string> expected;
};

class ParseError : public std::runtime_error {
public:
  explicit ParseError(ParseDiagnostic d)
      : std::runtime_error(format(d)), diagnostic_(std::move(d)) {}
  const ParseDiagnostic& diagnostic() const { return diagnostic_; }

private:
  static std::string format(const ParseDiagnostic& d) {
    std::string s = "parse error at " + std::to_string(d.position) + ": " + d.message;
    if (!d.expected.empty()) {
      s += " (expected ";
      for (std::size_t i = 0; i < d.expected.size(); ++i) {
        if (i) s += ", ";
        s += d.expected[i];
      }
      s += ')';
    }
    return s;
  }
  ParseDiagnostic diagnostic_;
};

/// User-supplied names. A Number or Function name is inlined; `f(x)`
/// substitutes x for ξ (Function) or for k (Sequence).
struct Definition {
  enum class Kind { Number, Function, Sequence } kind;
  Expr body;
};

struct ParseContext {
  std::function<std::optional<Definition>(std::string_view)> lookup;
};

namespace detail {

enum class Tok {
  End, Number, Name, Plus, Minus, Star, Slash, Caret, LParen, RParen, LBrack, RBrack, Bar, Comma,
  Colon, Semicolon, Less, LessEq, Equal, GreaterEq, Greater, Square, Cube
};

struct Token {
  Tok kind = Tok::End;
  std::size_t pos = 0;
  std::size_t end = 0;
  bool space_before = false;
  std::string text;
  double number = 0;
};

inline const char* describe(Tok t) {
  switch (t) {
    case Tok::End: return "end of input";
    case Tok::Number: return "number";
    case Tok::Name: return "name";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::LBrack: return "'['";
    case Tok::RBrack: return "']'";
    case Tok::Bar: return "'|'";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Semicolon: return "';'";
    case Tok::Less: return "'<'";
    case Tok::LessEq: return "'≤'";
    case Tok::Equal: return "'='";
    case Tok::GreaterEq: return "'≥'";
    case Tok::Greater: return "'>'";
    case Tok::Square: return "'²'";
    case Tok::Cube: return "'³'";
  }
  return "token";
}

class Lexer {
public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    Token t;
    std::size_t start = i_;
    while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r' || s_[i_] == '\n'))
      ++i_;
    t.space_before = i_ > start || i_ == 0;
    t.pos = i_;
    if (i_ >= s_.size()) {
      t.kind = Tok::End;
      t.end = i_;
      return t;
    }
    // Multi-byte symbols first.
    struct Sym {
      std::string_view text;
      Tok kind;
      const char* name;
    };
    static constexpr Sym syms[] = {
        {"∞", Tok::Name, "∞"},  {"∂", Tok::Name, "∂"},  {"π", Tok::Name, "π"},
        {"ξ", Tok::Name, "ξ"},  {"ν", Tok::Name, "ν"},  {"τ", Tok::Name, "τ"},
        {"−", Tok::Minus, ""},  {"·", Tok::Star, ""},   {"×", Tok::Star, ""},
        {"≤", Tok::LessEq, ""}, {"≥", Tok::GreaterEq, ""}, {"²", Tok::Square, ""},
        {"³", Tok::Cube, ""},   {"<=", Tok::LessEq, ""}, {">=", Tok::GreaterEq, ""},
        {"==", Tok::Equal, ""},
    };
    for (const auto& sym : syms) {
      if (s_.substr(i_).starts_with(sym.text)) {
        t.kind = sym.kind;
        t.text = sym.name;
        i_ += sym.text.size();
        t.end = i_;
        return t;
      }
    }
    const char c = s_[i_];
    if ((c >= '0' && c <= '9') || (c == '.' && i_ + 1 < s_.size() && isdigit(s_[i_ + 1]))) {
      std::size_t j = i_;
      while (j < s_.size() && isdigit(s_[j])) ++j;
      if (j < s_.size() && s_[j] == '.') {
        ++j;
        while (j < s_.size() && isdigit(s_[j])) ++j;
      }
      if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
        if (k < s_.size() && isdigit(s_[k])) {
          while (k < s_.size() && isdigit(s_[k])) ++k;
          j = k;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(s_.substr(i_, j - i_));
      t.number = std::stod(t.text);
      i_ = j;
      t.end = i_;
      return t;
    }
    if (isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i_;
      while (j < s_.size() && (isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_')) ++j;
      t.kind = Tok::Name;
      t.text = std::string(s_.substr(i_, j - i_));
      i_ = j;
      t.end = i_;
      return t;
    }
    ++i_;
    t.end = i_;
    switch (c) {
      case '+': t.kind = Tok::Plus; return t;
      case '-': t.kind = Tok::Minus; return t;
      case '*': t.kind = Tok::Star; return t;
      case '/': t.kind = Tok::Slash; return t;
      case '^': t.kind = Tok::Caret; return t;
      case '(': t.kind = Tok::LParen; return t;
      case ')': t.kind = Tok::RParen; return t;
      case '[': t.kind = Tok::LBrack; return t;
      case ']': t.kind = Tok::RBrack; return t;
      case '|': t.kind = Tok::Bar; return t;
      case ',': t.kind = Tok::Comma; return t;
      case ':': t.kind = Tok::Colon; return t;
      case ';': t.kind = Tok::Semicolon; return t;
      case '<': t.kind = Tok::Less; return t;
      case '=': t.kind = Tok::Equal; return t;
      case '>': t.kind = Tok::Greater; return t;
      default: break;
    }
    throw ParseError({t.pos, "unexpected character", {}});
  }

private:
  static bool isdigit(char c) { return c >= '0' && c <= '9'; }
  std::string_view s_;
  std::size_t i_ = 0;
};

class Parser {
public:
  Parser(std::string_view text, const ParseContext* ctx) : text_(text), lex_(text), ctx_(ctx) {
    advance();
  }

  Expr parse_all() {
    Expr e = parse_expr();
    if (cur_.kind != Tok::End)
      fail("unexpected " + std::string(describe(cur_.kind)), {"operator", "end of input"});
    return e;
  }

  std::pair<Expr, std::size_t> parse_prefix() {
    Expr e = parse_expr();
    return {e, cur_.pos};
  }

private:
  [[noreturn]] void fail(std::string msg, std::vector<std::string> expected) {
    throw ParseError({std::min(cur_.pos, text_.size()), std::move(msg), std::move(expected)});
  }

  void advance() { cur_ = lex_.next(); }

  void expect(Tok k) {
    if (cur_.kind != k) fail("unexpected " + std::string(describe(cur_.kind)), {describe(k)});
    advance();
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (cur_.kind == Tok::Plus || cur_.kind == Tok::Minus) {
      bool plus = cur_.kind == Tok::Plus;
      advance();
      Expr r = parse_term();
      e = plus ? e + r : e - r;
    }
    return e;
  }

  bool starts_primary(const Token& t) const {
    return t.kind == Tok::Number || t.kind == Tok::Name || t.kind == Tok::LParen;
  }

  Expr parse_term() {
    Expr e = parse_unary();
    for (;;) {
      if (cur_.kind == Tok::Star || cur_.kind == Tok::Slash) {
        bool mul = cur_.kind == Tok::Star;
        advance();
        Expr r = parse_unary();
        e = mul ? e * r : e / r;
      } else if (!cur_.space_before && starts_primary(cur_) && !keyword(cur_)) {
        e = e * parse_power();
      } else {
        return e;
      }
    }
  }

  static bool keyword(const Token& t) { return t.kind == Tok::Name && t.text == "default"; }

  Expr parse_unary() {
    if (cur_.kind == Tok::Minus) {
      advance();
      return -parse_unary();
    }
    if (cur_.kind == Tok::Plus) {
      advance();
      return parse_unary();
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    for (;;) {
      if (cur_.kind == Tok::Square || cur_.kind == Tok::Cube) {
        double p = cur_.kind == Tok::Square ? 2 : 3;
        advance();
        base = pow(base, lit(p));
        continue;
      }
      break;
    }
    if (cur_.kind == Tok::Caret) {
      advance();
      return pow(base, parse_unary());
    }
    return base;
  }

  std::vector<Expr> parse_args() {
    expect(Tok::LParen);
    std::vector<Expr> args;
    args.push_back(parse_expr());
    while (cur_.kind == Tok::Comma) {
      advance();
      args.push_back(parse_expr());
    }
    expect(Tok::RParen);
    return args;
  }

  Expr single_arg(const std::string& fn) {
    auto args = parse_args();
    if (args.size() != 1) fail(fn + " takes one argument", {});
    return args.front();
  }

  double signed_number() {
    bool neg = false;
    while (cur_.kind == Tok::Minus || cur_.kind == Tok::Plus) {
      neg ^= cur_.kind == Tok::Minus;
      advance();
    }
    if (cur_.kind != Tok::Number) fail("cycle entries must be numbers", {"number"});
    double v = cur_.number;
    advance();
    return neg ? -v : v;
  }

  Expr parse_piecewise() {
    expect(Tok::LParen);
    std::vector<BranchSpec> branches;
    std::optional<Expr> fallback;
    for (;;) {
      if (keyword(cur_)) {
        advance();
        expect(Tok::Colon);
        fallback = parse_expr();
      } else {
        if (fallback) fail("branch after default", {"')'"});
        Expr l = parse_expr();
        Rel rel;
        switch (cur_.kind) {
          case Tok::Less: rel = Rel::Lt; break;
          case Tok::LessEq: rel = Rel::Le; break;
          case Tok::Equal: rel = Rel::Eq; break;
          case Tok::GreaterEq: rel = Rel::Ge; break;
          case Tok::Greater: rel = Rel::Gt; break;
          default: fail("expected comparison in piecewise guard", {"<", "≤", "=", "≥", ">"});
        }
        advance();
        Expr r = parse_expr();
        expect(Tok::Colon);
        Expr v = parse_expr();
        branches.push_back({{l, rel, r}, v});
      }
      if (cur_.kind == Tok::Semicolon) {
        advance();
        continue;
      }
      expect(Tok::RParen);
      break;
    }
    if (branches.empty()) fail("piecewise needs at least one guarded branch", {});
    return piecewise(branches, fallback);
  }

  Expr parse_primary() {
    Token t = cur_;
    switch (t.kind) {
      case Tok::Number:
        advance();
        return lit(t.number);
      case Tok::LParen: {
        advance();
        Expr e = parse_expr();
        expect(Tok::RParen);
        return e;
      }
      case Tok::Bar: {
        advance();
        Expr e = parse_expr();
        expect(Tok::Bar);
        return unary(UnaryOp::Abs, e);
      }
      case Tok::LBrack: {
        // [a, b, ...] is shorthand for cycle(a, b, ...)
        advance();
        std::vector<double> values{signed_number()};
        while (cur_.kind == Tok::Comma) {
          advance();
          values.push_back(signed_number());
        }
        expect(Tok::RBrack);
        return cycle(std::move(values));
      }
      case Tok::Name: return parse_name();
      default:
        fail("unexpected " + std::string(describe(t.kind)), {"number", "name", "'('", "'['", "'|'"});
    }
  }

  Expr parse_name() {
    const Token t = cur_;
    const std::string& n = t.text;
    advance();
    if (n == "∞" || n == "inf" || n == "ν" || n == "nu") return index_var();
    if (n == "∂" || n == "del") return delta_expr();
    if (n == "π" || n == "pi") return constant(Constant::Pi);
    if (n == "e") return constant(Constant::E);
    if (n == "ξ" || n == "xi" || n == "τ" || n == "tau") return arg_var();
    if (n == "k") return pos_var();
    static const std::pair<const char*, UnaryOp> funcs[] = {
        {"abs", UnaryOp::Abs},   {"sqrt", UnaryOp::Sqrt},     {"exp", UnaryOp::Exp},
        {"ln", UnaryOp::Ln},     {"log", UnaryOp::Ln},        {"sin", UnaryOp::Sin},
        {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},       {"arctan", UnaryOp::Arctan},
        {"atan", UnaryOp::Arctan},
    };
    for (const auto& [name, op] : funcs)
      if (n == name) {
        if (cur_.kind != Tok::LParen) fail(n + " needs an argument list", {"'('"});
        return unary(op, single_arg(n));
      }
    if (n == "piecewise") return parse_piecewise();
    if (n == "cycle") {
      expect(Tok::LParen);
      std::vector<double> values{signed_number()};
      while (cur_.kind == Tok::Comma) {
        advance();
        values.push_back(signed_number());
      }
      expect(Tok::RParen);
      return cycle(std::move(values));
    }
    if (ctx_ && ctx_->lookup) {
      if (auto def = ctx_->lookup(n)) {
        if (def->kind != Definition::Kind::Number && cur_.kind == Tok::LParen && !cur_.space_before) {
          Expr a = single_arg(n);
          return substitute(def->body,
                            def->kind == Definition::Kind::Function ? Var::Arg : Var::Pos, a);
        }
        return def->body;
      }
    }
    throw ParseError({t.pos, "unknown identifier '" + n + "'", {}});
  }

  std::string_view text_;
  Lexer lex_;
  const ParseContext* ctx_;
  Token cur_;
};

}  // namespace detail

/// Parses a complete expression. Throws ParseError with a diagnostic.
inline Expr parse(std::string_view text, const ParseContext* ctx = nullptr) {
  return detail::Parser(text, ctx).parse_all();
}

/// Parses the longest expression prefix of `text`; returns the tree and the
/// byte offset where parsing stopped.
inline std::pair<Expr, std::size_t> parse_prefix(std::string_view text,
                                                 const ParseContext* ctx = nullptr) {
  return detail::Parser(text, ctx).parse_prefix();
}

}  // namespace vcalc
