#pragma once

// Spectral amplitudes f(kx, ky, kz) for the angular-spectrum integral.
//
// Builtins carry closed-form fields (weyl, constant, gaussian). User spectra
// are written in a small infix language:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' ['-' | '+'] INTEGER)?
//   primary := NUMBER | IDENT | FUNC '(' expr ')' | '(' expr ')'
//
// Variables: kx ky kz k0.  Constants: i pi.  Functions: exp sqrt sin cos.
// Exponents are integers only; sqrt is the principal branch. kz is always
// an input: the evaluator never chooses a branch of its own.

#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "asx/error.hpp"

namespace asx {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Expression tree

namespace expr {

enum class Var { kx, ky, kz, k0 };
enum class Func { exp, sqrt, sin, cos };
enum class BinOp { add, sub, mul, div };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
  double value;
};
struct ImagUnit {};
struct Pi {};
struct Variable {
  Var var;
};
struct Negate {
  NodePtr operand;
};
struct Binary {
  BinOp op;
  NodePtr lhs, rhs;
};
struct Power {
  NodePtr base;
  int exponent;
};
struct Call {
  Func func;
  NodePtr arg;
};

struct Node {
  std::variant<Number, ImagUnit, Pi, Variable, Negate, Binary, Power, Call> v;
};

template <typename T>
NodePtr make(T&& alt) {
  return std::make_shared<const Node>(Node{std::forward<T>(alt)});
}

struct Point {
  cplx kx, ky, kz;
  double k0;
};

inline cplx int_pow(cplx base, int n) {
  if (n == 0) return 1.0;
  const bool inv = n < 0;
  std::int64_t e = n < 0 ? -static_cast<std::int64_t>(n) : n;
  cplx result = 1.0, b = base;
  bool first = true;
  while (e > 0) {
    if (e & 1) {
      result = first ? b : result * b;
      first = false;
    }
    e >>= 1;
    if (e > 0) b *= b;
  }
  if (inv) {
    if (result == cplx(0.0)) throw EvalError("zero raised to a negative power");
    return 1.0 / result;
  }
  return result;
}

inline cplx eval(const Node& n, const Point& at) {
  struct Visitor {
    const Point& at;
    cplx operator()(const Number& x) const { return x.value; }
    cplx operator()(const ImagUnit&) const { return {0.0, 1.0}; }
    cplx operator()(const Pi&) const { return std::numbers::pi; }
    cplx operator()(const Variable& x) const {
      switch (x.var) {
        case Var::kx: return at.kx;
        case Var::ky: return at.ky;
        case Var::kz: return at.kz;
        case Var::k0: return at.k0;
      }
      return 0.0;
    }
    // 0 - v rather than -v: a negated real keeps a +0 imaginary part, so
    // sqrt(-4) is 2i and not -2i
    cplx operator()(const Negate& x) const { return cplx(0.0) - eval(*x.operand, at); }
    cplx operator()(const Binary& x) const {
      const cplx l = eval(*x.lhs, at), r = eval(*x.rhs, at);
      switch (x.op) {
        case BinOp::add: return l + r;
        case BinOp::sub: return l - r;
        case BinOp::mul: return l * r;
        case BinOp::div:
          if (r == cplx(0.0)) throw EvalError("division by zero in spectrum expression");
          return l / r;
      }
      return 0.0;
    }
    cplx operator()(const Power& x) const { return int_pow(eval(*x.base, at), x.exponent); }
    cplx operator()(const Call& x) const {
      const cplx a = eval(*x.arg, at);
      switch (x.func) {
        case Func::exp: return std::exp(a);
        case Func::sqrt: return std::sqrt(a);
        case Func::sin: return std::sin(a);
        case Func::cos: return std::cos(a);
      }
      return 0.0;
    }
  };
  return std::visit(Visitor{at}, n.v);
}

inline bool is_constant(const Node& n) {
  struct Visitor {
    bool operator()(const Variable&) const { return false; }
    bool operator()(const Negate& x) const { return is_constant(*x.operand); }
    bool operator()(const Binary& x) const { return is_constant(*x.lhs) && is_constant(*x.rhs); }
    bool operator()(const Power& x) const { return is_constant(*x.base); }
    bool operator()(const Call& x) const { return is_constant(*x.arg); }
    bool operator()(const Number&) const { return true; }
    bool operator()(const ImagUnit&) const { return true; }
    bool operator()(const Pi&) const { return true; }
  };
  return std::visit(Visitor{}, n.v);
}

inline std::string_view name(Var v) {
  switch (v) {
    case Var::kx: return "kx";
    case Var::ky: return "ky";
    case Var::kz: return "kz";
    case Var::k0: return "k0";
  }
  return "?";
}

inline std::string_view name(Func f) {
  switch (f) {
    case Func::exp: return "exp";
    case Func::sqrt: return "sqrt";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
  }
  return "?";
}

// Binding strength used by the printer: higher binds tighter.
inline int precedence(const Node& n) {
  if (const auto* b = std::get_if<Binary>(&n.v)) return (b->op == BinOp::add || b->op == BinOp::sub) ? 1 : 2;
  if (std::holds_alternative<Negate>(n.v)) return 3;
  if (std::holds_alternative<Power>(n.v)) return 4;
  return 5;
}

inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// Canonical text: minimal spaces, parentheses exactly where the tree needs them.
inline std::string print(const Node& n) {
  auto wrap = [](const Node& child, bool paren) {
    std::string s = print(child);
    return paren ? "(" + s + ")" : s;
  };
  struct Visitor {
    decltype(wrap)& w;
    std::string operator()(const Number& x) const { return format_number(x.value); }
    std::string operator()(const ImagUnit&) const { return "i"; }
    std::string operator()(const Pi&) const { return "pi"; }
    std::string operator()(const Variable& x) const { return std::string(name(x.var)); }
    std::string operator()(const Negate& x) const { return "-" + w(*x.operand, precedence(*x.operand) <= 3); }
    std::string operator()(const Binary& x) const {
      const int p = (x.op == BinOp::add || x.op == BinOp::sub) ? 1 : 2;
      const char* sym = x.op == BinOp::add ? " + " : x.op == BinOp::sub ? " - " : x.op == BinOp::mul ? "*" : "/";
      return w(*x.lhs, precedence(*x.lhs) < p) + sym + w(*x.rhs, precedence(*x.rhs) <= p);
    }
    std::string operator()(const Power& x) const {
      return w(*x.base, precedence(*x.base) <= 4) + "^" + std::to_string(x.exponent);
    }
    std::string operator()(const Call& x) const { return std::string(name(x.func)) + "(" + print(*x.arg) + ")"; }
  };
  return std::visit(Visitor{wrap}, n.v);
}

}  // namespace expr

// ---------------------------------------------------------------------------
// Parser

struct ParseError : Error {
  enum class Kind { syntax, unknown_identifier, unbalanced_paren, zero_division, empty };

  ParseError(Kind k, std::size_t col, std::string msg, std::vector<std::string> expect = {})
      : Error(describe(k, col, msg)), kind(k), column(col), detail(std::move(msg)), expected(std::move(expect)) {}

  Kind kind;
  std::size_t column;  // 1-based
  std::string detail;
  std::vector<std::string> expected;

  static std::string_view kind_name(Kind k) {
    switch (k) {
      case Kind::syntax: return "syntax";
      case Kind::unknown_identifier: return "unknown-identifier";
      case Kind::unbalanced_paren: return "unbalanced-parenthesis";
      case Kind::zero_division: return "zero-division";
      case Kind::empty: return "empty";
    }
    return "?";
  }

 private:
  static std::string describe(Kind k, std::size_t col, const std::string& msg) {
    return std::string(kind_name(k)) + " error at column " + std::to_string(col) + ": " + msg;
  }
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  expr::NodePtr parse() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(ParseError::Kind::empty, 1, "empty expression", {"expression"});
    auto root = parse_expr();
    skip_ws();
    if (pos_ != src_.size()) {
      if (src_[pos_] == ')')
        throw ParseError(ParseError::Kind::unbalanced_paren, col(), "unmatched ')'", {"operator", "end of input"});
      throw ParseError(ParseError::Kind::syntax, col(), "unexpected '" + std::string(1, src_[pos_]) + "'",
                       {"operator", "end of input"});
    }
    return root;
  }

 private:
  std::size_t col() const { return pos_ + 1; }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail_operand() {
    skip_ws();
    const std::vector<std::string> expect = {"number", "identifier", "'('", "'-'"};
    if (pos_ == src_.size())
      throw ParseError(ParseError::Kind::syntax, col(), "unexpected end of input", expect);
    if (src_[pos_] == ')') throw ParseError(ParseError::Kind::syntax, col(), "unexpected ')'", expect);
    throw ParseError(ParseError::Kind::syntax, col(), "unexpected '" + std::string(1, src_[pos_]) + "'", expect);
  }

  expr::NodePtr parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = expr::make(expr::Binary{expr::BinOp::add, lhs, parse_term()});
      } else if (accept('-')) {
        lhs = expr::make(expr::Binary{expr::BinOp::sub, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  expr::NodePtr parse_term() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = expr::make(expr::Binary{expr::BinOp::mul, lhs, parse_unary()});
      } else {
        skip_ws();
        const std::size_t at = col();
        if (!accept('/')) return lhs;
        auto rhs = parse_unary();
        if (expr::is_constant(*rhs)) {
          cplx d;
          try {
            d = expr::eval(*rhs, {});
          } catch (const EvalError&) {
            d = 0.0;
          }
          if (d == cplx(0.0))
            throw ParseError(ParseError::Kind::zero_division, at, "constant zero denominator");
        }
        lhs = expr::make(expr::Binary{expr::BinOp::div, lhs, rhs});
      }
    }
  }

  expr::NodePtr parse_unary() {
    if (accept('-')) return expr::make(expr::Negate{parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  expr::NodePtr parse_power() {
    auto base = parse_primary();
    if (!accept('^')) return base;
    bool neg = false;
    if (accept('-')) {
      neg = true;
    } else {
      accept('+');
    }
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    if (start == pos_ || (pos_ < src_.size() && (src_[pos_] == '.' || src_[pos_] == 'e' || src_[pos_] == 'E'))) {
      pos_ = start;
      throw ParseError(ParseError::Kind::syntax, col(), "exponent must be an integer literal", {"integer"});
    }
    int value = 0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc()) {
      pos_ = start;
      throw ParseError(ParseError::Kind::syntax, col(), "exponent out of range", {"integer"});
    }
    return expr::make(expr::Power{base, neg ? -value : value});
  }

  expr::NodePtr parse_primary() {
    skip_ws();
    if (pos_ == src_.size()) fail_operand();
    const char c = src_[pos_];
    if (c == '(') {
      const std::size_t open = col();
      ++pos_;
      auto inner = parse_expr();
      if (!accept(')')) {
        skip_ws();
        if (pos_ == src_.size())
          throw ParseError(ParseError::Kind::unbalanced_paren, open, "'(' is never closed", {"')'"});
        throw ParseError(ParseError::Kind::syntax, col(), "unexpected '" + std::string(1, src_[pos_]) + "'",
                         {"operator", "')'"});
      }
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail_operand();
  }

  expr::NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_ || !std::isfinite(value)) {
      pos_ = start;
      throw ParseError(ParseError::Kind::syntax, col(), "malformed number", {"number"});
    }
    return expr::make(expr::Number{value});
  }

  expr::NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view id = src_.substr(start, pos_ - start);
    if (id == "kx") return expr::make(expr::Variable{expr::Var::kx});
    if (id == "ky") return expr::make(expr::Variable{expr::Var::ky});
    if (id == "kz") return expr::make(expr::Variable{expr::Var::kz});
    if (id == "k0") return expr::make(expr::Variable{expr::Var::k0});
    if (id == "i") return expr::make(expr::ImagUnit{});
    if (id == "pi") return expr::make(expr::Pi{});
    std::optional<expr::Func> fn;
    if (id == "exp") fn = expr::Func::exp;
    if (id == "sqrt") fn = expr::Func::sqrt;
    if (id == "sin") fn = expr::Func::sin;
    if (id == "cos") fn = expr::Func::cos;
    if (!fn)
      throw ParseError(ParseError::Kind::unknown_identifier, start + 1, "unknown identifier '" + std::string(id) + "'",
                       {"kx", "ky", "kz", "k0", "i", "pi", "exp", "sqrt", "sin", "cos"});
    skip_ws();
    if (pos_ == src_.size() || src_[pos_] != '(')
      throw ParseError(ParseError::Kind::syntax, col(), "function '" + std::string(id) + "' needs an argument",
                       {"'('"});
    const std::size_t open = col();
    ++pos_;
    auto arg = parse_expr();
    if (!accept(')')) {
      skip_ws();
      if (pos_ == src_.size())
        throw ParseError(ParseError::Kind::unbalanced_paren, open, "'(' is never closed", {"')'"});
      throw ParseError(ParseError::Kind::syntax, col(), "unexpected '" + std::string(1, src_[pos_]) + "'",
                       {"operator", "')'"});
    }
    return expr::make(expr::Call{*fn, arg});
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// SpectrumFunction

class SpectrumFunction {
 public:
  enum class Builtin { weyl, constant, gaussian };

  /// i / (2 pi kz): the outgoing spherical wave exp(i k0 r)/r.
  static SpectrumFunction weyl() { return SpectrumFunction(BuiltinSpec{Builtin::weyl, {}}); }
  static SpectrumFunction constant() { return SpectrumFunction(BuiltinSpec{Builtin::constant, {}}); }
  /// exp(-w^2 (kx^2 + ky^2) / 4); without w, the waist defaults to 2/k0.
  static SpectrumFunction gaussian(std::optional<double> waist = std::nullopt) {
    if (waist && !(*waist > 0.0 && std::isfinite(*waist))) throw ConfigError("gaussian waist must be positive");
    return SpectrumFunction(BuiltinSpec{Builtin::gaussian, waist});
  }

  static SpectrumFunction from_expression(expr::NodePtr root) { return SpectrumFunction(std::move(root)); }

  /// Looks up "weyl", "constant", "gaussian" or "gaussian(w)".
  static SpectrumFunction builtin(std::string_view spec);

  /// f scaled by a complex factor (used for linearity checks).
  SpectrumFunction scaled(cplx factor) const {
    SpectrumFunction s = *this;
    s.scale_ *= factor;
    return s;
  }

  cplx evaluate(cplx kx, cplx ky, cplx kz, double k0) const {
    cplx v;
    if (const auto* b = std::get_if<BuiltinSpec>(&kind_)) {
      switch (b->which) {
        case Builtin::weyl:
          if (kz == cplx(0.0)) throw EvalError("weyl spectrum is singular at kz = 0");
          v = cplx(0.0, 1.0) / (2.0 * std::numbers::pi * kz);
          break;
        case Builtin::constant:
          v = 1.0;
          break;
        case Builtin::gaussian: {
          const double w = b->waist ? *b->waist : 2.0 / k0;
          v = std::exp(-(w * w) * (kx * kx + ky * ky) / 4.0);
          break;
        }
      }
    } else {
      v = expr::eval(*std::get<expr::NodePtr>(kind_), {kx, ky, kz, k0});
    }
    if (scale_ != cplx(1.0)) v *= scale_;
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw EvalError("spectrum evaluated to a non-finite value");
    return v;
  }

  /// True when f depends on (kx, ky) only through kx^2 + ky^2 (builtins).
  bool radially_symmetric() const { return std::holds_alternative<BuiltinSpec>(kind_); }

  bool is_builtin() const { return std::holds_alternative<BuiltinSpec>(kind_); }

  /// Builtin name, or the canonical expression text.
  std::string describe() const {
    std::string base;
    if (const auto* b = std::get_if<BuiltinSpec>(&kind_)) {
      switch (b->which) {
        case Builtin::weyl: base = "weyl"; break;
        case Builtin::constant: base = "constant"; break;
        case Builtin::gaussian: base = b->waist ? "gaussian(" + expr::format_number(*b->waist) + ")" : "gaussian"; break;
      }
    } else {
      base = expr::print(*std::get<expr::NodePtr>(kind_));
    }
    return base;
  }

  const expr::Node* tree() const {
    const auto* p = std::get_if<expr::NodePtr>(&kind_);
    return p ? p->get() : nullptr;
  }

 private:
  struct BuiltinSpec {
    Builtin which;
    std::optional<double> waist;
  };

  explicit SpectrumFunction(BuiltinSpec b) : kind_(b) {}
  explicit SpectrumFunction(expr::NodePtr root) : kind_(std::move(root)) {}

  std::variant<BuiltinSpec, expr::NodePtr> kind_;
  cplx scale_{1.0};
};

inline SpectrumFunction parse_spectrum(std::string_view src) {
  return SpectrumFunction::from_expression(detail::Parser(src).parse());
}

inline SpectrumFunction SpectrumFunction::builtin(std::string_view spec) {
  if (spec == "weyl") return weyl();
  if (spec == "constant") return constant();
  if (spec == "gaussian") return gaussian();
  if (spec.starts_with("gaussian(") && spec.ends_with(")")) {
    const auto inner = spec.substr(9, spec.size() - 10);
    double w = 0.0;
    auto [ptr, ec] = std::from_chars(inner.data(), inner.data() + inner.size(), w);
    if (ec != std::errc() || ptr != inner.data() + inner.size())
      throw ConfigError("malformed gaussian waist in '" + std::string(spec) + "'");
    return gaussian(w);
  }
  throw ConfigError("unknown builtin spectrum '" + std::string(spec) + "' (expected weyl, constant, gaussian[(w)])");
}

inline cplx evaluate(const SpectrumFunction& f, cplx kx, cplx ky, cplx kz, double k0) {
  return f.evaluate(kx, ky, kz, k0);
}

}  // namespace asx
