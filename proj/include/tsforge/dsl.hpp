#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "tsforge/errors.hpp"
#include "tsforge/expr.hpp"

namespace tsforge {

// ============================================================================
// Equation text format
//
//   expr    = term { ("+" | "-") term }
//   term    = factor { ("*" | "/") factor }
//   factor  = "-" factor | power
//   power   = atom [ "^" factor ]
//   atom    = NUMBER | "t" | varref | func "(" expr ")" | agg | "(" expr ")"
//   varref  = "x" INT "[" "t" "-" INT "]"
//   agg     = ("integral" | "wsum" | "wmean") "(" "x" INT "," INT "," INT ")"
//   func    = sin | cos | tan | exp | log | sqrt | abs
//
// "^" binds tighter than unary minus ("-2^2" is -(2^2)); "*" and "/" bind
// tighter than "+" and "-"; same-level operators associate left. Whitespace
// is insignificant between tokens. Aggregate arguments are (variable,
// lag_from, lag_to) with lag_from > lag_to >= 1.
// ============================================================================

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, int var_count)
      : text_(text), var_count_(var_count) {}

  ExprPtr parse() {
    ExprPtr e = parse_expr();
    skip_ws();
    if (!at_end()) {
      fail(ParseError::Kind::Syntax, "unexpected trailing input");
    }
    return e;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_ws() {
    while (!at_end() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) {
      fail(ParseError::Kind::Syntax, std::string("expected ") + what);
    }
  }

  [[noreturn]] void fail(ParseError::Kind kind, const std::string& message,
                         std::size_t at = static_cast<std::size_t>(-1)) {
    throw ParseError(kind, at == static_cast<std::size_t>(-1) ? pos_ : at,
                     message);
  }

  ExprPtr parse_expr() {
    ExprPtr left = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        left = make_binary(OpId::Add, std::move(left), parse_term());
      } else if (accept('-')) {
        left = make_binary(OpId::Sub, std::move(left), parse_term());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_term() {
    ExprPtr left = parse_factor();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        left = make_binary(OpId::Mul, std::move(left), parse_factor());
      } else if (accept('/')) {
        left = make_binary(OpId::Div, std::move(left), parse_factor());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_factor() {
    skip_ws();
    if (accept('-')) {
      ExprPtr child = parse_factor();
      // Fold a negated literal into the constant so "-3" round-trips as the
      // same node it was printed from.
      if (const auto* c = std::get_if<ConstExpr>(&child->v)) {
        return make_const(-c->value);
      }
      return make_unary(OpId::Neg, std::move(child));
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    skip_ws();
    if (accept('^')) {
      return make_binary(OpId::Pow, std::move(base), parse_factor());
    }
    return base;
  }

  ExprPtr parse_atom() {
    skip_ws();
    if (at_end()) {
      fail(ParseError::Kind::Syntax, "unexpected end of input");
    }
    const char c = peek();
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_expr();
      expect(')', "')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') {
      return make_const(parse_number());
    }
    if (is_ident_char(c)) {
      return parse_identifier();
    }
    fail(ParseError::Kind::Syntax, std::string("unexpected character '") + c +
                                       "'");
  }

  static bool is_ident_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }

  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  double parse_number() {
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec == std::errc::result_out_of_range) {
      fail(ParseError::Kind::Syntax, "number out of range");
    }
    if (ec != std::errc() || ptr == begin) {
      fail(ParseError::Kind::Syntax, "malformed number");
    }
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  // Plain non-negative integer (used for indices and lags).
  std::int64_t parse_plain_int(const char* what) {
    skip_ws();
    const std::size_t start = pos_;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin) {
      fail(ParseError::Kind::Syntax, std::string("expected ") + what, start);
    }
    pos_ += static_cast<std::size_t>(ptr - begin);
    return value;
  }

  std::string_view lex_identifier() {
    const std::size_t start = pos_;
    while (!at_end() && (is_ident_char(text_[pos_]) || is_digit(text_[pos_]))) {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  // Identifier already lexed as "x<digits>"; returns the variable index.
  int variable_index(std::string_view ident, std::size_t at) {
    std::int64_t idx = 0;
    auto [ptr, ec] =
        std::from_chars(ident.data() + 1, ident.data() + ident.size(), idx);
    if (ec != std::errc() || ptr != ident.data() + ident.size()) {
      fail(ParseError::Kind::UnknownFunction,
           "unknown identifier '" + std::string(ident) + "'", at);
    }
    if (idx < 0 || idx >= var_count_) {
      fail(ParseError::Kind::UnknownVariable,
           "unknown variable 'x" + std::to_string(idx) + "' (d = " +
               std::to_string(var_count_) + ")",
           at);
    }
    return static_cast<int>(idx);
  }

  int parse_lag(const char* what) {
    const std::size_t start = pos_;
    const std::int64_t lag = parse_plain_int(what);
    if (lag == 0) {
      fail(ParseError::Kind::ZeroLag, "lag must be at least 1", start);
    }
    if (lag > 1'000'000) {
      fail(ParseError::Kind::Syntax, "lag too large", start);
    }
    return static_cast<int>(lag);
  }

  ExprPtr parse_identifier() {
    const std::size_t start = pos_;
    const std::string_view ident = lex_identifier();

    if (ident == "t") {
      return make_time();
    }

    for (const OperatorSpec& spec : catalog()) {
      if (spec.arity == 1 && spec.id != OpId::Neg && spec.name == ident) {
        expect('(', "'(' after function name");
        ExprPtr arg = parse_expr();
        expect(')', "')'");
        return make_unary(spec.id, std::move(arg));
      }
    }

    AggKind kind;
    if (ident == "integral" || ident == "wsum" || ident == "wmean") {
      kind = ident == "integral" ? AggKind::Integral
             : ident == "wsum"   ? AggKind::Sum
                                 : AggKind::Mean;
      expect('(', "'(' after aggregate name");
      skip_ws();
      const std::size_t var_at = pos_;
      const std::string_view var_ident = lex_identifier();
      if (var_ident.size() < 2 || var_ident[0] != 'x') {
        fail(ParseError::Kind::Syntax, "expected variable argument like x2",
             var_at);
      }
      const int var = variable_index(var_ident, var_at);
      expect(',', "','");
      const std::size_t from_at = pos_;
      const int lag_from = parse_lag("window lag_from");
      expect(',', "','");
      const int lag_to = parse_lag("window lag_to");
      expect(')', "')'");
      if (lag_from <= lag_to) {
        fail(ParseError::Kind::Syntax, "window lag_from must exceed lag_to",
             from_at);
      }
      return make_window(kind, var, lag_from, lag_to);
    }

    if (ident.size() >= 2 && ident[0] == 'x' && is_digit(ident[1])) {
      const int var = variable_index(ident, start);
      expect('[', "'[' after variable");
      skip_ws();
      const std::size_t t_at = pos_;
      if (lex_identifier() != "t") {
        fail(ParseError::Kind::Syntax, "expected 't' inside lag brackets",
             t_at);
      }
      expect('-', "'-' inside lag brackets");
      const int lag = parse_lag("lag");
      expect(']', "']'");
      return make_var(var, lag);
    }

    fail(ParseError::Kind::UnknownFunction,
         "unknown function '" + std::string(ident) + "'", start);
  }

  std::string_view text_;
  int var_count_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses equation text against a system of `var_count` variables.
inline ExprPtr parse_expression(std::string_view text, int var_count) {
  return detail::Parser(text, var_count).parse();
}

// ----------------------------------------------------------------------------
// Canonical printing
// ----------------------------------------------------------------------------

namespace detail {

// Precedence levels used to decide where parentheses are required. Matches
// the grammar: ^ binds tighter than unary minus, which binds tighter than
// * and /, which bind tighter than + and -.
inline constexpr int kLevelAddSub = 1;
inline constexpr int kLevelMulDiv = 2;
inline constexpr int kLevelNeg = 3;
inline constexpr int kLevelPow = 4;
inline constexpr int kLevelAtom = 5;

inline int print_level(const ExprNode& node) {
  return std::visit(
      overloaded{
          // A negative literal prints with a leading '-', so it binds like a
          // negation.
          [](const ConstExpr& c) {
            return std::signbit(c.value) ? kLevelNeg : kLevelAtom;
          },
          [](const TimeExpr&) { return kLevelAtom; },
          [](const VarRefExpr&) { return kLevelAtom; },
          [](const WindowAggExpr&) { return kLevelAtom; },
          [](const UnaryExpr& u) {
            return u.op == OpId::Neg ? kLevelNeg : kLevelAtom;
          },
          [](const BinaryExpr& b) {
            switch (b.op) {
              case OpId::Add:
              case OpId::Sub:
                return kLevelAddSub;
              case OpId::Mul:
              case OpId::Div:
                return kLevelMulDiv;
              default:
                return kLevelPow;
            }
          },
      },
      node.v);
}

inline void format_double(double value, std::string& out) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  out.append(buf, ptr);
}

inline void print_node(const ExprNode& node, int min_level, std::string& out) {
  const bool wrap = print_level(node) < min_level;
  if (wrap) out.push_back('(');
  std::visit(
      overloaded{
          [&](const ConstExpr& c) { format_double(c.value, out); },
          [&](const TimeExpr&) { out.push_back('t'); },
          [&](const VarRefExpr& r) {
            out.append("x").append(std::to_string(r.var));
            out.append("[t-").append(std::to_string(r.lag)).push_back(']');
          },
          [&](const WindowAggExpr& w) {
            out.append(w.kind == AggKind::Integral ? "integral"
                       : w.kind == AggKind::Sum    ? "wsum"
                                                   : "wmean");
            out.append("(x").append(std::to_string(w.var));
            out.push_back(',');
            out.append(std::to_string(w.lag_from));
            out.push_back(',');
            out.append(std::to_string(w.lag_to));
            out.push_back(')');
          },
          [&](const UnaryExpr& u) {
            if (u.op == OpId::Neg) {
              out.push_back('-');
              print_node(*u.child, kLevelNeg, out);
            } else {
              out.append(op_spec(u.op).name);
              out.push_back('(');
              print_node(*u.child, 0, out);
              out.push_back(')');
            }
          },
          [&](const BinaryExpr& b) {
            switch (b.op) {
              case OpId::Add:
                print_node(*b.left, kLevelAddSub, out);
                out.push_back('+');
                print_node(*b.right, kLevelMulDiv, out);
                break;
              case OpId::Sub:
                print_node(*b.left, kLevelAddSub, out);
                out.push_back('-');
                print_node(*b.right, kLevelMulDiv, out);
                break;
              case OpId::Mul:
                print_node(*b.left, kLevelMulDiv, out);
                out.push_back('*');
                print_node(*b.right, kLevelNeg, out);
                break;
              case OpId::Div:
                print_node(*b.left, kLevelMulDiv, out);
                out.push_back('/');
                print_node(*b.right, kLevelNeg, out);
                break;
              default:  // Pow: left must be an atom, right is a factor
                print_node(*b.left, kLevelAtom, out);
                out.push_back('^');
                print_node(*b.right, kLevelNeg, out);
                break;
            }
          },
      },
      node.v);
  if (wrap) out.push_back(')');
}

}  // namespace detail

// Prints an expression with minimal parentheses. The output reparses to an
// evaluation-identical tree: evaluate(parse_expression(to_string(e), d)) is
// bit-identical to evaluate(e) on any context.
inline std::string to_string(const ExprNode& node) {
  std::string out;
  detail::print_node(node, 0, out);
  return out;
}

inline std::string to_string(const ExprPtr& node) { return to_string(*node); }

}  // namespace tsforge
