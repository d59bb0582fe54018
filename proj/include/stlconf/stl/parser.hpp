#pragma once

#include "stlconf/stl/formula.hpp"

#include <cctype>
#include <map>
#include <string>
#include <string_view>

namespace stlconf::stl {

namespace detail {

/// Recursive-descent parser for
///   f ::= T | name | !f | (f & f) | (f | f) | (f U[a,b] f) | F[a,b] f | G[a,b] f
/// Inside parentheses a chain of the same binary connective, (f & f & f), and
/// a redundant wrapper, (f), are also accepted.
template <class Atom>
class Parser {
 public:
  Parser(std::string_view text, const std::map<std::string, Atom, std::less<>>& table)
      : text_(text), table_(table) {}

  /// The outermost binary operator may omit its parentheses.
  BasicFormula<Atom> parse() {
    auto f = binary(formula());
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  using F = BasicFormula<Atom>;

  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size()) fail(std::string("expected '") + c + "' but input ended");
    if (text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::string_view identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  std::size_t bound() {
    skip_ws();
    const std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '-') fail("interval bounds must be non-negative integers");
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected an integer interval bound");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E')) {
      fail("interval bounds must be integer step counts");
    }
    return std::stoul(std::string(text_.substr(start, pos_ - start)));
  }

  Interval interval() {
    expect('[');
    const std::size_t a_pos = pos_;
    const std::size_t a = bound();
    expect(',');
    const std::size_t b = bound();
    expect(']');
    if (a > b) {
      pos_ = a_pos;
      fail("interval lower bound exceeds upper bound");
    }
    return {a, b};
  }

  F formula() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    const char c = text_[pos_];
    if (c == '!') {
      ++pos_;
      return F::negation(formula());
    }
    if (c == '(') return parenthesized();
    if (!ident_start(c)) fail(std::string("unexpected character '") + c + "'");

    const std::size_t start = pos_;
    const std::string_view word = identifier();
    if ((word == "F" || word == "G") && peek('[')) {
      const Interval iv = interval();
      F arg = formula();
      return word == "F" ? F::eventually(std::move(arg), iv.a, iv.b)
                         : F::always(std::move(arg), iv.a, iv.b);
    }
    if (word == "T") return F::truth();
    auto it = table_.find(word);
    if (it == table_.end()) {
      pos_ = start;
      fail("unknown predicate '" + std::string(word) + "'");
    }
    return F::pred(std::string(word), it->second);
  }

  F parenthesized() {
    expect('(');
    F f = binary(formula());
    expect(')');
    return f;
  }

  /// Optional `& f & …`, `| f | …` or `U[a,b] f` after an operand.
  F binary(F lhs) {
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] == ')') return lhs;
    const char op = text_[pos_];
    if (op == '&' || op == '|') {
      while (peek(op)) {
        ++pos_;
        F rhs = formula();
        lhs = op == '&' ? F::conjunction(std::move(lhs), std::move(rhs))
                        : F::disjunction(std::move(lhs), std::move(rhs));
      }
      return lhs;
    }
    if (op == 'U') {
      ++pos_;
      const Interval iv = interval();
      F rhs = formula();
      return F::until(std::move(lhs), std::move(rhs), iv.a, iv.b);
    }
    fail("expected '&', '|', 'U' or ')'");
  }

  std::string_view text_;
  const std::map<std::string, Atom, std::less<>>& table_;
  std::size_t pos_ = 0;
};

}  // namespace detail

template <class Atom>
using PredicateTable = std::map<std::string, Atom, std::less<>>;

/// Parse formula text, resolving predicate names through `table`.
/// Throws ParseError carrying the byte offset of the problem.
template <class Atom>
BasicFormula<Atom> parse_stl(std::string_view text, const PredicateTable<Atom>& table) {
  return detail::Parser<Atom>(text, table).parse();
}

}  // namespace stlconf::stl
