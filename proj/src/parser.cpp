#include "stlgp/parser.hpp"
#include "stlgp/errors.hpp"

#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

namespace stlgp {

namespace {

enum class Tok {
  Number, Ident, True, False, Not, And, Or, Arrow, Globally, Eventually, Until,
  LParen, RParen, LBracket, RBracket, Comma, Plus, Minus, Star, Slash,
  Less, LessEqual, Greater, GreaterEqual, End
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int line = 1;
  int column = 1;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1;
  int column = 1;
  std::size_t i = 0;
  const auto push = [&](Tok kind, std::string text, int col) {
    out.push_back(Token{kind, std::move(text), 0.0, line, col});
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      column = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      ++column;
      continue;
    }
    const int start_col = column;
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.')) ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-')) ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
        }
      }
      std::string text(src.substr(i, j - i));
      char* end = nullptr;
      const double value = std::strtod(text.c_str(), &end);
      if (end != text.c_str() + text.size()) {
        throw ParseError("malformed number '" + text + "'", line, start_col);
      }
      Token tok{Tok::Number, text, value, line, start_col};
      out.push_back(tok);
      column += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        ++j;
      }
      std::string word(src.substr(i, j - i));
      Tok kind = Tok::Ident;
      if (word == "true") kind = Tok::True;
      else if (word == "false") kind = Tok::False;
      else if (word == "not") kind = Tok::Not;
      else if (word == "and") kind = Tok::And;
      else if (word == "or") kind = Tok::Or;
      else if (word == "G") kind = Tok::Globally;
      else if (word == "F") kind = Tok::Eventually;
      else if (word == "U") kind = Tok::Until;
      push(kind, word, start_col);
      column += static_cast<int>(j - i);
      i = j;
      continue;
    }
    const auto next = i + 1 < src.size() ? src[i + 1] : '\0';
    auto single = [&](Tok kind) {
      push(kind, std::string(1, c), start_col);
      ++i;
      ++column;
    };
    auto dual = [&](Tok kind, const char* text) {
      push(kind, text, start_col);
      i += 2;
      column += 2;
    };
    switch (c) {
      case '(': single(Tok::LParen); break;
      case ')': single(Tok::RParen); break;
      case '[': single(Tok::LBracket); break;
      case ']': single(Tok::RBracket); break;
      case ',': single(Tok::Comma); break;
      case '+': single(Tok::Plus); break;
      case '*': single(Tok::Star); break;
      case '/': single(Tok::Slash); break;
      case '-':
        if (next == '>') dual(Tok::Arrow, "->");
        else single(Tok::Minus);
        break;
      case '<':
        if (next == '=') dual(Tok::LessEqual, "<=");
        else single(Tok::Less);
        break;
      case '>':
        if (next == '=') dual(Tok::GreaterEqual, ">=");
        else single(Tok::Greater);
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, start_col);
    }
  }
  out.push_back(Token{Tok::End, "end of input", 0.0, line, column});
  return out;
}

bool is_comparison(Tok t) {
  return t == Tok::Less || t == Tok::LessEqual || t == Tok::Greater || t == Tok::GreaterEqual;
}

Comparison to_comparison(Tok t) {
  switch (t) {
    case Tok::Less: return Comparison::Less;
    case Tok::LessEqual: return Comparison::LessEqual;
    case Tok::Greater: return Comparison::Greater;
    default: return Comparison::GreaterEqual;
  }
}

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  FormulaPtr parse_all() {
    FormulaPtr f = implication();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    return f;
  }

private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool accept(Tok kind) {
    if (peek().kind != kind) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what + ", found '" + peek().text + "'");
    return advance();
  }
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, peek().line, peek().column);
  }

  FormulaPtr implication() {
    FormulaPtr lhs = disjunction();
    if (accept(Tok::Arrow)) return Formula::implication(lhs, implication());
    return lhs;
  }

  FormulaPtr disjunction() {
    FormulaPtr f = conjunction();
    while (accept(Tok::Or)) f = Formula::disjunction(f, conjunction());
    return f;
  }

  FormulaPtr conjunction() {
    FormulaPtr f = until();
    while (accept(Tok::And)) f = Formula::conjunction(f, until());
    return f;
  }

  FormulaPtr until() {
    FormulaPtr f = unary();
    while (accept(Tok::Until)) {
      const TimeBounds b = bounds();
      f = Formula::until(f, b, unary());
    }
    return f;
  }

  TimeBounds bounds() {
    const Token& open = expect(Tok::LBracket, "'['");
    const double lo = bound_number();
    expect(Tok::Comma, "','");
    const double hi = bound_number();
    expect(Tok::RBracket, "']'");
    if (!(lo < hi)) {
      throw ParseError("temporal bounds must satisfy lower < upper", open.line, open.column);
    }
    return {lo, hi};
  }

  double bound_number() {
    if (peek().kind != Tok::Number) fail("temporal bound must be a non-negative number");
    return advance().number;
  }

  FormulaPtr unary() {
    if (accept(Tok::Not)) return Formula::negation(unary());
    if (accept(Tok::Globally)) {
      const TimeBounds b = bounds();
      return Formula::globally(b, unary());
    }
    if (accept(Tok::Eventually)) {
      const TimeBounds b = bounds();
      return Formula::eventually(b, unary());
    }
    return primary();
  }

  FormulaPtr primary() {
    if (accept(Tok::True)) return Formula::make_true();
    if (accept(Tok::False)) return Formula::make_false();
    if (peek().kind == Tok::LParen) {
      // "(" opens either an arithmetic term of an atom or a parenthesized formula.
      const std::size_t saved = pos_;
      if (auto a = try_atom()) return a;
      pos_ = saved;
      advance();
      FormulaPtr inner = implication();
      expect(Tok::RParen, "')'");
      return inner;
    }
    return atom();
  }

  FormulaPtr try_atom() {
    try {
      return atom();
    } catch (const ParseError&) {
      return nullptr;
    }
  }

  FormulaPtr atom() {
    ExprPtr lhs = expr();
    if (!is_comparison(peek().kind)) fail("expected comparison operator, found '" + peek().text + "'");
    FormulaPtr result;
    while (is_comparison(peek().kind)) {
      const Comparison cmp = to_comparison(advance().kind);
      ExprPtr rhs = expr();
      FormulaPtr a = Formula::atom(lhs, cmp, rhs);
      result = result ? Formula::conjunction(result, a) : a;
      lhs = rhs;
    }
    return result;
  }

  ExprPtr expr() {
    ExprPtr e = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const auto kind = advance().kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Subtract;
      e = Expr::binary(kind, e, term());
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      const auto kind = advance().kind == Tok::Star ? Expr::Kind::Multiply : Expr::Kind::Divide;
      e = Expr::binary(kind, e, factor());
    }
    return e;
  }

  ExprPtr factor() {
    if (accept(Tok::Minus)) {
      if (peek().kind == Tok::Number) return Expr::number(-advance().number);
      return Expr::negate(factor());
    }
    if (peek().kind == Tok::Number) return Expr::number(advance().number);
    if (peek().kind == Tok::Ident) return Expr::variable(advance().text);
    if (accept(Tok::LParen)) {
      ExprPtr e = expr();
      expect(Tok::RParen, "')'");
      return e;
    }
    fail("expected number, variable or '(', found '" + peek().text + "'");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

} // namespace

FormulaPtr parse(std::string_view text) {
  Parser parser(tokenize(text));
  return parser.parse_all();
}

} // namespace stlgp
