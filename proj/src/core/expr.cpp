#include "core/expr.hpp"

#include <cctype>
#include <sstream>

namespace kundt {

int Chart::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < coordinates.size(); ++i)
    if (coordinates[i] == name) return static_cast<int>(i);
  for (std::size_t i = 0; i < parameters.size(); ++i)
    if (parameters[i] == name) return dim() + static_cast<int>(i);
  return -1;
}

ExprPtr make_const(Rational v) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Const;
  e->value = std::move(v);
  return e;
}

ExprPtr make_coord(int index, std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Coord;
  e->coord = index;
  e->name = std::move(name);
  return e;
}

static ExprPtr unary(ExprKind k, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  return e;
}

static ExprPtr binary(ExprKind k, ExprPtr a, ExprPtr b) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}

ExprPtr make_neg(ExprPtr a) { return unary(ExprKind::Neg, std::move(a)); }
ExprPtr make_add(ExprPtr a, ExprPtr b) { return binary(ExprKind::Add, std::move(a), std::move(b)); }
ExprPtr make_sub(ExprPtr a, ExprPtr b) { return binary(ExprKind::Sub, std::move(a), std::move(b)); }
ExprPtr make_mul(ExprPtr a, ExprPtr b) { return binary(ExprKind::Mul, std::move(a), std::move(b)); }
ExprPtr make_div(ExprPtr a, ExprPtr b) { return binary(ExprKind::Div, std::move(a), std::move(b)); }

ExprPtr make_pow(ExprPtr a, long exponent) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Pow;
  e->a = std::move(a);
  e->exponent = exponent;
  return e;
}

ExprPtr make_func(ExprFunc f, ExprPtr a) {
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::Func;
  e->func = f;
  e->a = std::move(a);
  return e;
}

namespace {

struct Token {
  enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
  std::string text;
  std::size_t pos;
};

class Lexer {
 public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    tok_.pos = i_;
    if (i_ >= src_.size()) {
      tok_ = {Token::End, "", i_};
      return;
    }
    char c = src_[i_];
    auto single = [&](Token::Kind k) {
      tok_ = {k, std::string(1, c), i_};
      ++i_;
    };
    switch (c) {
      case '+': single(Token::Plus); return;
      case '-': single(Token::Minus); return;
      case '*': single(Token::Star); return;
      case '/': single(Token::Slash); return;
      case '^': single(Token::Caret); return;
      case '(': single(Token::LParen); return;
      case ')': single(Token::RParen); return;
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = i_;
      bool seen_dot = false;
      while (i_ < src_.size()) {
        char d = src_[i_];
        if (std::isdigit(static_cast<unsigned char>(d))) {
          ++i_;
        } else if (d == '.' && !seen_dot) {
          seen_dot = true;
          ++i_;
        } else if ((d == 'e' || d == 'E') && i_ + 1 < src_.size() &&
                   (std::isdigit(static_cast<unsigned char>(src_[i_ + 1])) ||
                    ((src_[i_ + 1] == '+' || src_[i_ + 1] == '-') && i_ + 2 < src_.size() &&
                     std::isdigit(static_cast<unsigned char>(src_[i_ + 2]))))) {
          i_ += 2;
          while (i_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i_]))) ++i_;
          break;
        } else {
          break;
        }
      }
      tok_ = {Token::Number, src_.substr(start, i_ - start), start};
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i_;
      while (i_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
        ++i_;
      tok_ = {Token::Ident, src_.substr(start, i_ - start), start};
      return;
    }
    throw Error(ErrorKind::Syntax, std::string("unexpected character '") + c + "'", i_);
  }

  const std::string& src_;
  std::size_t i_ = 0;
  Token tok_;
};

class Parser {
 public:
  Parser(const std::string& src, const Chart& chart) : lex_(src), chart_(chart) {}

  ExprPtr parse() {
    ExprPtr e = sum();
    if (lex_.peek().kind != Token::End)
      throw Error(ErrorKind::Syntax, "unexpected trailing input", lex_.peek().pos);
    return e;
  }

 private:
  ExprPtr sum() {
    ExprPtr e = term();
    while (lex_.peek().kind == Token::Plus || lex_.peek().kind == Token::Minus) {
      Token op = lex_.take();
      ExprPtr rhs = term();
      e = (op.kind == Token::Plus) ? make_add(e, rhs) : make_sub(e, rhs);
    }
    return e;
  }

  ExprPtr term() {
    ExprPtr e = factor();
    while (lex_.peek().kind == Token::Star || lex_.peek().kind == Token::Slash) {
      Token op = lex_.take();
      ExprPtr rhs = factor();
      e = (op.kind == Token::Star) ? make_mul(e, rhs) : make_div(e, rhs);
    }
    return e;
  }

  ExprPtr factor() {
    if (lex_.peek().kind == Token::Minus) {
      lex_.take();
      return make_neg(factor());
    }
    if (lex_.peek().kind == Token::Plus) {
      lex_.take();
      return factor();
    }
    return power();
  }

  ExprPtr power() {
    ExprPtr base = atom();
    if (lex_.peek().kind != Token::Caret) return base;
    lex_.take();
    return make_pow(base, exponent());
  }

  long exponent() {
    bool neg = false;
    bool parens = false;
    if (lex_.peek().kind == Token::LParen) {
      parens = true;
      lex_.take();
    }
    if (lex_.peek().kind == Token::Minus) {
      if (!parens)
        throw Error(ErrorKind::Syntax, "negative exponent must be parenthesized",
                    lex_.peek().pos);
      neg = true;
      lex_.take();
    }
    Token t = lex_.peek();
    if (t.kind != Token::Number || t.text.find('.') != std::string::npos ||
        t.text.find('e') != std::string::npos || t.text.find('E') != std::string::npos)
      throw Error(ErrorKind::Syntax, "exponent must be an integer", t.pos);
    lex_.take();
    long v = std::stol(t.text);
    if (parens) {
      if (lex_.peek().kind != Token::RParen)
        throw Error(ErrorKind::Syntax, "expected ')'", lex_.peek().pos);
      lex_.take();
    }
    return neg ? -v : v;
  }

  ExprPtr atom() {
    Token t = lex_.peek();
    switch (t.kind) {
      case Token::Number:
        lex_.take();
        return make_const(parse_rational(t.text));
      case Token::LParen: {
        lex_.take();
        ExprPtr e = sum();
        if (lex_.peek().kind != Token::RParen)
          throw Error(ErrorKind::Syntax, "expected ')'", lex_.peek().pos);
        lex_.take();
        return e;
      }
      case Token::Ident: {
        lex_.take();
        auto fn = function_named(t.text);
        if (fn) {
          if (lex_.peek().kind != Token::LParen)
            throw Error(ErrorKind::Syntax, "expected '(' after function name", lex_.peek().pos);
          lex_.take();
          ExprPtr arg = sum();
          if (lex_.peek().kind != Token::RParen)
            throw Error(ErrorKind::Syntax, "expected ')'", lex_.peek().pos);
          lex_.take();
          return make_func(*fn, arg);
        }
        int idx = chart_.index_of(t.text);
        if (idx < 0)
          throw Error(ErrorKind::UnknownIdentifier, "unknown identifier '" + t.text + "'",
                      t.pos);
        return make_coord(idx, t.text);
      }
      default:
        throw Error(ErrorKind::Syntax, "expected a value", t.pos);
    }
  }

  static std::optional<ExprFunc> function_named(const std::string& s) {
    if (s == "exp") return ExprFunc::Exp;
    if (s == "ln" || s == "log") return ExprFunc::Ln;
    if (s == "sin") return ExprFunc::Sin;
    if (s == "cos") return ExprFunc::Cos;
    if (s == "sqrt") return ExprFunc::Sqrt;
    return std::nullopt;
  }

  Lexer lex_;
  const Chart& chart_;
};

int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

void print(const Expr& e, std::ostringstream& out, int parent_prec) {
  int prec = precedence(e.kind);
  bool wrap = prec < parent_prec;
  if (wrap) out << '(';
  switch (e.kind) {
    case ExprKind::Coord: out << e.name; break;
    case ExprKind::Const:
      if (sgn(e.value) < 0) {
        out << '(' << e.value.get_str() << ')';
      } else {
        out << e.value.get_str();
      }
      break;
    case ExprKind::Neg:
      out << '-';
      print(*e.a, out, prec + 1);
      break;
    case ExprKind::Add:
      print(*e.a, out, prec);
      out << " + ";
      print(*e.b, out, prec + 1);
      break;
    case ExprKind::Sub:
      print(*e.a, out, prec);
      out << " - ";
      print(*e.b, out, prec + 1);
      break;
    case ExprKind::Mul:
      print(*e.a, out, prec);
      out << '*';
      print(*e.b, out, prec + 1);
      break;
    case ExprKind::Div:
      print(*e.a, out, prec);
      out << '/';
      print(*e.b, out, prec + 1);
      break;
    case ExprKind::Pow:
      print(*e.a, out, prec + 1);
      out << '^';
      if (e.exponent < 0)
        out << '(' << e.exponent << ')';
      else
        out << e.exponent;
      break;
    case ExprKind::Func: {
      const char* names[] = {"exp", "ln", "sin", "cos", "sqrt"};
      out << names[static_cast<int>(e.func)] << '(';
      print(*e.a, out, 0);
      out << ')';
      break;
    }
  }
  if (wrap) out << ')';
}

}  // namespace

ExprPtr parse_expr(const std::string& text, const Chart& chart) {
  Parser p(text, chart);
  return p.parse();
}

std::string to_string(const Expr& e) {
  std::ostringstream out;
  print(e, out, 0);
  return out.str();
}

bool is_rational_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Coord:
    case ExprKind::Const: return true;
    case ExprKind::Neg: return is_rational_expr(*e.a);
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div: return is_rational_expr(*e.a) && is_rational_expr(*e.b);
    case ExprKind::Pow: return is_rational_expr(*e.a);
    case ExprKind::Func: return false;
  }
  return false;
}

}  // namespace kundt
