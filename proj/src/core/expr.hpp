#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/jet.hpp"
#include "core/rational.hpp"

namespace kundt {

/// Names usable inside expressions: chart coordinates first, then any extra
/// parameters (e.g. a deformation parameter). Jet variables follow the same
/// ordering, so axis i differentiates with respect to names[i].
struct Chart {
  std::vector<std::string> coordinates;
  std::vector<std::string> parameters;

  int dim() const { return static_cast<int>(coordinates.size()); }
  int vars() const { return dim() + static_cast<int>(parameters.size()); }
  std::vector<std::string> all_names() const {
    auto v = coordinates;
    v.insert(v.end(), parameters.begin(), parameters.end());
    return v;
  }
  int index_of(const std::string& name) const;
};

enum class ExprKind { Coord, Const, Neg, Add, Sub, Mul, Div, Pow, Func };
enum class ExprFunc { Exp, Ln, Sin, Cos, Sqrt };

/// Immutable expression tree over a chart. Rational constants are exact.
struct Expr {
  ExprKind kind;
  int coord = -1;        // Coord
  std::string name;      // Coord (for printing/errors)
  Rational value;        // Const
  long exponent = 0;     // Pow
  ExprFunc func = ExprFunc::Exp;
  std::shared_ptr<const Expr> a, b;
};

using ExprPtr = std::shared_ptr<const Expr>;

// Programmatic builders; used by the deformation composer and the catalog.
ExprPtr make_const(Rational v);
ExprPtr make_coord(int index, std::string name);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_add(ExprPtr a, ExprPtr b);
ExprPtr make_sub(ExprPtr a, ExprPtr b);
ExprPtr make_mul(ExprPtr a, ExprPtr b);
ExprPtr make_div(ExprPtr a, ExprPtr b);
ExprPtr make_pow(ExprPtr a, long exponent);
ExprPtr make_func(ExprFunc f, ExprPtr a);

/// Parses an infix expression over the chart's names. '^' takes integer
/// exponents only; implicit multiplication is rejected. Throws Error with a
/// byte position on syntax errors and names unknown identifiers.
ExprPtr parse_expr(const std::string& text, const Chart& chart);

std::string to_string(const Expr& e);
inline std::string to_string(const ExprPtr& e) { return to_string(*e); }

/// True when the expression stays inside the rational operations
/// (no exp/ln/sin/cos; sqrt counts as non-rational).
bool is_rational_expr(const Expr& e);

namespace detail {
template <class S>
Jet<S> eval_node(const Expr& e, const std::shared_ptr<const JetLayout>& lay,
                 const typename Jet<S>::Point& base);
}

/// Evaluates to a jet of the requested order at the given point. The point
/// must supply every chart variable (coordinates then parameters).
template <class S>
Jet<S> eval_jet(const Expr& e, const std::vector<S>& point, int order) {
  auto lay = JetLayout::get(static_cast<int>(point.size()), order);
  auto base = Jet<S>::make_point(point);
  return detail::eval_node<S>(e, lay, base);
}

template <class S>
Jet<S> eval_jet(const ExprPtr& e, const typename Jet<S>::Point& base, int order) {
  auto lay = JetLayout::get(static_cast<int>(base->size()), order);
  return detail::eval_node<S>(*e, lay, base);
}

namespace detail {

template <class S>
Jet<S> eval_func(ExprFunc f, const Jet<S>& x, const Expr& node);

template <>
inline Jet<double> eval_func<double>(ExprFunc f, const Jet<double>& x, const Expr& node) {
  try {
    switch (f) {
      case ExprFunc::Exp: return exp(x);
      case ExprFunc::Ln: return log(x);
      case ExprFunc::Sin: return sin(x);
      case ExprFunc::Cos: return cos(x);
      case ExprFunc::Sqrt: return sqrt(x);
    }
  } catch (const Error& err) {
    throw Error(err.kind(), std::string(err.what()) + " in '" + to_string(node) + "'");
  }
  throw Error(ErrorKind::Invalid, "unreachable");
}

template <>
inline Jet<Rational> eval_func<Rational>(ExprFunc f, const Jet<Rational>& x, const Expr& node) {
  if (f == ExprFunc::Sqrt) {
    try {
      return sqrt(x);
    } catch (const Error& err) {
      throw Error(err.kind(), std::string(err.what()) + " in '" + to_string(node) + "'");
    }
  }
  throw Error(ErrorKind::Domain,
              "non-rational function in rational mode: '" + to_string(node) + "'");
}

template <class S>
Jet<S> eval_node(const Expr& e, const std::shared_ptr<const JetLayout>& lay,
                 const typename Jet<S>::Point& base) {
  switch (e.kind) {
    case ExprKind::Coord:
      return Jet<S>::variable(lay, base, e.coord);
    case ExprKind::Const:
      return Jet<S>::constant(lay, base, ScalarTraits<S>::from_rational(e.value));
    case ExprKind::Neg:
      return -eval_node<S>(*e.a, lay, base);
    case ExprKind::Add:
      return eval_node<S>(*e.a, lay, base) + eval_node<S>(*e.b, lay, base);
    case ExprKind::Sub:
      return eval_node<S>(*e.a, lay, base) - eval_node<S>(*e.b, lay, base);
    case ExprKind::Mul:
      return eval_node<S>(*e.a, lay, base) * eval_node<S>(*e.b, lay, base);
    case ExprKind::Div: {
      Jet<S> num = eval_node<S>(*e.a, lay, base);
      Jet<S> den = eval_node<S>(*e.b, lay, base);
      if (ScalarTraits<S>::is_zero(den.value()))
        throw Error(ErrorKind::Domain, "division by zero in '" + to_string(*e.b) + "'");
      return num / den;
    }
    case ExprKind::Pow: {
      Jet<S> x = eval_node<S>(*e.a, lay, base);
      if (e.exponent < 0 && ScalarTraits<S>::is_zero(x.value()))
        throw Error(ErrorKind::Domain,
                    "zero raised to negative power in '" + to_string(e) + "'");
      return x.pow_int(e.exponent);
    }
    case ExprKind::Func:
      return eval_func<S>(e.func, eval_node<S>(*e.a, lay, base), e);
  }
  throw Error(ErrorKind::Invalid, "unreachable");
}

}  // namespace detail
}  // namespace kundt
