#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <gmpxx.h>

#include "core/error.hpp"

namespace kundt {

/// Exact arbitrary-precision rational scalar. Canonical form is maintained
/// by GMP for arithmetic results; explicit num/den construction must
/// canonicalize.
using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
  if (den == 0) throw Error(ErrorKind::Domain, "rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

/// Parses "7", "-3/4", "2.5", "1e-3", "2.5e2" into an exact rational.
inline Rational parse_rational(const std::string& text) {
  std::string s = text;
  auto fail = [&] { throw Error(ErrorKind::Syntax, "bad rational literal '" + text + "'"); };
  if (s.empty()) fail();

  bool neg = false;
  std::size_t i = 0;
  if (s[i] == '+' || s[i] == '-') neg = (s[i++] == '-');

  std::string digits;
  long frac_digits = 0;
  long exponent = 0;
  std::optional<std::string> denom;

  bool seen_digit = false, seen_dot = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (c >= '0' && c <= '9') {
      digits += c;
      seen_digit = true;
      if (seen_dot) ++frac_digits;
    } else if (c == '.') {
      if (seen_dot) fail();
      seen_dot = true;
    } else if (c == 'e' || c == 'E') {
      if (!seen_digit) fail();
      std::size_t j = i + 1;
      bool eneg = false;
      if (j < s.size() && (s[j] == '+' || s[j] == '-')) eneg = (s[j++] == '-');
      if (j >= s.size()) fail();
      long e = 0;
      for (; j < s.size(); ++j) {
        if (s[j] < '0' || s[j] > '9') fail();
        e = e * 10 + (s[j] - '0');
      }
      exponent = eneg ? -e : e;
      i = s.size() - 1;
    } else if (c == '/') {
      if (!seen_digit || seen_dot) fail();
      std::string d = s.substr(i + 1);
      if (d.empty()) fail();
      for (char dc : d)
        if (dc < '0' || dc > '9') fail();
      denom = d;
      i = s.size() - 1;
    } else {
      fail();
    }
  }
  if (!seen_digit) fail();

  mpz_class num(digits.empty() ? "0" : digits);
  mpz_class den(1);
  if (denom) {
    den = mpz_class(*denom);
    if (den == 0) fail();
  }
  long shift = exponent - frac_digits;
  mpz_class ten(10);
  if (shift > 0) {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(shift));
    num *= p;
  } else if (shift < 0) {
    mpz_class p;
    mpz_pow_ui(p.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(-shift));
    den *= p;
  }
  Rational q(num, den);
  q.canonicalize();
  return neg ? Rational(-q) : q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline double to_double(const Rational& q) { return q.get_d(); }

/// Exact square root when numerator and denominator are perfect squares.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
  if (sgn(q) < 0) return std::nullopt;
  const mpz_class& num = q.get_num();
  const mpz_class& den = q.get_den();
  if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
    return std::nullopt;
  mpz_class rn, rd;
  mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
  mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
  return Rational(rn, rd);
}

/// Uniform access to the two scalar modes. Exactness is a type-level
/// property, so rational and floating computations cannot mix.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static const char* mode_name() { return "rational"; }
  static Rational from_rational(const Rational& q) { return q; }
  static Rational from_long(long v) { return Rational(v); }
  static double to_double(const Rational& q) { return q.get_d(); }
  static bool is_zero(const Rational& q) { return sgn(q) == 0; }
  static std::string to_string(const Rational& q) { return q.get_str(); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static const char* mode_name() { return "float"; }
  static double from_rational(const Rational& q) { return q.get_d(); }
  static double from_long(long v) { return static_cast<double>(v); }
  static double to_double(double v) { return v; }
  static bool is_zero(double v) { return v == 0.0; }
  static std::string to_string(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }
};

}  // namespace kundt
