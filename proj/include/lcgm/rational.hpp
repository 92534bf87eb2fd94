#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "lcgm/error.hpp"

namespace lcgm {

using Integer = mpz_class;
using Rational = mpq_class;
using RPoint = std::vector<Rational>;

/// Parses "p/q", an integer, or a decimal literal (optionally with exponent)
/// into the exact rational it denotes.
inline Rational parse_rational(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  std::string_view s = trim(text);
  if (s.empty()) fail(ErrorKind::ParseError, "empty number");

  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    Integer num, den;
    if (num.set_str(std::string(trim(s.substr(0, slash))), 10) != 0 ||
        den.set_str(std::string(trim(s.substr(slash + 1))), 10) != 0)
      fail(ErrorKind::ParseError, "bad rational '" + std::string(s) + "'");
    if (den == 0) fail(ErrorKind::ParseError, "zero denominator in '" + std::string(s) + "'");
    Rational r(num, den);
    r.canonicalize();
    return r;
  }

  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') negative = s[i++] == '-';
  std::string digits;
  long scale = 0;
  bool seen_digit = false, seen_point = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) ++scale;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) fail(ErrorKind::ParseError, "bad number '" + std::string(s) + "'");
  long exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') fail(ErrorKind::ParseError, "bad number '" + std::string(s) + "'");
    std::string exp_text(s.substr(i + 1));
    try {
      std::size_t used = 0;
      exponent = std::stol(exp_text, &used);
      if (used != exp_text.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      fail(ErrorKind::ParseError, "bad exponent in '" + std::string(s) + "'");
    }
  }
  Integer mantissa(digits, 10);
  if (negative) mantissa = -mantissa;
  long shift = exponent - scale;
  Integer ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(shift)));
  Rational r = shift >= 0 ? Rational(mantissa * ten_pow) : Rational(mantissa, ten_pow);
  r.canonicalize();
  return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(10); }

inline double to_double(const Rational& r) { return r.get_d(); }

/// Exact rational value of a finite double.
inline Rational from_double(double x) {
  if (!std::isfinite(x)) fail(ErrorKind::ValidationError, "non-finite value");
  Rational r(x);
  return r;
}

inline std::vector<double> to_double(const RPoint& p) {
  std::vector<double> out(p.size());
  std::transform(p.begin(), p.end(), out.begin(), [](const Rational& r) { return r.get_d(); });
  return out;
}

inline Integer lcm_of_denominators(const std::vector<Rational>& v) {
  Integer l = 1;
  for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  return l;
}

/// Positive multiple of `v` with coprime integer entries (zero stays zero).
inline std::vector<Integer> primitive_integer(const std::vector<Rational>& v) {
  Integer l = lcm_of_denominators(v);
  std::vector<Integer> out(v.size());
  Integer g = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i].get_num() * (l / v[i].get_den());
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out[i].get_mpz_t());
  }
  if (g > 1)
    for (auto& x : out) mpz_divexact(x.get_mpz_t(), x.get_mpz_t(), g.get_mpz_t());
  return out;
}

inline bool lex_less(const RPoint& a, const RPoint& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace lcgm
