#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "cellspace/errors.hpp"

namespace cellspace {

// Exact arithmetic everywhere. Expression templates are off so that `auto`
// always holds a value.
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

inline Integer numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

/// Canonical text form: "p/q" in lowest terms, or "p" when the denominator is 1.
inline std::string to_string(const Rational& q) {
  const Integer den = denominator_of(q);
  if (den == 1) return numerator_of(q).str();
  return numerator_of(q).str() + "/" + den.str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline Rational pow(const Rational& base, std::size_t exponent) {
  Rational result = 1;
  Rational b = base;
  while (exponent != 0) {
    if (exponent & 1U) result *= b;
    exponent >>= 1U;
    if (exponent != 0) b *= b;
  }
  return result;
}

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

inline Integer parse_integer(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) throw Error(Errc::parse_error, "not an integer: '" + std::string(s) + "'");
  s.remove_prefix(std::min(s.find_first_not_of('0'), s.size() - 1));  // a leading 0 would select octal
  Integer v{std::string(s)};
  return negative ? Integer(-v) : v;
}

}  // namespace detail

/// Parses "p/q", integers, and decimals ("0.125", "-2.5e-3") exactly.
inline Rational parse_rational(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
    text.remove_suffix(1);
  if (text.empty()) throw Error(Errc::parse_error, "empty number");

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    const Integer num = detail::parse_integer(text.substr(0, slash));
    const Integer den = detail::parse_integer(text.substr(slash + 1));
    if (den == 0) throw Error(Errc::parse_error, "zero denominator in '" + std::string(text) + "'");
    return Rational(num, den);
  }

  std::string_view mantissa = text;
  long exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = text.substr(0, e);
    std::string_view exp_text = text.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size() || exp_text.empty())
      throw Error(Errc::parse_error, "bad exponent in '" + std::string(text) + "'");
  }

  bool negative = false;
  if (!mantissa.empty() && (mantissa.front() == '+' || mantissa.front() == '-')) {
    negative = mantissa.front() == '-';
    mantissa.remove_prefix(1);
  }
  std::string digits;
  long fraction_digits = 0;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    const std::string_view whole = mantissa.substr(0, dot);
    const std::string_view frac = mantissa.substr(dot + 1);
    if ((!whole.empty() && !detail::all_digits(whole)) || (!frac.empty() && !detail::all_digits(frac)) ||
        (whole.empty() && frac.empty()))
      throw Error(Errc::parse_error, "not a number: '" + std::string(text) + "'");
    digits = std::string(whole) + std::string(frac);
    fraction_digits = static_cast<long>(frac.size());
  } else {
    if (!detail::all_digits(mantissa)) throw Error(Errc::parse_error, "not a number: '" + std::string(text) + "'");
    digits = std::string(mantissa);
  }

  // a leading 0 would select octal
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
  Rational value{Integer(digits)};
  const long scale = exponent - fraction_digits;
  const Rational ten = 10;
  if (scale > 0) value *= pow(ten, static_cast<std::size_t>(scale));
  if (scale < 0) value /= pow(ten, static_cast<std::size_t>(-scale));
  return negative ? Rational(-value) : value;
}

/// Decimal rendering with a fixed number of significant digits, for tables.
inline std::string to_decimal(const Rational& q, int significant = 6) {
  return q.convert_to<boost::multiprecision::number<boost::multiprecision::gmp_float<50>>>().str(
      significant);
}

}  // namespace cellspace
