#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace nefdiag {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

/// Parses "p/q", an integer, or a decimal with optional exponent ("-0.25",
/// "1e-3") into an exact rational. Throws Error(ParseError) on bad input.
Rational parse_rational(std::string_view text);

/// Exact value of a finite double (every finite double is a dyadic rational).
Rational rational_from_double(double x);

/// Shortest decimal text that round-trips `x`, parsed exactly. Used for JSON
/// numbers so that 0.1 in a config means 1/10 and not the nearest double.
Rational rational_from_decimal_double(double x);

/// "n" for integers, "p/q" otherwise.
std::string format_rational(const Rational& q);

double to_double(const Rational& q);

bool is_integer(const Rational& q);

/// Best rational approximation with denominator at most `max_den`
/// (continued fractions). Returns nullopt for non-finite input.
std::optional<Rational> approximate_rational(double x, long long max_den);

}  // namespace nefdiag
