#include "nefdiag/rational.hpp"

#include "nefdiag/errors.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

namespace nefdiag {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::NonRoot: return "NonRoot";
    case ErrorCode::NRootDeficit: return "NRootDeficit";
    case ErrorCode::WeightCountMismatch: return "WeightCountMismatch";
    case ErrorCode::UnsupportedArity: return "UnsupportedArity";
    case ErrorCode::NotAdmissible: return "NotAdmissible";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::OutOfMeanDomain: return "OutOfMeanDomain";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::NoDominantAtom: return "NoDominantAtom";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::InvalidForm: return "InvalidForm";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NoConvergence: return "NoConvergence";
  }
  return "Unknown";
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

BigInt pow10(long long n) {
  BigInt p = 1;
  for (long long i = 0; i < n; ++i) p *= 10;
  return p;
}

Rational parse_decimal(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  long long exponent = 0;
  if (auto epos = s.find_first_of("eE"); epos != std::string_view::npos) {
    std::string_view exp_text = s.substr(epos + 1);
    s = s.substr(0, epos);
    bool exp_negative = false;
    if (!exp_text.empty() && (exp_text.front() == '+' || exp_text.front() == '-')) {
      exp_negative = exp_text.front() == '-';
      exp_text.remove_prefix(1);
    }
    if (!all_digits(exp_text) || exp_text.size() > 6)
      throw Error(ErrorCode::ParseError, "bad exponent in '" + std::string(text) + "'");
    std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (exp_negative) exponent = -exponent;
  }
  std::string digits;
  long long fraction_digits = 0;
  if (auto dot = s.find('.'); dot != std::string_view::npos) {
    std::string_view whole = s.substr(0, dot);
    std::string_view frac = s.substr(dot + 1);
    if ((!whole.empty() && !all_digits(whole)) || (!frac.empty() && !all_digits(frac)) ||
        (whole.empty() && frac.empty()))
      throw Error(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
    digits = std::string(whole) + std::string(frac);
    fraction_digits = static_cast<long long>(frac.size());
  } else {
    if (!all_digits(s)) throw Error(ErrorCode::ParseError, "bad number '" + std::string(text) + "'");
    digits = std::string(s);
  }
  // a leading zero would make the string octal
  digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size()));
  BigInt mantissa = digits.empty() ? BigInt(0) : BigInt(digits);
  long long shift = exponent - fraction_digits;
  Rational value = shift >= 0 ? Rational(mantissa * pow10(shift))
                              : Rational(mantissa, pow10(-shift));
  return negative ? Rational(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(text.substr(0, slash));
    Rational den = parse_decimal(text.substr(slash + 1));
    if (den == 0) throw Error(ErrorCode::ParseError, "zero denominator in '" + std::string(text) + "'");
    return num / den;
  }
  return parse_decimal(text);
}

Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, "non-finite value");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double frac = std::frexp(x, &exp);
  // frac * 2^53 is an exact integer.
  auto mant = static_cast<long long>(std::ldexp(frac, 53));
  exp -= 53;
  BigInt m(mant);
  if (exp >= 0) return Rational(m << exp);
  return Rational(m, BigInt(1) << -exp);
}

Rational rational_from_decimal_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorCode::ParseError, "non-finite value");
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return parse_decimal(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
}

std::string format_rational(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

bool is_integer(const Rational& q) { return denominator(q) == 1; }

std::optional<Rational> approximate_rational(double x, long long max_den) {
  if (!std::isfinite(x)) return std::nullopt;
  // Convergents h/k of the continued fraction of x.
  long long h_prev = 1, h = static_cast<long long>(std::floor(x));
  long long k_prev = 0, k = 1;
  double rem = x - std::floor(x);
  for (int iter = 0; iter < 64 && rem > 1e-300; ++iter) {
    double inv = 1.0 / rem;
    if (inv > 1e15) break;
    auto term = static_cast<long long>(std::floor(inv));
    rem = inv - std::floor(inv);
    long long k_next = term * k + k_prev;
    if (k_next > max_den || k_next <= 0) break;
    long long h_next = term * h + h_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    if (std::abs(x - static_cast<double>(h) / static_cast<double>(k)) <= 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return Rational(BigInt(h), BigInt(k));
}

}  // namespace nefdiag
