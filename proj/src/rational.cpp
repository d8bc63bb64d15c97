#include "pbeval/rational.hpp"

#include <cctype>

namespace pbeval {

double to_double(const Rational& r) { return r.convert_to<double>(); }

static bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

Rational parse_decimal(std::string_view text) {
  std::string_view whole = text;
  std::string_view frac;
  auto dot = text.find('.');
  if (dot != std::string_view::npos) {
    whole = text.substr(0, dot);
    frac = text.substr(dot + 1);
    if (frac.empty()) throw std::invalid_argument("malformed decimal: '" + std::string(text) + "'");
  }
  if (!all_digits(whole) || (!frac.empty() && !all_digits(frac))) {
    throw std::invalid_argument("malformed decimal: '" + std::string(text) + "'");
  }
  BigInt num{std::string(whole)};
  if (frac.empty()) return Rational(num);
  BigInt scale = 1;
  for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
  num *= scale;
  num += BigInt{std::string(frac)};
  return Rational(num, scale);
}

long long parse_integer(std::string_view text) {
  if (!all_digits(text) || text.size() > 18) {
    throw std::invalid_argument("malformed integer: '" + std::string(text) + "'");
  }
  long long v = 0;
  for (char c : text) v = v * 10 + (c - '0');
  return v;
}

std::string format_decimal(const Rational& r) {
  BigInt num = numerator(r);
  BigInt den = denominator(r);
  bool negative = num < 0;
  if (negative) num = -num;
  // Scale the denominator up to a power of ten.
  int twos = 0, fives = 0;
  BigInt d = den;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) throw std::domain_error("rational " + format_fraction(r) + " has no finite decimal form");
  int digits = std::max(twos, fives);
  for (int i = twos; i < digits; ++i) num *= 2;
  for (int i = fives; i < digits; ++i) num *= 5;
  std::string s = num.convert_to<std::string>();
  std::string out;
  if (digits == 0) {
    out = s;
  } else {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits + 1 - s.size(), '0');
    out = s.substr(0, s.size() - digits) + "." + s.substr(s.size() - digits);
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
  }
  return negative ? "-" + out : out;
}

std::string format_fraction(const Rational& r) {
  BigInt den = denominator(r);
  std::string s = numerator(r).convert_to<std::string>();
  if (den != 1) s += "/" + den.convert_to<std::string>();
  return s;
}

std::string format_fixed(const Rational& r, int digits) {
  BigInt scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = r * Rational(scale);
  BigInt num = numerator(scaled);
  BigInt den = denominator(scaled);
  bool negative = num < 0;
  if (negative) num = -num;
  BigInt q = num / den;
  BigInt rem = num % den;
  if (rem * 2 >= den) ++q;  // round half up in magnitude
  std::string s = q.convert_to<std::string>();
  std::string out;
  if (digits == 0) {
    out = s;
  } else {
    if (static_cast<int>(s.size()) <= digits) s.insert(0, digits + 1 - s.size(), '0');
    out = s.substr(0, s.size() - digits) + "." + s.substr(s.size() - digits);
  }
  return negative && q != 0 ? "-" + out : out;
}

}  // namespace pbeval
