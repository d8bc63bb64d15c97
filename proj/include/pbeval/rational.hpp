#ifndef PBEVAL_RATIONAL_HPP
#define PBEVAL_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbeval {

// All rule and metric arithmetic is exact. Winner sets and payment ledgers
// must not depend on floating-point rounding, so rationals are used end to
// end and doubles appear only in rendered reports.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt numerator(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt denominator(const Rational& r) { return boost::multiprecision::denominator(r); }

double to_double(const Rational& r);

// Parses an unsigned decimal literal ("600", "600.5", "0.25"). Rejects signs,
// exponents, group separators and empty fields.
Rational parse_decimal(std::string_view text);

// Parses an unsigned integer literal.
long long parse_integer(std::string_view text);

// Renders r as an exact decimal string without trailing zeros ("600", "600.5").
// Requires the reduced denominator to contain no prime factors other than 2
// and 5; throws std::domain_error otherwise.
std::string format_decimal(const Rational& r);

// Renders r as "p" or "p/q" in lowest terms.
std::string format_fraction(const Rational& r);

// Renders r rounded half-up to `digits` fractional digits, e.g. "0.142857".
// Deterministic, unlike printf on long doubles across platforms.
std::string format_fixed(const Rational& r, int digits);

}  // namespace pbeval

#endif
