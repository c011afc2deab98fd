#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace pilat {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses a decimal literal ("0.68", "-12", "1.5e-3") or a fraction ("p/q")
/// into an exact rational. Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// Canonical "p/q" form (integers print without denominator).
std::string to_fraction_string(const Rational& q);

/// Exact decimal expansion when the denominator has only factors 2 and 5,
/// otherwise a fraction.
std::string to_exact_string(const Rational& q);

/// Decimal rendering rounded to `digits` significant digits.
/// `direction` < 0 rounds toward -inf, > 0 toward +inf, 0 to nearest.
std::string to_decimal_string(const Rational& q, int digits, int direction = 0);

double to_double(const Rational& q);

/// Exact conversion of a finite double.
Rational from_double(double d);

Rational abs(const Rational& q);

inline int sign(const Rational& q) { return sgn(q); }

}  // namespace pilat
