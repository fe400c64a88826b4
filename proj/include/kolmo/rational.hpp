#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace kolmo {

using Rational = mpq_class;

/// "num/den", or just "num" when the denominator is 1.
std::string to_fraction_string(const Rational& q);

/// Accepts "p/q", integers, and finite decimals ("0.25", "-1e-3"); the
/// decimal is converted exactly (0.1 becomes 1/10, not the nearest double).
Rational parse_rational(std::string_view text);

Rational rational_from_double(double x);

/// base^exponent for any integer exponent; negative powers of zero throw.
Rational pow_int(const Rational& base, long exponent);

double to_double(const Rational& q);

/// Natural log of |q| that stays finite for numerators far beyond double range.
double log_abs(const Rational& q);

bool is_integer(const Rational& q);

}  // namespace kolmo
