#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace rpomdp {

/// Exact rational number backed by GMP.
using Rational = boost::multiprecision::mpq_rational;

/**
 * Parses a rational literal exactly.
 *
 * Accepted forms are integers (`-3`), fractions (`2/7`) and decimals
 * (`0.125`, `-.5`). Decimals are converted without any floating-point step.
 * Returns std::nullopt when the text is not a literal.
 */
std::optional<Rational> parse_rational(std::string_view text);

/// Canonical text form: `n` for integers and `n/d` otherwise.
std::string to_string(const Rational& value);

/// Decimal rendering rounded to `digits` fractional digits.
std::string to_decimal(const Rational& value, int digits = 6);

/// Absolute value.
Rational abs(const Rational& value);

}  // namespace rpomdp
