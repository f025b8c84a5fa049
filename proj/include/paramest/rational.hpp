#pragma once

#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace paramest {

/// Exact rational used for literals and symbolic coefficients.
using Rational = boost::multiprecision::cpp_rational;

/// Parses an unsigned decimal literal ("12", "0.58", "1.5e-3") exactly.
Rational parse_decimal(std::string_view text);

double to_double(const Rational& value);

/// True when the value has a terminating decimal expansion.
bool is_decimal(const Rational& value);

/// Exact decimal string for terminating values, "p/q" otherwise.
std::string to_string(const Rational& value);

Rational binomial(int n, int k);

}  // namespace paramest
