#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace mdual {

using Rational = mpq_class;
using Integer = mpz_class;
using RationalVector = std::vector<Rational>;

/// "p/q" in lowest terms with q > 0. Integers keep the "/1" suffix so every
/// entry of an exported matrix has the same shape.
std::string format_rational(const Rational& value);

/// Accepts "p/q" or a bare integer "p", with optional sign. Decimal points and
/// exponents are rejected: inputs must be exact.
Rational parse_rational(std::string_view text);

Integer factorial(long n);

/// C(n, k); zero outside 0 <= k <= n.
Integer binomial(long n, long k);

}  // namespace mdual
