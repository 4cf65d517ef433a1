#include <doctest.h>

#include "mdual/errors.hpp"
#include "mdual/rational.hpp"

using namespace mdual;

namespace {

Rational frac(long p, long q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

}  // namespace

TEST_CASE("format keeps lowest terms and a positive denominator") {
  CHECK(format_rational(frac(2, 4)) == "1/2");
  CHECK(format_rational(frac(3, -6)) == "-1/2");
  CHECK(format_rational(Rational(5)) == "5/1");
  CHECK(format_rational(Rational(0)) == "0/1");
}

TEST_CASE("parse accepts fractions and integers") {
  CHECK(parse_rational("1/4") == Rational(1, 4));
  CHECK(parse_rational("-6/8") == frac(-3, 4));
  CHECK(parse_rational("+7") == Rational(7));
  CHECK(parse_rational(" 2/3 ") == Rational(2, 3));
}

TEST_CASE("parse rejects inexact or malformed text") {
  CHECK_THROWS_AS(parse_rational("0.5"), ParseError);
  CHECK_THROWS_AS(parse_rational("1e3"), ParseError);
  CHECK_THROWS_AS(parse_rational("1/0"), ParseError);
  CHECK_THROWS_AS(parse_rational(""), ParseError);
  CHECK_THROWS_AS(parse_rational("1/2/3"), ParseError);
  CHECK_THROWS_AS(parse_rational("abc"), ParseError);
}

TEST_CASE("round trip through text") {
  for (long p = -12; p <= 12; ++p)
    for (long q = 1; q <= 9; ++q) {
      const Rational r = frac(p, q);
      CHECK(parse_rational(format_rational(r)) == r);
    }
}

TEST_CASE("binomial and factorial") {
  CHECK(factorial(0) == 1);
  CHECK(factorial(10) == 3628800);
  CHECK(binomial(5, 2) == 10);
  CHECK(binomial(5, -1) == 0);
  CHECK(binomial(5, 6) == 0);
  // Pascal's rule as an oracle.
  for (long n = 1; n <= 30; ++n)
    for (long k = 1; k <= n; ++k) CHECK(binomial(n, k) == binomial(n - 1, k - 1) + binomial(n - 1, k));
}
