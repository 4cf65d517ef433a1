#include "mdual/rational.hpp"

#include <cctype>

#include "mdual/errors.hpp"

namespace mdual {

namespace {

bool is_integer_literal(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

Integer parse_integer(const std::string& s) {
  // GMP rejects a leading '+'.
  return Integer(s[0] == '+' ? s.substr(1) : s, 10);
}

}  // namespace

std::string format_rational(const Rational& value) {
  Rational v = value;
  v.canonicalize();
  return v.get_num().get_str() + "/" + v.get_den().get_str();
}

Rational parse_rational(std::string_view text) {
  const std::string s = trimmed(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) {
    if (!is_integer_literal(s)) {
      throw ParseError("not an exact rational (expected \"p/q\" or an integer): \"" + s + "\"");
    }
    return Rational(parse_integer(s));
  }
  const std::string num = trimmed(std::string_view(s).substr(0, slash));
  const std::string den = trimmed(std::string_view(s).substr(slash + 1));
  if (!is_integer_literal(num) || !is_integer_literal(den)) {
    throw ParseError("not an exact rational (expected \"p/q\"): \"" + s + "\"");
  }
  Integer d = parse_integer(den);
  if (d == 0) throw ParseError("zero denominator in \"" + s + "\"");
  Rational r(parse_integer(num), d);
  r.canonicalize();
  return r;
}

Integer factorial(long n) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), static_cast<unsigned long>(n < 0 ? 0 : n));
  return out;
}

Integer binomial(long n, long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return out;
}

}  // namespace mdual
