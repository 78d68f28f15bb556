#include "unlinking/rational.hpp"

#include <cctype>
#include <cmath>

#include "unlinking/errors.hpp"

namespace unlinking {

std::string to_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

namespace {

mpz_class parse_integer(std::string_view text, std::size_t offset, bool allow_sign) {
  std::size_t i = 0;
  bool negative = false;
  if (allow_sign && i < text.size() && (text[i] == '-' || text[i] == '+')) {
    negative = text[i] == '-';
    ++i;
  }
  if (i == text.size()) throw ParseError("expected digits", offset + i);
  for (std::size_t j = i; j < text.size(); ++j) {
    if (!std::isdigit(static_cast<unsigned char>(text[j]))) {
      throw ParseError("unexpected character in integer", offset + j);
    }
  }
  mpz_class value(std::string(text.substr(i)), 10);
  return negative ? mpz_class(-value) : value;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return Rational(parse_integer(text, 0, true));
  mpz_class num = parse_integer(text.substr(0, slash), 0, true);
  mpz_class den = parse_integer(text.substr(slash + 1), slash + 1, false);
  if (den == 0) throw ParseError("zero denominator", slash + 1);
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::vector<double> to_double(const RationalVector& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.get_d());
  return out;
}

Rational from_double(double x) {
  if (!std::isfinite(x)) throw PreconditionError("cannot convert non-finite double to rational");
  Rational q(x);
  q.canonicalize();
  return q;
}

}  // namespace unlinking
