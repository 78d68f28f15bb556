#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace unlinking {

using Rational = mpq_class;
using RationalVector = std::vector<Rational>;

/// Canonical "p/q" text, or "p" when the denominator is 1.
std::string to_string(const Rational& q);

/// Parses "p", "-p" or "p/q" (decimal integers). Throws ParseError on bad input or q == 0.
Rational parse_rational(std::string_view text);

inline double to_double(const Rational& q) { return q.get_d(); }

std::vector<double> to_double(const RationalVector& v);

/// Exact rational equal to the given finite double.
Rational from_double(double x);

}  // namespace unlinking
