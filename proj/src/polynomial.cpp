#include "unlinking/polynomial.hpp"

namespace unlinking {

RealPolynomial to_real(const Polynomial& p) {
  RealPolynomial r(p.arity());
  for (const auto& [e, c] : p.terms()) r.add_term(e, c.get_d());
  return r;
}

RealPolynomial drop_small(const RealPolynomial& p, double tol) {
  RealPolynomial r(p.arity());
  for (const auto& [e, c] : p.terms())
    if (std::abs(c) > tol) r.add_term(e, c);
  return r;
}

RealPolynomial compose_linear(const Polynomial& p, const RealMatrix& m) {
  return drop_small(compose_linear(to_real(p), m), kCoefficientCleanup);
}

bool is_symmetric(const Polynomial& p) {
  return std::all_of(p.terms().begin(), p.terms().end(),
                     [](const auto& term) { return total_degree(term.first) % 2 == 0; });
}

bool is_symmetric(const RealPolynomial& p, double tol) {
  return std::all_of(p.terms().begin(), p.terms().end(), [tol](const auto& term) {
    return total_degree(term.first) % 2 == 0 || std::abs(term.second) <= tol;
  });
}

}  // namespace unlinking
