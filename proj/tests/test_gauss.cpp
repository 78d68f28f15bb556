#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "unlinking/gauss.hpp"

using namespace unlinking;
using testing_support::expr;

namespace {

McOptions mc(std::uint64_t samples, std::uint64_t seed = 42) {
  McOptions o;
  o.samples = samples;
  o.seed = seed;
  return o;
}

bool within(const McEstimate& e, double target, double k = 4.0) {
  return std::abs(e.mean - target) <= k * e.standard_error;
}

}  // namespace

TEST_CASE("moment table matches pairing enumeration") {
  MomentTable table;
  CHECK(table.moment(0) == 1);
  for (unsigned k = 1; k <= 12; ++k) {
    CHECK(table.moment(k) == testing_support::wick_monomial(Exponent{k}));
    if (k % 2 == 0 && k >= 2) CHECK(table.moment(k) == Rational(k - 1) * table.moment(k - 2));
  }
  CHECK(gaussian_moment(8) == 105);
  CHECK(gaussian_moment_real(8) == 105.0);
  CHECK(gaussian_moment_real(7) == 0.0);
  for (unsigned k = 0; k <= 12; ++k) CHECK(gaussian_moment_real(k) == to_double(testing_support::wick_monomial(Exponent{k})));
}

TEST_CASE("expectation examples") {
  CHECK(expectation(expr("x1^2", 1)) == 1);
  CHECK(expectation(expr("x1^4", 1)) == testing_support::wick_monomial(Exponent{4}));
  CHECK(expectation(expr("x1^4", 1)) == 3);
  CHECK(expectation(expr("x1*x2", 2)) == 0);
  CHECK(expectation(Polynomial(2)) == 0);
}

TEST_CASE("covariance examples") {
  const Polynomial s = pow(expr("x1 + x2", 2), 2);
  const Polynomial d = pow(expr("x1 - x2", 2), 2);
  // Wick: E[UV] = 4, E[U] = E[V] = 2.
  const RationalVector a{1, 1}, b{1, -1};
  CHECK(testing_support::wick_expectation({a, a, b, b}) == 4);
  CHECK(expectation(s * d) == 4);
  CHECK(covariance(s, d) == 0);
  CHECK(covariance(expr("x1^2", 2), expr("x2^2", 2)) == 0);
  CHECK(covariance(expr("x1^2", 2), expr("x1^2 + x2^2", 2)) ==
        testing_support::wick_monomial({4, 0}) - 1);
  CHECK(covariance(expr("x1^2", 2), expr("x1^2 + x2^2", 2)) == 2);
  CHECK_THROWS_AS(covariance(expr("x1", 1), expr("x1", 2)), DimensionError);
}

TEST_CASE("expectation of products of linear forms matches Wick enumeration") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 40; ++k) {
    const std::size_t n = 1 + k % 3;
    const int factors = std::uniform_int_distribution<int>(0, 6)(rng);
    std::vector<RationalVector> forms;
    Polynomial p = Polynomial::constant(n, 1);
    for (int f = 0; f < factors; ++f) {
      forms.push_back(testing_support::random_vector(rng, n));
      p = p * testing_support::linear_form(forms.back());
    }
    CHECK(expectation(p) == testing_support::wick_expectation(forms));
  }
}

TEST_CASE("odd-kill, linearity and tower properties") {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 60; ++k) {
    const std::size_t n = 1 + k % 4;
    const Polynomial p = testing_support::random_polynomial(rng, n, 6, 6);
    const Polynomial q = testing_support::random_polynomial(rng, n, 6, 6);

    Polynomial odd(n);
    for (const auto& [e, c] : p.terms()) {
      Exponent f = e;
      f[k % n] |= 1u;  // force an odd exponent
      odd.add_term(f, c);
    }
    CHECK(expectation(odd) == 0);

    const Rational a = testing_support::random_rational(rng, 5, 7);
    const Rational b = testing_support::random_rational(rng, 5, 7);
    CHECK(expectation(a * p + b * q) == a * expectation(p) + b * expectation(q));

    std::vector<std::size_t> subset;
    for (std::size_t i = 0; i < n; ++i)
      if (std::uniform_int_distribution<int>(0, 1)(rng) == 1) subset.push_back(i);
    const Polynomial marginal = partial_expectation(p, subset);
    CHECK(expectation(marginal) == expectation(p));
    for (const auto& [e, c] : marginal.terms())
      for (std::size_t i : subset) CHECK(e[i] == 0);
  }
}

TEST_CASE("partial_expectation examples") {
  CHECK(partial_expectation(expr("x1^2*x2^2", 2), {1}) == expr("x1^2", 2));
  CHECK(partial_expectation(expr("x1^2*x2", 2), {1}).is_zero());
  CHECK(partial_expectation(expr("x1^4 + x1^2*x2^4", 2), {1}) == expr("x1^4 + 3*x1^2", 2));
  CHECK(partial_expectation(expr("x1^4 + x1^2*x2^4", 2), {1}).arity() == 2);
  CHECK_THROWS_AS(partial_expectation(expr("x1", 2), {2}), DimensionError);
}

TEST_CASE("mc_estimate examples") {
  const auto e2 = mc_estimate(to_real(expr("x1^2", 1)), mc(1'000'000));
  CHECK(within(e2, 1.0));
  CHECK(e2.samples == 1'000'000);
  CHECK(e2.seed == 42);
  CHECK(e2.standard_error > 0.0);

  const auto e4 = mc_estimate(to_real(expr("x1^4", 1)), mc(1'000'000));
  CHECK(within(e4, expectation(expr("x1^4", 1)).get_d()));

  const auto prod = mc_estimate_product(to_real(pow(expr("x1 + x2", 2), 2)), to_real(pow(expr("x1 - x2", 2), 2)),
                                        mc(1'000'000));
  CHECK(within(prod, 4.0));

  CHECK_THROWS_AS(mc_estimate(to_real(expr("x1", 1)), mc(1)), PreconditionError);
}

TEST_CASE("Monte Carlo is reproducible and independent of thread count") {
  const RealPolynomial p = to_real(expr("x1^3*x2 + x2^4 - x1", 2));
  McOptions one = mc(200'003, 9);
  one.chunk_size = 4096;
  one.threads = 1;
  McOptions many = one;
  many.threads = 4;
  const auto a = mc_estimate(p, one);
  const auto b = mc_estimate(p, many);
  const auto c = mc_estimate(p, one);
  CHECK(a.mean == b.mean);
  CHECK(a.standard_error == b.standard_error);
  CHECK(a.mean == c.mean);
  McOptions other = one;
  other.seed = 10;
  CHECK(mc_estimate(p, other).mean != a.mean);
}

TEST_CASE("sublevel_probability_mc") {
  // chi-square(1) median: P(Z^2 <= 0.4549) = erf(sqrt(0.4549/2)).
  const double k = 0.4549;
  CHECK(testing_support::chi_square1_cdf(k) == doctest::Approx(0.5).epsilon(1e-4));
  const auto half = sublevel_probability_mc(to_real(expr("x1^2", 1)), k, mc(1'000'000));
  CHECK(within(half, testing_support::chi_square1_cdf(k)));
  CHECK(std::abs(half.mean - 0.5) <= 4 * half.standard_error + 1e-4);

  const auto none = sublevel_probability_mc(to_real(expr("x1^2", 1)), -1.0, mc(10'000));
  CHECK(none.mean == 0.0);
  const auto all = sublevel_probability_mc(RealPolynomial(1), 0.0, mc(10'000));
  CHECK(all.mean == 1.0);
  CHECK_THROWS_AS(sublevel_probability_mc(RealPolynomial(1), 0.0, mc(0)), PreconditionError);
}

TEST_CASE("rotational invariance of the expectation") {
  std::mt19937_64 rng(47);
  for (int k = 0; k < 5; ++k) {
    const std::size_t n = 2 + k % 2;
    const Polynomial p = testing_support::random_polynomial(rng, n, 4, 5);
    const RealMatrix q = testing_support::random_orthogonal(rng, n);
    const auto est = mc_estimate(compose_linear(p, q), mc(400'000, 100 + k));
    CHECK(within(est, expectation(p).get_d()));
  }
}
