#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "unlinking/polynomial.hpp"

namespace unlinking {

/// E[Z^k] for Z ~ N(0,1): (k-1)!! for even k, 0 for odd k. Grows on demand.
class MomentTable {
 public:
  MomentTable() : even_{Rational(1)} {}
  Rational moment(unsigned k);
  std::size_t size() const noexcept { return even_.size(); }

 private:
  std::vector<Rational> even_;  // even_[m] = (2m-1)!!
};

/// Process-wide memoized moment table; safe to call concurrently.
Rational gaussian_moment(unsigned k);
double gaussian_moment_real(unsigned k);

namespace detail {
template <typename T>
T moment_as(unsigned k);
template <>
inline Rational moment_as<Rational>(unsigned k) { return gaussian_moment(k); }
template <>
inline double moment_as<double>(unsigned k) { return gaussian_moment_real(k); }
}  // namespace detail

/// E[p(X)] for X ~ N(0, I_n), term by term as a product of coordinate moments.
Rational expectation(const Polynomial& p);
double expectation(const RealPolynomial& p);

/// E[u v] - E[u] E[v].
Rational covariance(const Polynomial& u, const Polynomial& v);
double covariance(const RealPolynomial& u, const RealPolynomial& v);

/// Integrates out the listed (0-based) coordinates. The result keeps the
/// original arity with zero exponents on the marginalized coordinates.
template <typename T>
BasicPolynomial<T> partial_expectation(const BasicPolynomial<T>& p, const std::vector<std::size_t>& marginalized) {
  std::vector<bool> drop(p.arity(), false);
  for (std::size_t i : marginalized) {
    if (i >= p.arity()) throw DimensionError("marginalized index out of range");
    drop[i] = true;
  }
  BasicPolynomial<T> r(p.arity());
  for (const auto& [e, c] : p.terms()) {
    T coeff = c;
    Exponent kept = e;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (!drop[i]) continue;
      coeff *= detail::moment_as<T>(e[i]);
      kept[i] = 0;
    }
    r.add_term(kept, coeff);
  }
  return r;
}

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Monte Carlo configuration. Results are bit-identical for a fixed
/// (seed, samples, chunk_size) regardless of thread count: chunk c draws from
/// its own std::mt19937_64 seeded with seed_seq{seed_lo, seed_hi, c_lo, c_hi}
/// through std::normal_distribution, and chunk statistics are merged in chunk order.
struct McOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  std::size_t chunk_size = 1u << 16;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Polynomial flattened for fast repeated floating-point evaluation.
class CompiledPolynomial {
 public:
  explicit CompiledPolynomial(const RealPolynomial& p);
  std::size_t arity() const noexcept { return arity_; }
  /// `scratch` must hold at least scratch_size() doubles.
  double evaluate(const double* point, double* scratch) const;
  std::size_t scratch_size() const noexcept { return offsets_.empty() ? 0 : offsets_.back(); }

 private:
  std::size_t arity_;
  std::vector<double> coefficients_;
  std::vector<unsigned> exponents_;    // term-major, arity entries per term
  std::vector<std::size_t> offsets_;   // power-table offset per variable, plus total
  std::vector<unsigned> max_degree_;
};

/// Running mean/variance (Welford), mergeable in a fixed order.
struct RunningMoments {
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }
  void merge(const RunningMoments& o);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
  double standard_error() const { return count > 0 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

/// Fills `out` with count * arity standard normal draws for chunk `chunk_index`.
void draw_gaussian_chunk(std::size_t arity, std::size_t count, std::uint64_t seed, std::uint64_t chunk_index,
                         std::vector<double>& out);

/// Calls visit(chunk_index, draws, count) for every chunk, possibly concurrently.
/// `draws` holds count rows of `arity` doubles. The visitor must only write to
/// per-chunk state indexed by chunk_index.
void for_each_gaussian_chunk(std::size_t arity, const McOptions& options,
                             const std::function<void(std::size_t, const std::vector<double>&, std::size_t)>& visit);

std::size_t chunk_count(const McOptions& options);

/// Sample mean of f(X) over i.i.d. N(0, I_arity) draws.
McEstimate mc_estimate(std::size_t arity, const McOptions& options,
                       const std::function<double(const double*, double*)>& f, std::size_t scratch);

/// E[p(X)] by Monte Carlo. Throws PreconditionError if samples < 2.
McEstimate mc_estimate(const RealPolynomial& p, const McOptions& options);

/// E[u(X) v(X)] by Monte Carlo.
McEstimate mc_estimate_product(const RealPolynomial& u, const RealPolynomial& v, const McOptions& options);

/// P(p(Y) <= k) by Monte Carlo.
McEstimate sublevel_probability_mc(const RealPolynomial& p, double k, const McOptions& options);

}  // namespace unlinking
