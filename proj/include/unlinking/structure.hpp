#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>

#include <json.hpp>

#include "unlinking/polynomial.hpp"
#include "unlinking/subspace.hpp"

namespace unlinking {

/// Draws rationals num/den with den in [1, max_denominator] and |num/den| <= bound.
class RationalSampler {
 public:
  RationalSampler(std::uint64_t seed, int bound = 4, int max_denominator = 16);
  Rational coordinate();
  RationalVector point(std::size_t n);
  /// Like point(), but each coordinate is zero with probability 1/4.
  RationalVector sparse_point(std::size_t n);
  /// Rational in the open interval (0, 1).
  Rational interior_weight();

 private:
  std::mt19937_64 engine_;
  int bound_;
  int max_denominator_;
};

enum class QcStatus { falsified, not_falsified, certified_convex_quadratic };

std::string to_string(QcStatus s);

/// p(alpha x + (1-alpha) y) > max(p(x), p(y)), all values exact.
struct QcWitness {
  RationalVector x;
  RationalVector y;
  Rational alpha;
  Rational value_x;
  Rational value_y;
  Rational value_mid;
};

struct QcVerdict {
  QcStatus status = QcStatus::not_falsified;
  std::optional<QcWitness> witness;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

struct QcOptions {
  std::uint64_t trials = 10'000;
  std::uint64_t seed = 42;
  int bound = 4;
  int max_denominator = 16;
};

/// Minimum exact excess p(mid) - max(p(x), p(y)) a witness must show.
inline const Rational kWitnessMargin{1, 1'000'000'000};

/// Randomized search for a quasi-convexity violation. Polynomials of total
/// degree <= 2 are additionally decided exactly: a non-PSD quadratic part yields
/// a constructed witness, a PSD one yields certified_convex_quadratic.
QcVerdict qc_falsify(const Polynomial& p, const QcOptions& options = {});

/// Re-checks a witness in exact arithmetic.
bool witness_holds(const Polynomial& p, const QcWitness& w);

/// Direction d with d^T Q d < 0 for symmetric Q, or nullopt if Q is positive semidefinite.
std::optional<RationalVector> negative_curvature_direction(const RationalMatrix& q);

enum class RayCase { A, B, CONST };

std::string to_string(RayCase c);

/// Which end(s) of the line a univariate quasi-convex polynomial diverges at.
/// A: g -> inf as lambda -> +inf, increasing beyond lambda0_a.
/// B: g -> inf as lambda -> -inf, decreasing below lambda0_b.
struct RayClass {
  std::set<RayCase> cases;
  std::optional<double> lambda0_a;
  std::optional<double> lambda0_b;
};

/// Throws DimensionError unless g has arity 1.
RayClass classify_ray(const Polynomial& g);

/// K_p = {v : v . grad p == 0}, as the kernel of the gradient coefficient matrix.
/// Throws PreconditionError if p(0) != 0.
Subspace invariance_subspace(const Polynomial& p);

/// restrict_line(p, 0, alpha) is the zero polynomial. Throws PreconditionError if p(0) != 0.
bool ray_constant(const Polynomial& p, const RationalVector& alpha);

/// lambda -> p(b + lambda v) is constant for `trials` random rational b.
bool check_translation_invariance(const Polynomial& p, const RationalVector& v, std::uint64_t trials,
                                  std::uint64_t seed);

nlohmann::ordered_json to_json(const QcVerdict& v);
nlohmann::ordered_json to_json(const RayClass& c);

}  // namespace unlinking
