#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "unlinking/gauss.hpp"
#include "unlinking/polynomial.hpp"
#include "unlinking/structure.hpp"
#include "unlinking/subspace.hpp"

namespace unlinking {

/// Invariance subspaces of a normalized pair and the concordance order
/// r = dim(S_U^perp) - dim(S_U^perp ∩ S_V).
struct ConcordanceReport {
  std::size_t n = 0;
  Subspace s_u{0};
  Subspace s_v{0};
  Subspace s_u_perp{0};
  Subspace s_v_perp{0};
  Subspace intersection{0};  // S_U^perp ∩ S_V
  Subspace perp_sum{0};      // S_U^perp + S_V^perp
  std::size_t r = 0;
  std::size_t r_reverse = 0;  // dim(S_V^perp) - dim(S_V^perp ∩ S_U)
  std::size_t t = 0;
  std::size_t m = 0;
};

/// Throws PreconditionError unless u(0) == v(0) == 0, DimensionError on arity mismatch,
/// InvariantViolation if the two ways of computing r disagree.
ConcordanceReport concordance(const Polynomial& u, const Polynomial& v);

/// Columns alpha_1..alpha_n of Q laid out as
///   [0, r)          S_U^perp, orthogonal to S_V
///   [r, r+t)        S_U^perp ∩ S_V
///   [r+t, r+t+m)    completes S_U^perp + S_V^perp (lies in S_U)
///   [r+t+m, n)      S_U ∩ S_V
/// u depends only on u_block, v only on v_block. Indices are 0-based.
struct OrthogonalTransform {
  RealMatrix q;
  std::size_t r = 0;
  std::size_t t = 0;
  std::size_t m = 0;
  std::vector<std::size_t> u_block;
  std::vector<std::size_t> v_block;
  std::vector<std::size_t> shared_free;
};

OrthogonalTransform build_transform(const ConcordanceReport& report);

/// max |(Q^T Q - I)_ij|.
double orthogonality_error(const RealMatrix& q);

/// Max |c| over terms of p(Q y) that involve any forbidden (0-based) coordinate.
double verify_unlinked(const Polynomial& p, const RealMatrix& q, const std::vector<std::size_t>& forbidden);

struct MarginalPair {
  RealPolynomial u_star;
  RealPolynomial v_star;
};

/// U*, V*: p(Q y) with y_{r+1..n} integrated out, re-indexed to arity r.
MarginalPair marginalized_polys(const Polynomial& u, const Polynomial& v, const OrthogonalTransform& transform);

struct UnlinkConfig {
  std::uint64_t seed = 42;
  std::uint64_t trials = 10'000;
  double tol_residual = 1e-9;
  double tol_ortho = 1e-10;
};

enum class Verdict { unlinked, hypothesis_failed, theorem_contradiction_witness };

std::string to_string(Verdict v);

struct HypothesisReport {
  bool symmetry_u = false;
  bool symmetry_v = false;
  QcVerdict qc_u;
  QcVerdict qc_v;
  Rational cov_exact;
};

struct UnlinkResult {
  HypothesisReport hypothesis;
  ConcordanceReport report;
  std::optional<OrthogonalTransform> transform;
  double residual_u = 0.0;
  double residual_v = 0.0;
  double orthogonality = 0.0;
  Verdict verdict = Verdict::hypothesis_failed;
};

/// A hard hypothesis (symmetry or quasi-convexity) is refuted for one input.
class HypothesisFalsified : public Error {
 public:
  HypothesisFalsified(std::string input, std::string hypothesis, nlohmann::ordered_json evidence);
  const std::string& input() const noexcept { return input_; }
  const std::string& hypothesis() const noexcept { return hypothesis_; }
  const nlohmann::ordered_json& evidence() const noexcept { return evidence_; }

 private:
  std::string input_;
  std::string hypothesis_;
  nlohmann::ordered_json evidence_;
};

/// Full pipeline: normalize by subtracting p(0), require symmetry, run the
/// quasi-convexity falsifier, decide Cov(u, v) == 0 exactly, compute the
/// concordance order and, when the covariance vanishes, the transform and its
/// residuals. Throws HypothesisFalsified, DimensionError, or InvariantViolation
/// when an unlinked verdict fails its own residual/orthogonality checks.
UnlinkResult unlink_decision(const Polynomial& u, const Polynomial& v, const UnlinkConfig& config = {});

/// Fixed-order report: verdict, cov_exact, r, t, m, transform, u_block, v_block
/// (1-based), residual_u, residual_v, hypothesis.
nlohmann::ordered_json to_json(const UnlinkResult& result);
nlohmann::ordered_json to_json(const ConcordanceReport& report);

struct CorrelationCheck {
  double lhs = 0.0;  // P(A ∩ B)
  double rhs = 0.0;  // P(A) P(B)
  double standard_error = 0.0;
  bool pass = false;
};

/// Monte Carlo check of P(A_k1 ∩ B_k2) >= P(A_k1) P(B_k2) on one shared sample,
/// A = {U* <= k1}, B = {V* <= k2}; passes iff lhs >= rhs - 4 * combined stderr.
CorrelationCheck correlation_spotcheck(const RealPolynomial& u_star, const RealPolynomial& v_star, double k1, double k2,
                                       const McOptions& options);

struct IntegralGrid {
  std::size_t uniform_points = 256;   // evenly spaced breakpoints per axis
  std::size_t quantile_points = 256;  // breakpoints at empirical quantiles per axis
  double tail = 1e-4;                 // truncate at the (1 - tail) empirical quantile
};

struct IntegralCheck {
  double exact_cov = 0.0;
  double integral_estimate = 0.0;
  double standard_error = 0.0;
  bool pass = false;
};

/// Estimates  ∫∫_{k>=0} [P(A_k1 ∩ B_k2) - P(A_k1) P(B_k2)] dk1 dk2  from one
/// sample set on a merged uniform/quantile grid, and compares it with the exact
/// covariance of the (nonnegative) inputs. Passes iff the difference is at most
/// max(5% of |exact|, 5 stderr). Arity must be 1 or 2; a negative sampled value
/// throws PreconditionError.
IntegralCheck covariance_integral_check(const RealPolynomial& u_star, const RealPolynomial& v_star,
                                        const McOptions& options, const IntegralGrid& grid = {});

/// u_star(lambda * y) at `steps` geometric points in [1, lambda_max] is strictly
/// increasing over the second half and ends above u_star(y) + 1000.
bool divergence_check(const RealPolynomial& u_star, const std::vector<double>& y, double lambda_max, std::size_t steps);

}  // namespace unlinking
