// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "unlinking/gauss.hpp"
#include "unlinking/parser.hpp"
#include "unlinking/structure.hpp"
#include "unlinking/unlink.hpp"

using namespace unlinking;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (time_limit_s > 0 && elapsed >= time_limit_s) {
    o.pass = false;
    o.detail += "; over time limit";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s  %s  [%s] (%.2fs)\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), elapsed);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double coefficient_distance(const RealPolynomial& a, const RealPolynomial& b) {
  double worst = 0.0;
  for (const auto& [e, c] : a.terms()) worst = std::max(worst, std::abs(c - b.coefficient(e)));
  for (const auto& [e, c] : b.terms()) worst = std::max(worst, std::abs(c - a.coefficient(e)));
  return worst;
}

/// Convex corpus plus the on-disk fixtures, all normalized.
std::vector<ts::NamedPolynomial> quasi_convex_fixtures() {
  std::vector<ts::NamedPolynomial> out;
  for (auto& f : ts::convex_corpus()) out.push_back(f);
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(UNLINKING_FIXTURE_DIR)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back({f.filename().string(), read_polynomial_file(f)});
  for (auto& f : out) f.p -= Polynomial::constant(f.p.arity(), f.p.constant_term());
  return out;
}

Outcome rotated_pair() {
  const Polynomial u = ts::expr("x1^2 + 2*x1*x2 + x2^2", 2);
  const Polynomial v = ts::expr("x1^2 - 2*x1*x2 + x2^2", 2);
  const UnlinkResult res = unlink_decision(u, v);
  if (!res.transform) return {false, "no transform"};
  const RealMatrix& l = res.transform->q;
  const double ortho = orthogonality_error(l);
  const double du = coefficient_distance(compose_linear(u, l), to_real(ts::expr("2*x1^2", 2)));
  const double dv = coefficient_distance(compose_linear(v, l), to_real(ts::expr("2*x2^2", 2)));
  const bool ok = res.verdict == Verdict::unlinked && sgn(res.hypothesis.cov_exact) == 0 && res.report.r == 0 &&
                  ortho <= 1e-10 && res.residual_u <= 1e-9 && res.residual_v <= 1e-9 && du <= 1e-9 && dv <= 1e-9;
  return {ok, "cov=" + to_string(res.hypothesis.cov_exact) + fmt(" r=%.0f ortho=%.2g", res.report.r, ortho) +
                  fmt(" residuals=%.2g,%.2g coeff_err=%.2g", res.residual_u, res.residual_v, std::max(du, dv))};
}

Outcome theorem_direction() {
  std::mt19937_64 rng(42);
  int positive = 0;
  for (int k = 0; k < 50; ++k) {
    const auto pair = ts::overlapping_convex_pair(rng);
    const ConcordanceReport rep = concordance(pair.u, pair.v);
    if (rep.r < 1) return {false, "generated pair with r = 0"};
    if (sgn(covariance(pair.u, pair.v)) > 0) ++positive;
  }
  return {positive == 50, fmt("%.0f/50 pairs with r>=1 have cov>0", positive)};
}

Outcome exact_vs_mc() {
  std::mt19937_64 rng(42);
  int within = 0;
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 1 + k % 4;
    const Polynomial p = ts::random_polynomial(rng, n, 6, 6);
    const Rational exact = expectation(p);
    if (exact != ts::wick_polynomial(p)) return {false, "exact expectation disagrees with pairing oracle"};
    McOptions opt;
    opt.samples = 1'000'000;
    opt.seed = 42;
    const McEstimate mc = mc_estimate(to_real(p), opt);
    const double z = mc.standard_error > 0 ? std::abs(mc.mean - to_double(exact)) / mc.standard_error
                                           : (mc.mean == to_double(exact) ? 0.0 : INFINITY);
    worst = std::max(worst, z);
    if (z <= 4.0) ++within;
  }
  return {within >= 47, fmt("%.0f/50 within 4 stderr, worst |z|=%.2f", within, worst)};
}

Outcome subspace_law() {
  std::mt19937_64 rng(42);
  std::size_t inside_ok = 0, inside_total = 0, outside_ok = 0, outside_total = 0, full_space = 0;
  for (const auto& f : quasi_convex_fixtures()) {
    const Subspace s = invariance_subspace(f.p);
    const std::size_t n = f.p.arity();
    for (int k = 0; k < 100; ++k) {
      RationalVector combo(n, Rational(0));
      for (const auto& b : s.basis()) {
        const Rational c = ts::random_rational(rng, 5, 7);
        for (std::size_t i = 0; i < n; ++i) combo[i] += c * b[i];
      }
      ++inside_total;
      if (ray_constant(f.p, combo)) ++inside_ok;
    }
    if (s.dimension() == n) {
      ++full_space;  // no direction lies outside
      continue;
    }
    for (int k = 0; k < 100;) {
      const RationalVector d = ts::random_vector(rng, n, 4, 6);
      if (s.contains(d)) continue;
      ++k;
      ++outside_total;
      if (!ray_constant(f.p, d)) ++outside_ok;
    }
  }
  const bool ok = inside_ok == inside_total && outside_ok == outside_total;
  return {ok, fmt("inside %.0f/%.0f constant, ", inside_ok, inside_total) +
                  fmt("outside %.0f/%.0f non-constant", outside_ok, outside_total) +
                  fmt(", %.0f full-space fixtures", full_space)};
}

Outcome concordance_symmetry() {
  const auto fixtures = quasi_convex_fixtures();
  std::size_t pairs = 0, agree = 0;
  for (std::size_t a = 0; a < fixtures.size(); ++a)
    for (std::size_t b = 0; b < fixtures.size(); ++b) {
      if (a == b || fixtures[a].p.arity() != fixtures[b].p.arity()) continue;
      const ConcordanceReport rep = concordance(fixtures[a].p, fixtures[b].p);
      ++pairs;
      if (rep.r == rep.r_reverse && concordance(fixtures[b].p, fixtures[a].p).r == rep.r) ++agree;
    }
  std::mt19937_64 rng(42);
  std::size_t random_agree = 0;
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = 2 + k % 3;
    const Polynomial u = ts::random_psd_form(rng, n, 0, n, 1 + k % n);
    const Polynomial v = ts::random_psd_form(rng, n, (k / 2) % n, n, 1 + (k / 3) % n);
    const ConcordanceReport rep = concordance(u, v);
    const std::size_t oracle = ts::oracle_rank(ts::quadratic_hessian(v) * ts::quadratic_hessian(u));
    if (rep.r == rep.r_reverse && rep.r == oracle && concordance(v, u).r == rep.r) ++random_agree;
  }
  const bool ok = agree == pairs && random_agree == 50;
  return {ok, fmt("fixture pairs %.0f/%.0f, random pairs %.0f/50", agree, pairs, random_agree)};
}

Outcome integral_identity() {
  McOptions opt;
  opt.samples = 1'000'000;
  opt.seed = 42;
  const RealPolynomial y1 = to_real(ts::expr("x1^2", 2));
  const RealPolynomial y2 = to_real(ts::expr("x2^2", 2));
  const IntegralCheck same = covariance_integral_check(to_real(ts::expr("x1^2", 1)), to_real(ts::expr("x1^2", 1)), opt);
  const IntegralCheck indep = covariance_integral_check(y1, y2, opt);
  const bool ok = same.pass && indep.pass && same.exact_cov == 2.0 && indep.exact_cov == 0.0;
  return {ok, fmt("same: %.4f vs 2 (se %.4f)", same.integral_estimate, same.standard_error) +
                  fmt("; independent: %.4f vs 0 (se %.4f)", indep.integral_estimate, indep.standard_error)};
}

Outcome correlation_inequality() {
  std::mt19937_64 rng(42);
  int passed = 0;
  double worst = INFINITY;
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 1 + k % 2;
    Polynomial u = ts::random_psd_form(rng, n, 0, n, n);
    Polynomial v = ts::random_psd_form(rng, n, 0, n, n);
    if (k % 3 == 0) u += ts::expr(n == 1 ? "x1^4" : "x1^4 + x2^4", n);
    if (k % 4 == 1) v += ts::expr(n == 1 ? "x1^6" : "x2^4", n);
    const RealPolynomial ur = to_real(u), vr = to_real(v);
    const double k1 = to_double(expectation(u)) * std::uniform_real_distribution<double>(0.2, 1.5)(rng);
    const double k2 = to_double(expectation(v)) * std::uniform_real_distribution<double>(0.2, 1.5)(rng);
    McOptions opt;
    opt.samples = 1'000'000;
    opt.seed = 42 + static_cast<std::uint64_t>(k);
    const CorrelationCheck c = correlation_spotcheck(ur, vr, k1, k2, opt);
    if (c.pass) ++passed;
    if (c.standard_error > 0) worst = std::min(worst, (c.lhs - c.rhs) / c.standard_error);
  }
  return {passed == 20, fmt("%.0f/20 satisfy lhs >= rhs - 4se, min (lhs-rhs)/se=%.2f", passed, worst)};
}

Outcome ray_classifier() {
  const auto corpus = ts::univariate_ray_corpus();
  int matched = 0, monotone = 0;
  for (const auto& [g, expected] : corpus) {
    const RayClass rc = classify_ray(g);
    if (rc.cases == expected) ++matched;
    const Polynomial dg = partial_derivative(g, 0);
    bool ok = true;
    if (rc.lambda0_a) {
      const Rational start = from_double(*rc.lambda0_a);
      Rational prev = evaluate(g, {start});
      for (int k = 1; k <= 400 && ok; ++k) {
        const Rational x = start + Rational(k, 8);
        const Rational cur = evaluate(g, {x});
        ok = cur > prev && sgn(evaluate(dg, {x})) > 0;
        prev = cur;
      }
    }
    if (rc.lambda0_b) {
      const Rational start = from_double(*rc.lambda0_b);
      Rational prev = evaluate(g, {start});
      for (int k = 1; k <= 400 && ok; ++k) {
        const Rational x = start - Rational(k, 8);
        const Rational cur = evaluate(g, {x});
        ok = cur > prev && sgn(evaluate(dg, {x})) < 0;
        prev = cur;
      }
    }
    if (ok) ++monotone;
  }
  const bool ok = matched == static_cast<int>(corpus.size()) && monotone == static_cast<int>(corpus.size());
  return {ok, fmt("cases %.0f/%.0f, ", matched, corpus.size()) + fmt("monotone beyond lambda0 %.0f/%.0f", monotone, corpus.size())};
}

Outcome falsifier_soundness() {
  const QcOptions opt{10'000, 42};
  int false_positives = 0, convex_total = 0;
  for (const auto& f : quasi_convex_fixtures()) {
    ++convex_total;
    if (qc_falsify(f.p, opt).status == QcStatus::falsified) ++false_positives;
  }
  int caught = 0;
  const auto bad = ts::non_quasi_convex_corpus();
  for (const auto& f : bad) {
    const QcVerdict v = qc_falsify(f.p, opt);
    if (v.status == QcStatus::falsified && v.witness && witness_holds(f.p, *v.witness)) ++caught;
  }
  const bool ok = false_positives == 0 && caught == static_cast<int>(bad.size());
  return {ok, fmt("convex falsified %.0f/%.0f, ", false_positives, convex_total) +
                  fmt("violators caught %.0f/%.0f", caught, bad.size())};
}

}  // namespace

int main() {
  criterion(1, "rotated pair end-to-end", 1.0, rotated_pair);
  criterion(2, "r >= 1 implies positive covariance", 30.0, theorem_direction);
  criterion(3, "exact expectation vs Monte Carlo", 0, exact_vs_mc);
  criterion(4, "invariance subspace law", 0, subspace_law);
  criterion(5, "concordance order symmetry", 0, concordance_symmetry);
  criterion(6, "covariance integral identity", 60.0, integral_identity);
  criterion(7, "Gaussian correlation spot-check", 0, correlation_inequality);
  criterion(8, "ray classifier corpus", 0, ray_classifier);
  criterion(9, "falsifier soundness", 0, falsifier_soundness);
  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
