#include "unlinking/unlink.hpp"

#include <algorithm>
#include <cmath>

namespace unlinking {

namespace {

void require_normalized(const Polynomial& p, const char* name) {
  if (sgn(p.constant_term()) != 0) {
    throw PreconditionError(std::string(name) + "(0) != 0; normalize with p - p(0) first");
  }
}

Polynomial normalized(const Polynomial& p) {
  return p - Polynomial::constant(p.arity(), p.constant_term());
}

nlohmann::ordered_json rational_array(const RationalVector& v) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& x : v) a.push_back(to_string(x));
  return a;
}

nlohmann::ordered_json symmetry_evidence(const Polynomial& p, std::uint64_t seed) {
  nlohmann::ordered_json j;
  for (const auto& [e, c] : p.terms()) {
    if (total_degree(e) % 2 == 1) {
      j["odd_term"] = {{"e", e}, {"c", to_string(c)}};
      break;
    }
  }
  RationalSampler sampler(seed);
  for (int attempt = 0; attempt < 100; ++attempt) {
    RationalVector x = sampler.point(p.arity());
    RationalVector minus_x = x;
    for (auto& c : minus_x) c = -c;
    const Rational at_x = evaluate(p, x);
    const Rational at_minus_x = evaluate(p, minus_x);
    if (at_x != at_minus_x) {
      j["x"] = rational_array(x);
      j["value_x"] = to_string(at_x);
      j["value_minus_x"] = to_string(at_minus_x);
      break;
    }
  }
  return j;
}

std::vector<std::size_t> complement_indices(std::size_t n, const std::vector<std::size_t>& block) {
  std::vector<bool> in(n, false);
  for (std::size_t i : block) in[i] = true;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n; ++i)
    if (!in[i]) out.push_back(i);
  return out;
}

nlohmann::ordered_json one_based(const std::vector<std::size_t>& idx) {
  auto a = nlohmann::ordered_json::array();
  for (std::size_t i : idx) a.push_back(i + 1);
  return a;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::unlinked: return "unlinked";
    case Verdict::hypothesis_failed: return "hypothesis_failed";
    case Verdict::theorem_contradiction_witness: return "theorem_contradiction_witness";
  }
  return "unknown";
}

HypothesisFalsified::HypothesisFalsified(std::string input, std::string hypothesis, nlohmann::ordered_json evidence)
    : Error("input " + input + " violates " + hypothesis),
      input_(std::move(input)),
      hypothesis_(std::move(hypothesis)),
      evidence_(std::move(evidence)) {}

ConcordanceReport concordance(const Polynomial& u, const Polynomial& v) {
  if (u.arity() != v.arity()) throw DimensionError("polynomial arity mismatch");
  require_normalized(u, "u");
  require_normalized(v, "v");
  ConcordanceReport rep;
  rep.n = u.arity();
  rep.s_u = invariance_subspace(u);
  rep.s_v = invariance_subspace(v);
  rep.s_u_perp = orthogonal_complement(rep.s_u);
  rep.s_v_perp = orthogonal_complement(rep.s_v);
  rep.intersection = intersect(rep.s_u_perp, rep.s_v);
  rep.perp_sum = subspace_sum(rep.s_u_perp, rep.s_v_perp);
  rep.r = rep.s_u_perp.dimension() - rep.intersection.dimension();
  rep.r_reverse = rep.s_v_perp.dimension() - intersect(rep.s_v_perp, rep.s_u).dimension();
  if (rep.r != rep.r_reverse) throw InvariantViolation("concordance order is not symmetric");
  rep.t = rep.intersection.dimension();
  rep.m = rep.perp_sum.dimension() - rep.s_u_perp.dimension();
  return rep;
}

OrthogonalTransform build_transform(const ConcordanceReport& report) {
  const std::size_t n = report.n;
  if (!report.s_u_perp.contains(report.intersection) || !report.perp_sum.contains(report.s_u_perp)) {
    throw InvariantViolation("concordance bases are not nested");
  }
  const RealMatrix nested = orthonormalize_nested({report.intersection, report.s_u_perp, report.perp_sum}, n);
  OrthogonalTransform tr;
  tr.r = report.r;
  tr.t = report.t;
  tr.m = report.m;
  const std::size_t r = tr.r, t = tr.t, m = tr.m;
  // nested columns: [intersection (t) | S_U^perp extension (r) | sum extension (m) | rest]
  std::vector<std::size_t> order;
  for (std::size_t k = t; k < t + r; ++k) order.push_back(k);
  for (std::size_t k = 0; k < t; ++k) order.push_back(k);
  for (std::size_t k = r + t; k < n; ++k) order.push_back(k);
  tr.q = RealMatrix(n, n);
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t i = 0; i < n; ++i) tr.q(i, c) = nested(i, order[c]);
  for (std::size_t k = 0; k < r + t; ++k) tr.u_block.push_back(k);
  for (std::size_t k = 0; k < r; ++k) tr.v_block.push_back(k);
  for (std::size_t k = r + t; k < r + t + m; ++k) tr.v_block.push_back(k);
  for (std::size_t k = r + t + m; k < n; ++k) tr.shared_free.push_back(k);
  return tr;
}

double orthogonality_error(const RealMatrix& q) {
  const RealMatrix g = q.transpose() * q;
  double e = 0.0;
  for (std::size_t i = 0; i < g.rows(); ++i)
    for (std::size_t j = 0; j < g.cols(); ++j) e = std::max(e, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return e;
}

double verify_unlinked(const Polynomial& p, const RealMatrix& q, const std::vector<std::size_t>& forbidden) {
  if (forbidden.empty()) return 0.0;
  const RealPolynomial composed = compose_linear(to_real(p), q);
  double worst = 0.0;
  for (const auto& [e, c] : composed.terms()) {
    const bool touches = std::any_of(forbidden.begin(), forbidden.end(), [&](std::size_t i) { return e.at(i) != 0; });
    if (touches) worst = std::max(worst, std::abs(c));
  }
  return worst;
}

MarginalPair marginalized_polys(const Polynomial& u, const Polynomial& v, const OrthogonalTransform& transform) {
  const std::size_t n = transform.q.rows();
  std::vector<std::size_t> outer;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) (i < transform.r ? keep : outer).push_back(i);
  auto marginal = [&](const Polynomial& p) {
    const RealPolynomial composed = compose_linear(p, transform.q);
    return drop_small(select_variables(partial_expectation(composed, outer), keep), kCoefficientCleanup);
  };
  return {marginal(u), marginal(v)};
}

UnlinkResult unlink_decision(const Polynomial& u_in, const Polynomial& v_in, const UnlinkConfig& config) {
  if (u_in.arity() != v_in.arity()) throw DimensionError("polynomial arity mismatch");
  const Polynomial u = normalized(u_in);
  const Polynomial v = normalized(v_in);
  UnlinkResult result;
  result.hypothesis.symmetry_u = is_symmetric(u);
  result.hypothesis.symmetry_v = is_symmetric(v);
  if (!result.hypothesis.symmetry_u) throw HypothesisFalsified("u", "symmetry", symmetry_evidence(u, config.seed));
  if (!result.hypothesis.symmetry_v) throw HypothesisFalsified("v", "symmetry", symmetry_evidence(v, config.seed));

  const QcOptions qc{config.trials, config.seed};
  result.hypothesis.qc_u = qc_falsify(u, qc);
  if (result.hypothesis.qc_u.status == QcStatus::falsified) {
    throw HypothesisFalsified("u", "quasi_convexity", to_json(result.hypothesis.qc_u));
  }
  result.hypothesis.qc_v = qc_falsify(v, qc);
  if (result.hypothesis.qc_v.status == QcStatus::falsified) {
    throw HypothesisFalsified("v", "quasi_convexity", to_json(result.hypothesis.qc_v));
  }

  result.hypothesis.cov_exact = covariance(u, v);
  result.report = concordance(u, v);
  if (sgn(result.hypothesis.cov_exact) != 0) {
    result.verdict = Verdict::hypothesis_failed;
    return result;
  }

  result.transform = build_transform(result.report);
  const OrthogonalTransform& tr = *result.transform;
  const std::size_t n = u.arity();
  result.orthogonality = orthogonality_error(tr.q);
  result.residual_u = verify_unlinked(u, tr.q, complement_indices(n, tr.u_block));
  result.residual_v = verify_unlinked(v, tr.q, complement_indices(n, tr.v_block));
  if (result.orthogonality > config.tol_ortho) throw InvariantViolation("transform is not orthonormal within tolerance");
  if (result.residual_u > config.tol_residual || result.residual_v > config.tol_residual) {
    throw InvariantViolation("transformed polynomial depends on a forbidden coordinate");
  }
  result.verdict = result.report.r == 0 ? Verdict::unlinked : Verdict::theorem_contradiction_witness;
  return result;
}

nlohmann::ordered_json to_json(const ConcordanceReport& report) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["r"] = report.r;
  j["r_reverse"] = report.r_reverse;
  j["t"] = report.t;
  j["m"] = report.m;
  j["dim_SU"] = report.s_u.dimension();
  j["dim_SV"] = report.s_v.dimension();
  j["dim_SU_perp"] = report.s_u_perp.dimension();
  j["dim_intersect"] = report.intersection.dimension();
  j["dim_sum_perp_spaces"] = report.perp_sum.dimension();
  j["S_U"] = to_json(report.s_u);
  j["S_V"] = to_json(report.s_v);
  j["S_U_perp"] = to_json(report.s_u_perp);
  j["S_U_perp_cap_S_V"] = to_json(report.intersection);
  j["S_U_perp_plus_S_V_perp"] = to_json(report.perp_sum);
  return j;
}

nlohmann::ordered_json to_json(const UnlinkResult& result) {
  nlohmann::ordered_json j;
  j["verdict"] = to_string(result.verdict);
  j["cov_exact"] = to_string(result.hypothesis.cov_exact);
  j["r"] = result.report.r;
  j["t"] = result.report.t;
  j["m"] = result.report.m;
  if (result.transform) {
    auto rows = nlohmann::ordered_json::array();
    const RealMatrix& q = result.transform->q;
    for (std::size_t i = 0; i < q.rows(); ++i) {
      auto row = nlohmann::ordered_json::array();
      for (std::size_t c = 0; c < q.cols(); ++c) row.push_back(q(i, c));
      rows.push_back(std::move(row));
    }
    j["transform"] = std::move(rows);
    j["u_block"] = one_based(result.transform->u_block);
    j["v_block"] = one_based(result.transform->v_block);
  } else {
    j["transform"] = nullptr;
    j["u_block"] = nullptr;
    j["v_block"] = nullptr;
  }
  j["residual_u"] = result.residual_u;
  j["residual_v"] = result.residual_v;
  nlohmann::ordered_json h;
  h["symmetry_u"] = result.hypothesis.symmetry_u;
  h["symmetry_v"] = result.hypothesis.symmetry_v;
  h["qc_u"] = to_json(result.hypothesis.qc_u);
  h["qc_v"] = to_json(result.hypothesis.qc_v);
  j["hypothesis"] = std::move(h);
  return j;
}

CorrelationCheck correlation_spotcheck(const RealPolynomial& u_star, const RealPolynomial& v_star, double k1, double k2,
                                       const McOptions& options) {
  if (u_star.arity() != v_star.arity()) throw DimensionError("polynomial arity mismatch");
  if (u_star.arity() < 1) throw PreconditionError("correlation spot-check needs arity >= 1");
  if (options.samples < 2) throw PreconditionError("Monte Carlo needs at least 2 samples");
  const CompiledPolynomial cu(u_star);
  const CompiledPolynomial cv(v_star);
  struct Counts {
    std::uint64_t a = 0, b = 0, ab = 0;
  };
  std::vector<Counts> per_chunk(chunk_count(options));
  const std::size_t arity = u_star.arity();
  for_each_gaussian_chunk(arity, options, [&](std::size_t c, const std::vector<double>& draws, std::size_t count) {
    std::vector<double> work(std::max(cu.scratch_size(), cv.scratch_size()));
    Counts k;
    for (std::size_t s = 0; s < count; ++s) {
      const double* y = draws.data() + s * arity;
      const bool in_a = cu.evaluate(y, work.data()) <= k1;
      const bool in_b = cv.evaluate(y, work.data()) <= k2;
      k.a += in_a;
      k.b += in_b;
      k.ab += in_a && in_b;
    }
    per_chunk[c] = k;
  });
  Counts total;
  for (const auto& k : per_chunk) {
    total.a += k.a;
    total.b += k.b;
    total.ab += k.ab;
  }
  const double n = static_cast<double>(options.samples);
  const double pa = static_cast<double>(total.a) / n;
  const double pb = static_cast<double>(total.b) / n;
  const double pab = static_cast<double>(total.ab) / n;
  const double se_ab2 = pab * (1 - pab) / n;
  const double se_prod2 = (pb * pb * pa * (1 - pa) + pa * pa * pb * (1 - pb)) / n;
  CorrelationCheck out;
  out.lhs = pab;
  out.rhs = pa * pb;
  out.standard_error = std::sqrt(se_ab2 + se_prod2);
  out.pass = out.lhs >= out.rhs - 4.0 * out.standard_error;
  return out;
}

namespace {

std::vector<double> breakpoints(std::vector<double> values, const IntegralGrid& grid) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double level) {
    const auto idx = static_cast<std::size_t>(std::min<double>(static_cast<double>(n - 1), std::floor(level * static_cast<double>(n - 1))));
    return values[idx];
  };
  const double top = std::max(0.0, quantile(1.0 - grid.tail));
  std::vector<double> k{0.0};
  if (top > 0.0) {
    for (std::size_t j = 1; j <= grid.uniform_points; ++j)
      k.push_back(top * static_cast<double>(j) / static_cast<double>(grid.uniform_points));
    for (std::size_t j = 1; j <= grid.quantile_points; ++j) {
      const double q = quantile((1.0 - grid.tail) * static_cast<double>(j) / static_cast<double>(grid.quantile_points));
      if (q > 0.0 && q <= top) k.push_back(q);
    }
  }
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

}  // namespace

IntegralCheck covariance_integral_check(const RealPolynomial& u_star, const RealPolynomial& v_star,
                                        const McOptions& options, const IntegralGrid& grid) {
  if (u_star.arity() != v_star.arity()) throw DimensionError("polynomial arity mismatch");
  const std::size_t arity = u_star.arity();
  if (arity < 1 || arity > 2) throw PreconditionError("covariance integral check supports arity 1 or 2");
  if (options.samples < 2) throw PreconditionError("Monte Carlo needs at least 2 samples");
  const std::size_t n = static_cast<std::size_t>(options.samples);
  std::vector<double> us(n);
  std::vector<double> vs(n);
  const CompiledPolynomial cu(u_star);
  const CompiledPolynomial cv(v_star);
  for_each_gaussian_chunk(arity, options, [&](std::size_t c, const std::vector<double>& draws, std::size_t count) {
    std::vector<double> work(std::max(cu.scratch_size(), cv.scratch_size()));
    const std::size_t base = c * options.chunk_size;
    for (std::size_t s = 0; s < count; ++s) {
      us[base + s] = cu.evaluate(draws.data() + s * arity, work.data());
      vs[base + s] = cv.evaluate(draws.data() + s * arity, work.data());
    }
  });
  for (std::size_t s = 0; s < n; ++s) {
    if (us[s] < -1e-9 || vs[s] < -1e-9) {
      throw PreconditionError("negative value at a sample point; inputs must be nonnegative");
    }
  }

  const std::vector<double> k1 = breakpoints(us, grid);
  const std::vector<double> k2 = breakpoints(vs, grid);
  const std::size_t s1 = k1.size();
  const std::size_t s2 = k2.size();
  // hist(a, b): samples whose first breakpoint >= value is (a, b); index s means beyond the grid.
  Matrix<double> cumulative(s1 + 1, s2 + 1);
  std::vector<double> c1(s1 + 1, 0.0), c2(s2 + 1, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const auto a = static_cast<std::size_t>(std::lower_bound(k1.begin(), k1.end(), us[s]) - k1.begin());
    const auto b = static_cast<std::size_t>(std::lower_bound(k2.begin(), k2.end(), vs[s]) - k2.begin());
    cumulative(a, b) += 1.0;
    c1[a] += 1.0;
    c2[b] += 1.0;
  }
  for (std::size_t a = 0; a <= s1; ++a)
    for (std::size_t b = 0; b <= s2; ++b) {
      if (a > 0) cumulative(a, b) += cumulative(a - 1, b);
      if (b > 0) cumulative(a, b) += cumulative(a, b - 1);
      if (a > 0 && b > 0) cumulative(a, b) -= cumulative(a - 1, b - 1);
    }
  for (std::size_t a = 1; a <= s1; ++a) c1[a] += c1[a - 1];
  for (std::size_t b = 1; b <= s2; ++b) c2[b] += c2[b - 1];
  const double total = static_cast<double>(n);
  auto integrand = [&](std::size_t a, std::size_t b) {
    return cumulative(a, b) / total - (c1[a] / total) * (c2[b] / total);
  };
  double integral = 0.0;
  for (std::size_t a = 0; a + 1 < s1; ++a)
    for (std::size_t b = 0; b + 1 < s2; ++b) {
      const double area = (k1[a + 1] - k1[a]) * (k2[b + 1] - k2[b]);
      integral += area * 0.25 * (integrand(a, b) + integrand(a + 1, b) + integrand(a, b + 1) + integrand(a + 1, b + 1));
    }

  RunningMoments mu, mv;
  for (std::size_t s = 0; s < n; ++s) {
    mu.add(us[s]);
    mv.add(vs[s]);
  }
  RunningMoments products;
  for (std::size_t s = 0; s < n; ++s) products.add((us[s] - mu.mean) * (vs[s] - mv.mean));

  IntegralCheck out;
  out.exact_cov = covariance(u_star, v_star);
  out.integral_estimate = integral;
  out.standard_error = products.standard_error();
  out.pass = std::abs(integral - out.exact_cov) <= std::max(0.05 * std::abs(out.exact_cov), 5.0 * out.standard_error);
  return out;
}

bool divergence_check(const RealPolynomial& u_star, const std::vector<double>& y, double lambda_max, std::size_t steps) {
  if (y.size() != u_star.arity()) throw DimensionError("direction length does not match arity");
  if (std::all_of(y.begin(), y.end(), [](double x) { return x == 0.0; })) {
    throw PreconditionError("divergence check needs a nonzero direction");
  }
  if (steps < 2 || !(lambda_max > 1.0)) throw PreconditionError("divergence check needs steps >= 2 and lambda_max > 1");
  std::vector<double> values;
  std::vector<double> point(y.size());
  for (std::size_t j = 0; j < steps; ++j) {
    const double lambda = std::pow(lambda_max, static_cast<double>(j) / static_cast<double>(steps - 1));
    for (std::size_t i = 0; i < y.size(); ++i) point[i] = lambda * y[i];
    values.push_back(evaluate(u_star, point));
  }
  for (std::size_t j = steps / 2 + 1; j < steps; ++j)
    if (!(values[j] > values[j - 1])) return false;
  return values.back() > values.front() + 1e3;
}

}  // namespace unlinking
