#include "unlinking/structure.hpp"

#include <map>

namespace unlinking {

RationalSampler::RationalSampler(std::uint64_t seed, int bound, int max_denominator)
    : engine_(seed), bound_(bound), max_denominator_(max_denominator) {
  if (bound < 1 || max_denominator < 1) throw PreconditionError("sampler bound and denominator must be positive");
}

Rational RationalSampler::coordinate() {
  const int den = std::uniform_int_distribution<int>(1, max_denominator_)(engine_);
  const int num = std::uniform_int_distribution<int>(-bound_ * den, bound_ * den)(engine_);
  Rational q(num, den);
  q.canonicalize();
  return q;
}

RationalVector RationalSampler::point(std::size_t n) {
  RationalVector v;
  v.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.push_back(coordinate());
  return v;
}

RationalVector RationalSampler::sparse_point(std::size_t n) {
  RationalVector v = point(n);
  for (auto& x : v)
    if (std::uniform_int_distribution<int>(0, 3)(engine_) == 0) x = 0;
  return v;
}

Rational RationalSampler::interior_weight() {
  const int den = std::uniform_int_distribution<int>(2, std::max(2, max_denominator_))(engine_);
  const int num = std::uniform_int_distribution<int>(1, den - 1)(engine_);
  Rational q(num, den);
  q.canonicalize();
  return q;
}

std::string to_string(QcStatus s) {
  switch (s) {
    case QcStatus::falsified: return "falsified";
    case QcStatus::not_falsified: return "not_falsified";
    case QcStatus::certified_convex_quadratic: return "certified_convex_quadratic";
  }
  return "unknown";
}

std::string to_string(RayCase c) {
  switch (c) {
    case RayCase::A: return "A";
    case RayCase::B: return "B";
    case RayCase::CONST: return "CONST";
  }
  return "unknown";
}

namespace {

RationalVector combination(const Rational& alpha, const RationalVector& x, const RationalVector& y) {
  RationalVector mid(x.size());
  const Rational beta = 1 - alpha;
  for (std::size_t i = 0; i < x.size(); ++i) mid[i] = alpha * x[i] + beta * y[i];
  return mid;
}

std::optional<QcWitness> make_witness(const Polynomial& p, RationalVector x, RationalVector y, Rational alpha) {
  const RationalVector mid = combination(alpha, x, y);
  QcWitness w{std::move(x), std::move(y), std::move(alpha), 0, 0, 0};
  w.value_x = evaluate(p, w.x);
  w.value_y = evaluate(p, w.y);
  w.value_mid = evaluate(p, mid);
  if (w.value_mid - std::max(w.value_x, w.value_y) > kWitnessMargin) return w;
  return std::nullopt;
}

// Symmetric matrix of the homogeneous degree-2 part, and the linear part.
void quadratic_parts(const Polynomial& p, RationalMatrix& q, RationalVector& linear) {
  const std::size_t n = p.arity();
  q = RationalMatrix(n, n);
  linear.assign(n, Rational(0));
  for (const auto& [e, c] : p.terms()) {
    const unsigned d = total_degree(e);
    if (d == 1) {
      for (std::size_t i = 0; i < n; ++i)
        if (e[i] == 1) linear[i] = c;
    } else if (d == 2) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        for (unsigned k = 0; k < e[i]; ++k) idx.push_back(i);
      if (idx[0] == idx[1]) {
        q(idx[0], idx[0]) = c;
      } else {
        q(idx[0], idx[1]) = c / 2;
        q(idx[1], idx[0]) = c / 2;
      }
    }
  }
}

// Exact convexity decision for total degree <= 2.
QcVerdict decide_quadratic(const Polynomial& p, QcVerdict verdict) {
  RationalMatrix q;
  RationalVector linear;
  quadratic_parts(p, q, linear);
  const auto d = negative_curvature_direction(q);
  if (!d) {
    verdict.status = QcStatus::certified_convex_quadratic;
    return verdict;
  }
  // Along lambda*d, p is a*lambda^2 + b*lambda + c with a < 0: straddle the vertex.
  Rational a = 0;
  for (std::size_t i = 0; i < q.rows(); ++i)
    for (std::size_t j = 0; j < q.cols(); ++j) a += (*d)[i] * q(i, j) * (*d)[j];
  Rational b = 0;
  for (std::size_t i = 0; i < linear.size(); ++i) b += linear[i] * (*d)[i];
  const Rational vertex = -b / (2 * a);
  Rational s = 1;
  while (-a * s * s <= kWitnessMargin) s *= 2;
  RationalVector x(d->size());
  RationalVector y(d->size());
  for (std::size_t i = 0; i < d->size(); ++i) {
    x[i] = (vertex + s) * (*d)[i];
    y[i] = (vertex - s) * (*d)[i];
  }
  auto w = make_witness(p, std::move(x), std::move(y), Rational(1, 2));
  if (!w) throw InvariantViolation("constructed quadratic witness failed exact re-verification");
  verdict.status = QcStatus::falsified;
  verdict.witness = std::move(w);
  return verdict;
}

}  // namespace

std::optional<RationalVector> negative_curvature_direction(const RationalMatrix& q) {
  const std::size_t n = q.rows();
  if (q.cols() != n) throw DimensionError("quadratic form matrix must be square");
  if (n == 0) return std::nullopt;
  for (std::size_t i = 0; i < n; ++i) {
    if (sgn(q(i, i)) < 0) {
      RationalVector d(n, Rational(0));
      d[i] = 1;
      return d;
    }
  }
  std::size_t pivot = n;
  for (std::size_t i = 0; i < n && pivot == n; ++i)
    if (sgn(q(i, i)) > 0) pivot = i;
  if (pivot == n) {
    // Zero diagonal: any nonzero off-diagonal entry gives an indefinite 2x2 block.
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && sgn(q(i, j)) != 0) {
          RationalVector d(n, Rational(0));
          d[i] = Rational(-1) / (2 * q(i, j));
          d[j] = 1;
          return d;
        }
    return std::nullopt;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i)
    if (i != pivot) rest.push_back(i);
  RationalMatrix schur(n - 1, n - 1);
  for (std::size_t a = 0; a < rest.size(); ++a)
    for (std::size_t b = 0; b < rest.size(); ++b)
      schur(a, b) = q(rest[a], rest[b]) - q(rest[a], pivot) * q(pivot, rest[b]) / q(pivot, pivot);
  auto sub = negative_curvature_direction(schur);
  if (!sub) return std::nullopt;
  RationalVector d(n, Rational(0));
  Rational coupling = 0;
  for (std::size_t a = 0; a < rest.size(); ++a) {
    d[rest[a]] = (*sub)[a];
    coupling += q(pivot, rest[a]) * (*sub)[a];
  }
  d[pivot] = -coupling / q(pivot, pivot);
  return d;
}

bool witness_holds(const Polynomial& p, const QcWitness& w) {
  if (w.x.size() != p.arity() || w.y.size() != p.arity()) return false;
  if (sgn(w.alpha) < 0 || w.alpha > 1) return false;
  const RationalVector mid = combination(w.alpha, w.x, w.y);
  const Rational vx = evaluate(p, w.x);
  const Rational vy = evaluate(p, w.y);
  const Rational vm = evaluate(p, mid);
  return vx == w.value_x && vy == w.value_y && vm == w.value_mid && vm - std::max(vx, vy) > kWitnessMargin;
}

QcVerdict qc_falsify(const Polynomial& p, const QcOptions& options) {
  if (options.trials < 1) throw PreconditionError("qc_falsify needs at least one trial");
  QcVerdict verdict;
  verdict.trials = options.trials;
  verdict.seed = options.seed;
  RationalSampler sampler(options.seed, options.bound, options.max_denominator);
  const std::size_t n = p.arity();
  if (!p.is_constant()) {
    for (std::uint64_t t = 0; t < options.trials; ++t) {
      RationalVector x = (t % 2 == 0) ? sampler.point(n) : sampler.sparse_point(n);
      RationalVector y = (t % 2 == 0) ? sampler.point(n) : sampler.sparse_point(n);
      Rational alpha = sampler.interior_weight();
      if (auto w = make_witness(p, std::move(x), std::move(y), std::move(alpha))) {
        verdict.status = QcStatus::falsified;
        verdict.witness = std::move(w);
        verdict.trials = t + 1;
        return verdict;
      }
    }
  }
  if (p.degree() <= 2) return decide_quadratic(p, verdict);
  return verdict;
}

RayClass classify_ray(const Polynomial& g) {
  if (g.arity() != 1) throw DimensionError("classify_ray expects a univariate polynomial");
  RayClass result;
  if (g.is_constant()) {
    result.cases.insert(RayCase::CONST);
    return result;
  }
  const unsigned degree = g.degree();
  const Rational lead = g.coefficient(Exponent{degree});
  const bool even = degree % 2 == 0;
  const bool a = sgn(lead) > 0;
  const bool b = (even && sgn(lead) > 0) || (!even && sgn(lead) < 0);
  // Cauchy bound on the real roots of g': beyond it the derivative keeps the sign of its leading term.
  Rational bound = 0;
  const Polynomial derivative = partial_derivative(g, 0);
  const unsigned dd = degree - 1;
  if (dd > 0) {
    const Rational dlead = derivative.coefficient(Exponent{dd});
    Rational largest = 0;
    for (const auto& [e, c] : derivative.terms())
      if (e[0] < dd) largest = std::max(largest, Rational(abs(c / dlead)));
    bound = 1 + largest;
  }
  if (a) {
    result.cases.insert(RayCase::A);
    result.lambda0_a = bound.get_d();
  }
  if (b) {
    result.cases.insert(RayCase::B);
    result.lambda0_b = -bound.get_d();
  }
  return result;
}

Subspace invariance_subspace(const Polynomial& p) {
  if (sgn(p.constant_term()) != 0) {
    throw PreconditionError("invariance subspace requires p(0) == 0; subtract the constant term first");
  }
  const std::size_t n = p.arity();
  std::map<Exponent, std::size_t, GradedLexLess> row_of;
  std::vector<Polynomial> gradient;
  gradient.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    gradient.push_back(partial_derivative(p, i));
    for (const auto& [e, c] : gradient.back().terms()) row_of.try_emplace(e, row_of.size());
  }
  RationalMatrix m(row_of.size(), n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [e, c] : gradient[i].terms()) m(row_of.at(e), i) = c;
  return kernel(m);
}

bool ray_constant(const Polynomial& p, const RationalVector& alpha) {
  if (sgn(p.constant_term()) != 0) throw PreconditionError("ray_constant requires p(0) == 0");
  if (alpha.size() != p.arity()) throw DimensionError("direction length does not match arity");
  const RationalVector origin(p.arity(), Rational(0));
  return restrict_line(p, origin, alpha).is_zero();
}

bool check_translation_invariance(const Polynomial& p, const RationalVector& v, std::uint64_t trials,
                                  std::uint64_t seed) {
  if (v.size() != p.arity()) throw DimensionError("direction length does not match arity");
  RationalSampler sampler(seed);
  for (std::uint64_t t = 0; t < trials; ++t) {
    const RationalVector b = sampler.point(p.arity());
    if (!restrict_line(p, b, v).is_constant()) return false;
  }
  return true;
}

nlohmann::ordered_json to_json(const QcVerdict& v) {
  nlohmann::ordered_json j;
  j["status"] = to_string(v.status);
  if (v.witness) {
    auto vec = [](const RationalVector& x) {
      auto a = nlohmann::ordered_json::array();
      for (const auto& c : x) a.push_back(to_string(c));
      return a;
    };
    nlohmann::ordered_json w;
    w["x"] = vec(v.witness->x);
    w["y"] = vec(v.witness->y);
    w["alpha"] = to_string(v.witness->alpha);
    w["value_x"] = to_string(v.witness->value_x);
    w["value_y"] = to_string(v.witness->value_y);
    w["value_mid"] = to_string(v.witness->value_mid);
    j["witness"] = std::move(w);
  } else {
    j["witness"] = nullptr;
  }
  j["trials"] = v.trials;
  j["seed"] = v.seed;
  return j;
}

nlohmann::ordered_json to_json(const RayClass& c) {
  nlohmann::ordered_json j;
  auto cases = nlohmann::ordered_json::array();
  for (RayCase r : c.cases) cases.push_back(to_string(r));
  j["cases"] = std::move(cases);
  j["lambda0_a"] = c.lambda0_a ? nlohmann::ordered_json(*c.lambda0_a) : nlohmann::ordered_json(nullptr);
  j["lambda0_b"] = c.lambda0_b ? nlohmann::ordered_json(*c.lambda0_b) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace unlinking
