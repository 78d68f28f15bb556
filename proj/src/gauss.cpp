#include "unlinking/gauss.hpp"

#include <algorithm>
#include <random>
#include <thread>

namespace unlinking {

Rational MomentTable::moment(unsigned k) {
  if (k % 2 == 1) return Rational(0);
  const std::size_t m = k / 2;
  while (even_.size() <= m) {
    const std::size_t j = even_.size();
    even_.push_back(even_.back() * Rational(static_cast<unsigned long>(2 * j - 1)));
  }
  return even_[m];
}

namespace {
std::mutex g_moment_mutex;
MomentTable g_moments;
}  // namespace

Rational gaussian_moment(unsigned k) {
  std::lock_guard<std::mutex> lock(g_moment_mutex);
  return g_moments.moment(k);
}

double gaussian_moment_real(unsigned k) {
  if (k % 2 == 1) return 0.0;
  double v = 1.0;
  for (unsigned j = k; j > 1; j -= 2) v *= static_cast<double>(j - 1);
  return v;
}

namespace {

template <typename T>
T expectation_impl(const BasicPolynomial<T>& p) {
  T sum(0);
  for (const auto& [e, c] : p.terms()) {
    if (std::any_of(e.begin(), e.end(), [](unsigned k) { return k % 2 == 1; })) continue;
    T term = c;
    for (unsigned k : e)
      if (k > 0) term *= detail::moment_as<T>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

Rational expectation(const Polynomial& p) { return expectation_impl(p); }
double expectation(const RealPolynomial& p) { return expectation_impl(p); }

Rational covariance(const Polynomial& u, const Polynomial& v) {
  return expectation(u * v) - expectation(u) * expectation(v);
}

double covariance(const RealPolynomial& u, const RealPolynomial& v) {
  return expectation(u * v) - expectation(u) * expectation(v);
}

CompiledPolynomial::CompiledPolynomial(const RealPolynomial& p) : arity_(p.arity()), max_degree_(p.arity(), 0) {
  for (const auto& [e, c] : p.terms()) {
    coefficients_.push_back(c);
    exponents_.insert(exponents_.end(), e.begin(), e.end());
    for (std::size_t i = 0; i < arity_; ++i) max_degree_[i] = std::max(max_degree_[i], e[i]);
  }
  std::size_t offset = 0;
  for (std::size_t i = 0; i < arity_; ++i) {
    offsets_.push_back(offset);
    offset += max_degree_[i] + 1;
  }
  offsets_.push_back(offset);
}

double CompiledPolynomial::evaluate(const double* point, double* scratch) const {
  for (std::size_t i = 0; i < arity_; ++i) {
    double* powers = scratch + offsets_[i];
    powers[0] = 1.0;
    for (unsigned k = 1; k <= max_degree_[i]; ++k) powers[k] = powers[k - 1] * point[i];
  }
  double sum = 0.0;
  const unsigned* e = exponents_.data();
  for (double c : coefficients_) {
    double term = c;
    for (std::size_t i = 0; i < arity_; ++i) term *= scratch[offsets_[i] + e[i]];
    sum += term;
    e += arity_;
  }
  return sum;
}

void RunningMoments::merge(const RunningMoments& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double total = static_cast<double>(count + o.count);
  const double delta = o.mean - mean;
  mean += delta * static_cast<double>(o.count) / total;
  m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / total;
  count += o.count;
}

void draw_gaussian_chunk(std::size_t arity, std::size_t count, std::uint64_t seed, std::uint64_t chunk_index,
                         std::vector<double>& out) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk_index), static_cast<std::uint32_t>(chunk_index >> 32)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.resize(count * arity);
  for (auto& x : out) x = normal(engine);
}

std::size_t chunk_count(const McOptions& options) {
  if (options.chunk_size == 0) throw PreconditionError("chunk size must be positive");
  return static_cast<std::size_t>((options.samples + options.chunk_size - 1) / options.chunk_size);
}

void for_each_gaussian_chunk(std::size_t arity, const McOptions& options,
                             const std::function<void(std::size_t, const std::vector<double>&, std::size_t)>& visit) {
  const std::size_t chunks = chunk_count(options);
  auto run_chunk = [&](std::size_t c, std::vector<double>& buffer) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * options.chunk_size;
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(options.chunk_size, options.samples - begin));
    draw_gaussian_chunk(arity, count, options.seed, c, buffer);
    visit(c, buffer, count);
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, chunks));
  if (threads <= 1) {
    std::vector<double> buffer;
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c, buffer);
    return;
  }
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      std::vector<double> buffer;
      for (std::size_t c = t; c < chunks; c += threads) run_chunk(c, buffer);
    });
  }
  for (auto& th : pool) th.join();
}

McEstimate mc_estimate(std::size_t arity, const McOptions& options,
                       const std::function<double(const double*, double*)>& f, std::size_t scratch) {
  if (options.samples < 2) throw PreconditionError("Monte Carlo needs at least 2 samples");
  std::vector<RunningMoments> per_chunk(chunk_count(options));
  for_each_gaussian_chunk(arity, options, [&](std::size_t c, const std::vector<double>& draws, std::size_t count) {
    std::vector<double> work(scratch);
    RunningMoments acc;
    for (std::size_t s = 0; s < count; ++s) acc.add(f(draws.data() + s * arity, work.data()));
    per_chunk[c] = acc;
  });
  RunningMoments total;
  for (const auto& m : per_chunk) total.merge(m);
  return {total.mean, total.standard_error(), total.count, options.seed};
}

McEstimate mc_estimate(const RealPolynomial& p, const McOptions& options) {
  const CompiledPolynomial compiled(p);
  return mc_estimate(p.arity(), options,
                     [&](const double* y, double* work) { return compiled.evaluate(y, work); },
                     compiled.scratch_size());
}

McEstimate mc_estimate_product(const RealPolynomial& u, const RealPolynomial& v, const McOptions& options) {
  if (u.arity() != v.arity()) throw DimensionError("polynomial arity mismatch");
  const CompiledPolynomial cu(u);
  const CompiledPolynomial cv(v);
  return mc_estimate(u.arity(), options,
                     [&](const double* y, double* work) { return cu.evaluate(y, work) * cv.evaluate(y, work); },
                     std::max(cu.scratch_size(), cv.scratch_size()));
}

McEstimate sublevel_probability_mc(const RealPolynomial& p, double k, const McOptions& options) {
  const CompiledPolynomial compiled(p);
  return mc_estimate(p.arity(), options,
                     [&](const double* y, double* work) { return compiled.evaluate(y, work) <= k ? 1.0 : 0.0; },
                     compiled.scratch_size());
}

}  // namespace unlinking
