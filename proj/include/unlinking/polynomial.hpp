#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "unlinking/errors.hpp"
#include "unlinking/matrix.hpp"
#include "unlinking/rational.hpp"

namespace unlinking {

/// Dense exponent tuple; entry i is the power of x_{i+1}.
using Exponent = std::vector<unsigned>;

inline unsigned total_degree(const Exponent& e) { return std::accumulate(e.begin(), e.end(), 0u); }

/// Graded lexicographic order: ascending total degree, then x1 > x2 > ... within a degree.
/// This is the serialization order, so "x1^2 + x1*x2 + x2^2" reads in storage order.
struct GradedLexLess {
  bool operator()(const Exponent& a, const Exponent& b) const {
    const unsigned da = total_degree(a);
    const unsigned db = total_degree(b);
    if (da != db) return da < db;
    return b < a;
  }
};

namespace detail {
inline bool is_zero(const Rational& c) { return sgn(c) == 0; }
inline bool is_zero(double c) { return c == 0.0; }
inline double magnitude(const Rational& c) { return std::abs(c.get_d()); }
inline double magnitude(double c) { return std::abs(c); }
}  // namespace detail

/// Multivariate polynomial over T with a fixed arity. Zero coefficients are never stored.
template <typename T>
class BasicPolynomial {
 public:
  using Coefficient = T;
  using TermMap = std::map<Exponent, T, GradedLexLess>;

  BasicPolynomial() = default;
  explicit BasicPolynomial(std::size_t arity) : arity_(arity) {}
  BasicPolynomial(std::size_t arity, std::initializer_list<std::pair<Exponent, T>> terms) : arity_(arity) {
    for (const auto& [e, c] : terms) add_term(e, c);
  }

  static BasicPolynomial constant(std::size_t arity, const T& c) {
    BasicPolynomial p(arity);
    p.add_term(Exponent(arity, 0), c);
    return p;
  }

  /// x_{index+1}.
  static BasicPolynomial variable(std::size_t arity, std::size_t index) {
    if (index >= arity) throw DimensionError("variable index out of range");
    Exponent e(arity, 0);
    e[index] = 1;
    BasicPolynomial p(arity);
    p.add_term(e, T(1));
    return p;
  }

  /// Accumulates c into the coefficient of e; used while building a value.
  void add_term(const Exponent& e, const T& c) {
    if (e.size() != arity_) throw DimensionError("exponent length does not match arity");
    if (detail::is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (detail::is_zero(it->second)) terms_.erase(it);
    }
  }

  std::size_t arity() const noexcept { return arity_; }
  const TermMap& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }

  /// Total degree; 0 for the zero polynomial.
  unsigned degree() const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, total_degree(e));
    return d;
  }

  /// Largest power of x_{index+1} occurring in any term.
  unsigned degree_in(std::size_t index) const {
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[index]);
    return d;
  }

  T coefficient(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? T(0) : it->second;
  }

  T constant_term() const { return coefficient(Exponent(arity_, 0)); }

  /// True iff the polynomial has no term of positive degree.
  bool is_constant() const { return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0); }

  BasicPolynomial operator-() const {
    BasicPolynomial r(arity_);
    for (const auto& [e, c] : terms_) r.terms_.emplace(e, T(-c));
    return r;
  }

  BasicPolynomial& operator+=(const BasicPolynomial& q) {
    check_arity(q);
    for (const auto& [e, c] : q.terms_) add_term(e, c);
    return *this;
  }

  BasicPolynomial& operator-=(const BasicPolynomial& q) {
    check_arity(q);
    for (const auto& [e, c] : q.terms_) add_term(e, T(-c));
    return *this;
  }

  friend BasicPolynomial operator+(BasicPolynomial p, const BasicPolynomial& q) { return p += q; }
  friend BasicPolynomial operator-(BasicPolynomial p, const BasicPolynomial& q) { return p -= q; }

  friend BasicPolynomial operator*(const BasicPolynomial& p, const BasicPolynomial& q) {
    p.check_arity(q);
    BasicPolynomial r(p.arity_);
    Exponent e(p.arity_);
    for (const auto& [ep, cp] : p.terms_)
      for (const auto& [eq, cq] : q.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ep[i] + eq[i];
        r.add_term(e, T(cp * cq));
      }
    return r;
  }

  friend BasicPolynomial operator*(const T& s, const BasicPolynomial& p) {
    BasicPolynomial r(p.arity_);
    if (detail::is_zero(s)) return r;
    for (const auto& [e, c] : p.terms_) r.add_term(e, T(s * c));
    return r;
  }

  friend bool operator==(const BasicPolynomial& a, const BasicPolynomial& b) {
    return a.arity_ == b.arity_ && a.terms_ == b.terms_;
  }

 private:
  void check_arity(const BasicPolynomial& q) const {
    if (q.arity_ != arity_) throw DimensionError("polynomial arity mismatch");
  }

  std::size_t arity_ = 0;
  TermMap terms_;
};

using Polynomial = BasicPolynomial<Rational>;
using RealPolynomial = BasicPolynomial<double>;

enum class CombineOp { add, mul };

template <typename T>
BasicPolynomial<T> combine(const BasicPolynomial<T>& p, const BasicPolynomial<T>& q, CombineOp op) {
  return op == CombineOp::add ? p + q : p * q;
}

template <typename T>
BasicPolynomial<T> pow(const BasicPolynomial<T>& p, unsigned k) {
  BasicPolynomial<T> result = BasicPolynomial<T>::constant(p.arity(), T(1));
  BasicPolynomial<T> base = p;
  while (k > 0) {
    if (k & 1u) result = result * base;
    k >>= 1u;
    if (k > 0) base = base * base;
  }
  return result;
}

template <typename T>
T evaluate(const BasicPolynomial<T>& p, std::span<const T> point) {
  if (point.size() != p.arity()) throw DimensionError("evaluation point length does not match arity");
  T sum(0);
  for (const auto& [e, c] : p.terms()) {
    T term(c);
    for (std::size_t i = 0; i < e.size(); ++i)
      for (unsigned k = 0; k < e[i]; ++k) term *= point[i];
    sum += term;
  }
  return sum;
}

template <typename T>
T evaluate(const BasicPolynomial<T>& p, const std::vector<T>& point) {
  return evaluate(p, std::span<const T>(point));
}

/// Univariate coefficient list, index = power of lambda.
template <typename T>
using DenseUnivariate = std::vector<T>;

namespace detail {

template <typename T>
DenseUnivariate<T> multiply(const DenseUnivariate<T>& a, const DenseUnivariate<T>& b) {
  DenseUnivariate<T> r(a.size() + b.size() - 1, T(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

template <typename T>
BasicPolynomial<T> from_dense(const DenseUnivariate<T>& d) {
  BasicPolynomial<T> g(1);
  for (std::size_t k = 0; k < d.size(); ++k) g.add_term(Exponent{static_cast<unsigned>(k)}, d[k]);
  return g;
}

}  // namespace detail

/// lambda -> p(b + lambda * v), as an arity-1 polynomial.
template <typename T>
BasicPolynomial<T> restrict_line(const BasicPolynomial<T>& p, std::span<const T> b, std::span<const T> v) {
  const std::size_t n = p.arity();
  if (b.size() != n || v.size() != n) throw DimensionError("line base/direction length does not match arity");
  // powers[i][k] = (b_i + v_i*lambda)^k
  std::vector<std::vector<DenseUnivariate<T>>> powers(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned d = p.degree_in(i);
    powers[i].reserve(d + 1);
    powers[i].push_back(DenseUnivariate<T>{T(1)});
    const DenseUnivariate<T> linear{b[i], v[i]};
    for (unsigned k = 1; k <= d; ++k) powers[i].push_back(detail::multiply(powers[i].back(), linear));
  }
  DenseUnivariate<T> acc(p.degree() + 1, T(0));
  for (const auto& [e, c] : p.terms()) {
    DenseUnivariate<T> term{c};
    for (std::size_t i = 0; i < n; ++i)
      if (e[i] > 0) term = detail::multiply(term, powers[i][e[i]]);
    for (std::size_t k = 0; k < term.size(); ++k) acc[k] += term[k];
  }
  return detail::from_dense(acc);
}

template <typename T>
BasicPolynomial<T> restrict_line(const BasicPolynomial<T>& p, const std::vector<T>& b, const std::vector<T>& v) {
  return restrict_line(p, std::span<const T>(b), std::span<const T>(v));
}

template <typename T>
BasicPolynomial<T> partial_derivative(const BasicPolynomial<T>& p, std::size_t index) {
  if (index >= p.arity()) throw DimensionError("derivative index out of range");
  BasicPolynomial<T> r(p.arity());
  for (const auto& [e, c] : p.terms()) {
    if (e[index] == 0) continue;
    Exponent d = e;
    --d[index];
    r.add_term(d, T(c * T(e[index])));
  }
  return r;
}

/// sum_i v_i * dp/dx_i.
template <typename T>
BasicPolynomial<T> directional_derivative(const BasicPolynomial<T>& p, std::span<const T> v) {
  if (v.size() != p.arity()) throw DimensionError("direction length does not match arity");
  BasicPolynomial<T> r(p.arity());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (detail::is_zero(v[i])) continue;
    r += v[i] * partial_derivative(p, i);
  }
  return r;
}

template <typename T>
BasicPolynomial<T> directional_derivative(const BasicPolynomial<T>& p, const std::vector<T>& v) {
  return directional_derivative(p, std::span<const T>(v));
}

/// Coefficients of y -> p(M y). Exact for rational M.
template <typename T>
BasicPolynomial<T> compose_linear(const BasicPolynomial<T>& p, const Matrix<T>& m) {
  const std::size_t n = p.arity();
  if (m.rows() != n) throw DimensionError("composition matrix rows do not match arity");
  const std::size_t out = m.cols();
  // x_i = sum_j M(i,j) y_j
  std::vector<std::vector<BasicPolynomial<T>>> powers(n);
  for (std::size_t i = 0; i < n; ++i) {
    BasicPolynomial<T> form(out);
    for (std::size_t j = 0; j < out; ++j) {
      Exponent e(out, 0);
      e[j] = 1;
      form.add_term(e, m(i, j));
    }
    const unsigned d = p.degree_in(i);
    powers[i].push_back(BasicPolynomial<T>::constant(out, T(1)));
    for (unsigned k = 1; k <= d; ++k) powers[i].push_back(powers[i].back() * form);
  }
  BasicPolynomial<T> r(out);
  for (const auto& [e, c] : p.terms()) {
    BasicPolynomial<T> term = BasicPolynomial<T>::constant(out, c);
    for (std::size_t i = 0; i < n; ++i)
      if (e[i] > 0) term = term * powers[i][e[i]];
    r += term;
  }
  return r;
}

RealPolynomial to_real(const Polynomial& p);

/// Removes every coefficient with |c| <= tol.
RealPolynomial drop_small(const RealPolynomial& p, double tol);

/// Default magnitude below which float coefficients are treated as rounding noise.
inline constexpr double kCoefficientCleanup = 1e-12;

/// Float composition with an (orthonormal) real matrix, cleaned of |c| <= 1e-12 noise.
RealPolynomial compose_linear(const Polynomial& p, const RealMatrix& m);

/// p(-x).
template <typename T>
BasicPolynomial<T> reflect(const BasicPolynomial<T>& p) {
  BasicPolynomial<T> r(p.arity());
  for (const auto& [e, c] : p.terms()) r.add_term(e, total_degree(e) % 2 == 0 ? c : T(-c));
  return r;
}

/// p(x) == p(-x) as polynomials, i.e. every term has even total degree.
bool is_symmetric(const Polynomial& p);

/// Symmetric up to odd-degree coefficients of magnitude <= tol.
bool is_symmetric(const RealPolynomial& p, double tol);

/// Largest |c| over all terms.
template <typename T>
double max_abs_coefficient(const BasicPolynomial<T>& p) {
  double m = 0.0;
  for (const auto& [e, c] : p.terms()) m = std::max(m, detail::magnitude(c));
  return m;
}

/// Re-indexes p onto the listed variables (0-based, in the given order).
/// Throws DimensionError if a dropped variable occurs with a nonzero exponent.
template <typename T>
BasicPolynomial<T> select_variables(const BasicPolynomial<T>& p, const std::vector<std::size_t>& keep) {
  std::vector<bool> kept(p.arity(), false);
  for (std::size_t k : keep) {
    if (k >= p.arity()) throw DimensionError("variable index out of range");
    kept[k] = true;
  }
  BasicPolynomial<T> r(keep.size());
  for (const auto& [e, c] : p.terms()) {
    for (std::size_t i = 0; i < e.size(); ++i)
      if (!kept[i] && e[i] != 0) throw DimensionError("dropped variable occurs in polynomial");
    Exponent f(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) f[j] = e[keep[j]];
    r.add_term(f, c);
  }
  return r;
}

}  // namespace unlinking
