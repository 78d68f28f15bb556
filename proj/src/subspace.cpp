#include "unlinking/subspace.hpp"

#include <algorithm>
#include <cmath>

#include "unlinking/errors.hpp"

namespace unlinking {

namespace {

using IntegerMatrix = Matrix<mpz_class>;

struct Echelon {
  IntegerMatrix rows;                // row echelon form, integer entries
  std::vector<std::size_t> pivots;   // pivot column of each leading row
};

IntegerMatrix scale_to_integers(const RationalMatrix& m) {
  IntegerMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    mpz_class l = 1;
    for (std::size_t j = 0; j < m.cols(); ++j) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), m(i, j).get_den_mpz_t());
    for (std::size_t j = 0; j < m.cols(); ++j) {
      mpz_class v = m(i, j).get_num() * (l / m(i, j).get_den());
      out(i, j) = v;
    }
  }
  return out;
}

// Fraction-free elimination. Entries below the pivot of each step are the
// minors of the input, so every division by the previous pivot is exact.
Echelon bareiss(const RationalMatrix& m) {
  Echelon e{scale_to_integers(m), {}};
  IntegerMatrix& a = e.rows;
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  mpz_class previous = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a(p, c) == 0) ++p;
    if (p == rows) continue;
    if (p != r)
      for (std::size_t j = 0; j < cols; ++j) std::swap(a(p, j), a(r, j));
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        mpz_class v = a(r, c) * a(i, j) - a(i, c) * a(r, j);
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), previous.get_mpz_t());
        a(i, j) = v;
      }
      a(i, c) = 0;
    }
    previous = a(r, c);
    e.pivots.push_back(c);
    ++r;
  }
  return e;
}

Rational dot(const RationalVector& a, const RationalVector& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool is_zero_vector(const RationalVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return sgn(x) == 0; });
}

void check_ambient(const Subspace& a, const Subspace& b) {
  if (a.ambient() != b.ambient()) throw DimensionError("subspace ambient dimension mismatch");
}

}  // namespace

RationalVector normalize_direction(const RationalVector& v) {
  mpz_class l = 1;
  for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
  std::vector<mpz_class> ints;
  ints.reserve(v.size());
  mpz_class g = 0;
  for (const auto& x : v) {
    ints.push_back(x.get_num() * (l / x.get_den()));
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), ints.back().get_mpz_t());
  }
  RationalVector out(v.size(), Rational(0));
  if (g == 0) return out;
  auto first = std::find_if(ints.begin(), ints.end(), [](const mpz_class& x) { return x != 0; });
  if (*first < 0) g = -g;
  for (std::size_t i = 0; i < ints.size(); ++i) out[i] = Rational(mpz_class(ints[i] / g));
  return out;
}

std::size_t rank(const RationalMatrix& m) { return bareiss(m).pivots.size(); }

Subspace Subspace::full(std::size_t ambient) {
  std::vector<RationalVector> basis;
  for (std::size_t i = 0; i < ambient; ++i) {
    RationalVector e(ambient, Rational(0));
    e[i] = 1;
    basis.push_back(std::move(e));
  }
  return Subspace(ambient, std::move(basis));
}

Subspace Subspace::span(std::size_t ambient, const std::vector<RationalVector>& vectors) {
  const RationalMatrix stacked = RationalMatrix::from_rows(ambient, vectors);
  const Echelon e = bareiss(stacked);
  const std::size_t k = e.pivots.size();
  // Back-eliminate to reduced echelon form over Q.
  std::vector<RationalVector> rows(k, RationalVector(ambient));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < ambient; ++j) rows[i][j] = Rational(e.rows(i, j));
  for (std::size_t i = k; i-- > 0;) {
    const std::size_t pc = e.pivots[i];
    const Rational pivot = rows[i][pc];
    for (auto& x : rows[i]) x /= pivot;
    for (std::size_t h = 0; h < i; ++h) {
      const Rational f = rows[h][pc];
      if (sgn(f) == 0) continue;
      for (std::size_t j = 0; j < ambient; ++j) rows[h][j] -= f * rows[i][j];
    }
  }
  for (auto& row : rows) row = normalize_direction(row);
  return Subspace(ambient, std::move(rows));
}

bool Subspace::contains(const RationalVector& v) const {
  if (v.size() != ambient_) throw DimensionError("vector length does not match ambient dimension");
  if (is_zero_vector(v)) return true;
  std::vector<RationalVector> rows = basis_;
  rows.push_back(v);
  return rank(RationalMatrix::from_rows(ambient_, rows)) == basis_.size();
}

bool Subspace::contains(const Subspace& other) const {
  check_ambient(*this, other);
  if (other.dimension() > dimension()) return false;
  std::vector<RationalVector> rows = basis_;
  rows.insert(rows.end(), other.basis_.begin(), other.basis_.end());
  return rank(RationalMatrix::from_rows(ambient_, rows)) == basis_.size();
}

Subspace kernel(const RationalMatrix& m) {
  const std::size_t cols = m.cols();
  const Echelon e = bareiss(m);
  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : e.pivots) is_pivot[c] = true;
  std::vector<RationalVector> basis;
  for (std::size_t f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    RationalVector x(cols, Rational(0));
    x[f] = 1;
    for (std::size_t i = e.pivots.size(); i-- > 0;) {
      const std::size_t pc = e.pivots[i];
      Rational s = 0;
      for (std::size_t j = pc + 1; j < cols; ++j)
        if (sgn(x[j]) != 0) s += Rational(e.rows(i, j)) * x[j];
      x[pc] = -s / Rational(e.rows(i, pc));
    }
    basis.push_back(normalize_direction(x));
  }
  return Subspace(cols, std::move(basis));
}

Subspace orthogonal_complement(const Subspace& s) {
  return kernel(RationalMatrix::from_rows(s.ambient(), s.basis()));
}

Subspace intersect(const Subspace& a, const Subspace& b) {
  check_ambient(a, b);
  std::vector<RationalVector> constraints = orthogonal_complement(a).basis();
  const auto cb = orthogonal_complement(b).basis();
  constraints.insert(constraints.end(), cb.begin(), cb.end());
  return kernel(RationalMatrix::from_rows(a.ambient(), constraints));
}

Subspace subspace_sum(const Subspace& a, const Subspace& b) {
  check_ambient(a, b);
  std::vector<RationalVector> vectors = a.basis();
  vectors.insert(vectors.end(), b.basis().begin(), b.basis().end());
  return Subspace::span(a.ambient(), vectors);
}

RealMatrix orthonormalize_nested(const std::vector<Subspace>& chain, std::size_t ambient) {
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (chain[i].ambient() != ambient) throw DimensionError("chain element has wrong ambient dimension");
    if (i > 0 && !chain[i].contains(chain[i - 1])) {
      throw PreconditionError("subspace chain is not nested at position " + std::to_string(i));
    }
  }
  std::vector<RationalVector> orthogonal;
  std::vector<Rational> norms2;
  auto try_add = [&](const RationalVector& v) {
    RationalVector w = v;
    for (std::size_t k = 0; k < orthogonal.size(); ++k) {
      const Rational f = dot(v, orthogonal[k]) / norms2[k];
      if (sgn(f) == 0) continue;
      for (std::size_t j = 0; j < ambient; ++j) w[j] -= f * orthogonal[k][j];
    }
    if (is_zero_vector(w)) return;
    w = normalize_direction(w);
    norms2.push_back(dot(w, w));
    orthogonal.push_back(std::move(w));
  };
  for (const auto& level : chain)
    for (const auto& b : level.basis()) try_add(b);
  for (std::size_t j = 0; j < ambient && orthogonal.size() < ambient; ++j) {
    RationalVector e(ambient, Rational(0));
    e[j] = 1;
    try_add(e);
  }
  RealMatrix q(ambient, ambient);
  for (std::size_t k = 0; k < ambient; ++k) {
    const double norm = std::sqrt(norms2[k].get_d());
    for (std::size_t i = 0; i < ambient; ++i) q(i, k) = orthogonal[k][i].get_d() / norm;
  }
  return q;
}

nlohmann::ordered_json to_json(const Subspace& s) {
  nlohmann::ordered_json j;
  j["n"] = s.ambient();
  auto basis = nlohmann::ordered_json::array();
  for (const auto& v : s.basis()) {
    auto row = nlohmann::ordered_json::array();
    for (const auto& x : v) row.push_back(to_string(x));
    basis.push_back(std::move(row));
  }
  j["basis"] = std::move(basis);
  return j;
}

Subspace subspace_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("basis") || !j["n"].is_number_integer() ||
      !j["basis"].is_array()) {
    throw FormatError("subspace JSON must be {\"n\": int, \"basis\": [[\"p/q\", ...], ...]}");
  }
  const auto n = j["n"].get<std::size_t>();
  std::vector<RationalVector> vectors;
  for (const auto& row : j["basis"]) {
    if (!row.is_array() || row.size() != n) throw FormatError("basis vector length does not match \"n\"");
    RationalVector v;
    for (const auto& x : row) {
      if (!x.is_string()) throw FormatError("basis entries must be fraction strings");
      v.push_back(parse_rational(x.get<std::string>()));
    }
    vectors.push_back(std::move(v));
  }
  return Subspace::span(n, vectors);
}

}  // namespace unlinking
