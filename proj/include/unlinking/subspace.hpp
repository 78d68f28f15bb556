#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "unlinking/matrix.hpp"
#include "unlinking/rational.hpp"

namespace unlinking {

/// Scales v to a primitive integer vector whose first nonzero entry is positive.
RationalVector normalize_direction(const RationalVector& v);

/// Exact rank via fraction-free (Bareiss) elimination.
std::size_t rank(const RationalMatrix& m);

/// A linear subspace of Q^n given by a linearly independent basis.
/// Bases are normalized with normalize_direction but are otherwise not unique;
/// equality is decided by mutual containment.
class Subspace {
 public:
  /// The zero subspace of Q^ambient.
  explicit Subspace(std::size_t ambient) : ambient_(ambient) {}

  static Subspace full(std::size_t ambient);

  /// Span of arbitrary vectors; the stored basis is the reduced echelon form of
  /// the stacked vectors (pivot order), each row normalized.
  static Subspace span(std::size_t ambient, const std::vector<RationalVector>& vectors);

  std::size_t ambient() const noexcept { return ambient_; }
  std::size_t dimension() const noexcept { return basis_.size(); }
  const std::vector<RationalVector>& basis() const noexcept { return basis_; }
  bool is_zero() const noexcept { return basis_.empty(); }

  bool contains(const RationalVector& v) const;
  bool contains(const Subspace& other) const;

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.ambient_ == b.ambient_ && a.dimension() == b.dimension() && a.contains(b);
  }

 private:
  friend Subspace kernel(const RationalMatrix& m);
  Subspace(std::size_t ambient, std::vector<RationalVector> independent_basis)
      : ambient_(ambient), basis_(std::move(independent_basis)) {}

  std::size_t ambient_;
  std::vector<RationalVector> basis_;
};

/// {v : M v = 0}. One basis vector per free column, free columns in increasing
/// order, obtained by back-substitution through the echelon form.
Subspace kernel(const RationalMatrix& m);

Subspace orthogonal_complement(const Subspace& s);

/// Kernel of the stacked complement constraints of both operands.
Subspace intersect(const Subspace& a, const Subspace& b);

Subspace subspace_sum(const Subspace& a, const Subspace& b);

/// Orthonormal n x n matrix (columns) such that for every chain element T_i the
/// first dim(T_i) columns span T_i. Chain elements must satisfy T_1 ⊆ T_2 ⊆ ...
/// (equal neighbours are allowed); the last element is completed to Q^n with
/// unit vectors in index order. Orthogonalization is exact over Q; only the
/// final normalization is floating point. Throws PreconditionError if the chain
/// is not nested.
RealMatrix orthonormalize_nested(const std::vector<Subspace>& chain, std::size_t ambient);

/// {"n": <int>, "basis": [["p/q", ...], ...]}.
nlohmann::ordered_json to_json(const Subspace& s);

/// Accepts any spanning set; the result is re-reduced with Subspace::span.
Subspace subspace_from_json(const nlohmann::json& j);

}  // namespace unlinking
