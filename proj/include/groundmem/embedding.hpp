#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include <Eigen/Core>

namespace groundmem {

using Embedding = Eigen::VectorXd;

inline constexpr int kMockEmbeddingDim = 64;

/// Cosine similarity with cos(0, .) := 0.
///
/// Accumulates in index order instead of through Eigen's packet reduction so
/// the result is bit-for-bit reproducible against a scalar reference.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  eigen_assert(a.size() == b.size());
  Scalar dot(0), na(0), nb(0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a.coeff(i) * b.coeff(i);
    na += a.coeff(i) * a.coeff(i);
    nb += b.coeff(i) * b.coeff(i);
  }
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

/// lambda * visual + (1 - lambda) * metadata.
template <typename Scalar>
Scalar hybrid_score(Scalar visual_cosine, Scalar metadata_cosine, Scalar lambda) {
  return lambda * visual_cosine + (Scalar(1) - lambda) * metadata_cosine;
}

/// True when every coefficient is finite.
template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v.coeff(i))) return false;
  }
  return true;
}

/// Deterministic token-hash embedding used by the mock backend: each lower-cased
/// word token adds +-1 at two seeded positions, then the vector is L2-normalized.
/// Throws Error{EmptyInput} when the text has no tokens.
Embedding hash_embedding(std::string_view text, std::uint64_t seed, int dimension = kMockEmbeddingDim);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace groundmem
