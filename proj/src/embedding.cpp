#include "groundmem/embedding.hpp"

#include "groundmem/error.hpp"
#include "groundmem/text.hpp"

namespace groundmem {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Embedding hash_embedding(std::string_view text, std::uint64_t seed, int dimension) {
  const auto tokens = text::word_tokens(text);
  if (tokens.empty()) fail(ErrorCode::EmptyInput, "cannot embed empty text");
  Embedding v = Embedding::Zero(dimension);
  const auto dim = static_cast<std::uint64_t>(dimension);
  for (const auto& tok : tokens) {
    const std::uint64_t h1 = splitmix64(fnv1a64(tok) ^ seed);
    const std::uint64_t h2 = splitmix64(h1);
    v[static_cast<Eigen::Index>(h1 % dim)] += ((h1 >> 32) & 1U) ? 1.0 : -1.0;
    v[static_cast<Eigen::Index>(h2 % dim)] += ((h2 >> 32) & 1U) ? 1.0 : -1.0;
  }
  double sq = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) sq += v[i] * v[i];
  if (sq > 0.0) v /= std::sqrt(sq);
  return v;
}

}  // namespace groundmem
