#pragma once

#include <cstddef>
#include <vector>

#include "sattn/matrix.hpp"
#include "sattn/rng.hpp"

namespace sattn {

/// A bijection sigma on {0, ..., n-1} with its inverse precomputed.
///
/// Row-placement convention, used everywhere in this project: permuting a
/// matrix moves token i to slot sigma(i), i.e. permuted[s] = x[sigma^-1(s)].
/// As a matrix, P_sigma[s, sigma^-1(s)] = 1 and permuted = P_sigma * x.
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(std::size_t n);
  /// Builds from sigma(i) = forward[i]; throws ConfigError if not a bijection.
  static Permutation from_forward(std::vector<std::size_t> forward);

  std::size_t size() const noexcept { return forward_.size(); }
  /// sigma(i): the slot token i occupies after permuting.
  std::size_t operator()(std::size_t token) const noexcept { return forward_[token]; }
  /// sigma^-1(s): the token sitting in slot s.
  std::size_t token_at(std::size_t slot) const noexcept { return inverse_[slot]; }

  const std::vector<std::size_t>& forward() const noexcept { return forward_; }
  const std::vector<std::size_t>& inverse() const noexcept { return inverse_; }

  bool is_identity() const noexcept;

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.forward_ == b.forward_; }

 private:
  Permutation(std::vector<std::size_t> forward, std::vector<std::size_t> inverse)
      : forward_(std::move(forward)), inverse_(std::move(inverse)) {}

  friend Permutation invert(const Permutation& p);

  std::vector<std::size_t> forward_;
  std::vector<std::size_t> inverse_;
};

/// Uniform draw from S_n by Fisher-Yates (descending i, j = rng.uniform_below(i + 1)).
/// Throws ConfigError for n = 0.
Permutation sample_permutation(std::size_t n, SeededRng& rng);

/// sigma^-1; swaps the forward and inverse tables.
Permutation invert(const Permutation& p);

/// out[s] = x[sigma^-1(s)] for every slot s. permute_rows(permute_rows(x, p), invert(p)) == x.
Matrix permute_rows(const Matrix& x, const Permutation& p);

}  // namespace sattn
