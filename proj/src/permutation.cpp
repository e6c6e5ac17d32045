#include "sattn/permutation.hpp"

#include <numeric>
#include <string>
#include <utility>

#include "sattn/error.hpp"

namespace sattn {

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> f(n);
  std::iota(f.begin(), f.end(), std::size_t{0});
  auto inv = f;
  return Permutation(std::move(f), std::move(inv));
}

Permutation Permutation::from_forward(std::vector<std::size_t> forward) {
  const std::size_t n = forward.size();
  constexpr std::size_t unset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> inverse(n, unset);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t s = forward[i];
    if (s >= n || inverse[s] != unset) {
      throw ConfigError("Permutation: forward table is not a bijection at index " + std::to_string(i));
    }
    inverse[s] = i;
  }
  return Permutation(std::move(forward), std::move(inverse));
}

bool Permutation::is_identity() const noexcept {
  for (std::size_t i = 0; i < forward_.size(); ++i)
    if (forward_[i] != i) return false;
  return true;
}

Permutation sample_permutation(std::size_t n, SeededRng& rng) {
  if (n == 0) throw ConfigError("sample_permutation: n must be >= 1");
  std::vector<std::size_t> f(n);
  std::iota(f.begin(), f.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i + 1));
    std::swap(f[i], f[j]);
  }
  return Permutation::from_forward(std::move(f));
}

Permutation invert(const Permutation& p) { return Permutation(p.inverse_, p.forward_); }

Matrix permute_rows(const Matrix& x, const Permutation& p) {
  if (x.rows() != p.size()) {
    throw DimensionError("permute_rows: matrix has " + std::to_string(x.rows()) +
                         " rows, permutation has size " + std::to_string(p.size()));
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t s = 0; s < x.rows(); ++s) {
    auto src = x.row(p.token_at(s));
    std::copy(src.begin(), src.end(), out.row(s).begin());
  }
  return out;
}

}  // namespace sattn
