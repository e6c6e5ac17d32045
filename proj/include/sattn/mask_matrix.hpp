#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace sattn {

/// Dense n x n binary attention mask. bit(i, j) = 1 means query i may attend
/// to key j (information flows j -> i).
class MaskMatrix {
 public:
  MaskMatrix() = default;
  explicit MaskMatrix(std::size_t n, bool value = false)
      : n_(n), bits_(n * n, value ? 1 : 0) {}

  static MaskMatrix identity(std::size_t n) {
    MaskMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  std::size_t n() const noexcept { return n_; }

  bool operator()(std::size_t i, std::size_t j) const noexcept { return bits_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) noexcept { bits_[i * n_ + j] = v ? 1 : 0; }

  const std::uint8_t* row_data(std::size_t i) const noexcept { return bits_.data() + i * n_; }

  std::size_t count_ones() const noexcept {
    std::size_t c = 0;
    for (auto b : bits_) c += b;
    return c;
  }

  std::size_t row_count(std::size_t i) const noexcept {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n_; ++j) c += bits_[i * n_ + j];
    return c;
  }

  friend bool operator==(const MaskMatrix&, const MaskMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace sattn
