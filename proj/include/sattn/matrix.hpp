#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sattn {

/// Dense row-major matrix of doubles. Entries are always finite.
class Matrix {
 public:
  Matrix() = default;
  /// Zero-filled rows x cols.
  Matrix(std::size_t rows, std::size_t cols);
  /// Takes ownership of row-major data; throws DimensionError on a size
  /// mismatch and NonFiniteError on NaN/Inf.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  /// Nested-list literal, mostly for tests: Matrix{{1, 2}, {3, 4}}.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix filled(std::size_t rows, std::size_t cols, double value);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transposed() const;

  /// Throws NonFiniteError naming the first offending entry.
  void require_finite(const char* context) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Largest |a - b| over all entries; shapes must agree.
double max_abs_diff(const Matrix& a, const Matrix& b);

/// Largest |a_ij|.
double max_abs(const Matrix& a);

/// Columns [first, first + count) of every row.
Matrix column_block(const Matrix& a, std::size_t first, std::size_t count);

/// Writes `block` into columns [first, first + block.cols()) of `dst`.
void set_column_block(Matrix& dst, std::size_t first, const Matrix& block);

}  // namespace sattn
