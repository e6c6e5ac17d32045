#include "sattn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sattn/error.hpp"

namespace sattn {

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Matrix: data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite("Matrix construction");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer list");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite("Matrix construction");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::filled(std::size_t rows, std::size_t cols, double value) {
  return Matrix(rows, cols, std::vector<double>(rows * cols, value));
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

void Matrix::require_finite(const char* context) const {
  for (std::size_t idx = 0; idx < data_.size(); ++idx) {
    if (!std::isfinite(data_[idx])) {
      throw NonFiniteError(std::string(context) + ": non-finite entry at (" +
                           std::to_string(idx / std::max<std::size_t>(cols_, 1)) + ", " +
                           std::to_string(idx % std::max<std::size_t>(cols_, 1)) + ")");
    }
  }
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("max_abs_diff: shape mismatch");
  double m = 0.0;
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

Matrix column_block(const Matrix& a, std::size_t first, std::size_t count) {
  if (first + count > a.cols()) throw DimensionError("column_block: range exceeds columns");
  Matrix out(a.rows(), count);
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < count; ++c) out(r, c) = a(r, first + c);
  return out;
}

void set_column_block(Matrix& dst, std::size_t first, const Matrix& block) {
  if (block.rows() != dst.rows() || first + block.cols() > dst.cols())
    throw DimensionError("set_column_block: block does not fit");
  for (std::size_t r = 0; r < dst.rows(); ++r)
    for (std::size_t c = 0; c < block.cols(); ++c) dst(r, first + c) = block(r, c);
}

}  // namespace sattn
