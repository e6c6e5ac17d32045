#include "sattn/numerics.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "sattn/error.hpp"

namespace sattn {

namespace {

void check_matmul(const Matrix& a, std::size_t b_inner, const char* what) {
  if (a.cols() != b_inner) {
    throw DimensionError(std::string(what) + ": inner dimensions " + std::to_string(a.cols()) +
                         " and " + std::to_string(b_inner) + " disagree");
  }
}

void check_softmax(const Matrix& scores, const MaskMatrix& mask) {
  if (scores.rows() != scores.cols() || mask.n() != scores.rows()) {
    throw DimensionError("masked_row_softmax: scores " + std::to_string(scores.rows()) + "x" +
                         std::to_string(scores.cols()) + " vs mask " + std::to_string(mask.n()));
  }
}

void softmax_row(std::span<const double> s, const std::uint8_t* bits, std::span<double> out,
                 std::size_t row) {
  const std::size_t n = s.size();
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (bits[j] && s[j] > mx) mx = s[j];
  if (mx == -std::numeric_limits<double>::infinity()) throw FullyMaskedRowError(row);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double e = bits[j] ? std::exp(s[j] - mx) : 0.0;
    out[j] = e;
    sum += e;
  }
  for (std::size_t j = 0; j < n; ++j) out[j] /= sum;
}

}  // namespace

double sigmoid(double x) noexcept {
  // Branches keep exp() from overflowing for large |x|.
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_matmul(a, b.rows(), "matmul");
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t k = a.cols();
  const std::size_t p = b.cols();
  Matrix c(a.rows(), p);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    auto out = c.row(static_cast<std::size_t>(i));
    auto ai = a.row(static_cast<std::size_t>(i));
    for (std::size_t t = 0; t < k; ++t) {
      const double av = ai[t];
      auto bt = b.row(t);
      for (std::size_t j = 0; j < p; ++j) out[j] += av * bt[j];
    }
  }
  c.require_finite("matmul");
  return c;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  check_matmul(a, b.cols(), "matmul_transposed");
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t p = b.rows();
  Matrix c(a.rows(), p);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    auto ai = a.row(static_cast<std::size_t>(i));
    for (std::size_t j = 0; j < p; ++j) {
      auto bj = b.row(j);
      double acc = 0.0;
      for (std::size_t t = 0; t < ai.size(); ++t) acc += ai[t] * bj[t];
      c(static_cast<std::size_t>(i), j) = acc;
    }
  }
  c.require_finite("matmul_transposed");
  return c;
}

Matrix masked_row_softmax(const Matrix& scores, const MaskMatrix& mask) {
  check_softmax(scores, mask);
  const auto n = static_cast<std::ptrdiff_t>(scores.rows());
  Matrix out(scores.rows(), scores.cols());
  // Exceptions must not escape an OpenMP region; record the first bad row.
  std::ptrdiff_t bad_row = -1;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto r = static_cast<std::size_t>(i);
    try {
      softmax_row(scores.row(r), mask.row_data(r), out.row(r), r);
    } catch (const FullyMaskedRowError&) {
#pragma omp critical(sattn_softmax_bad_row)
      if (bad_row < 0 || i < bad_row) bad_row = i;
    }
  }
  if (bad_row >= 0) throw FullyMaskedRowError(static_cast<std::size_t>(bad_row));
  return out;
}

namespace serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_matmul(a, b.rows(), "serial::matmul");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < a.cols(); ++t) acc += a(i, t) * b(t, j);
      c(i, j) = acc;
    }
  c.require_finite("serial::matmul");
  return c;
}

Matrix masked_row_softmax(const Matrix& scores, const MaskMatrix& mask) {
  check_softmax(scores, mask);
  const std::size_t n = scores.rows();
  Matrix out(n, n);
  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < n; ++i) {
    live.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (mask(i, j)) live.push_back(j);
    if (live.empty()) throw FullyMaskedRowError(i);
    double mx = scores(i, live.front());
    for (auto j : live) mx = std::max(mx, scores(i, j));
    double sum = 0.0;
    for (auto j : live) sum += std::exp(scores(i, j) - mx);
    for (auto j : live) out(i, j) = std::exp(scores(i, j) - mx) / sum;
  }
  return out;
}

}  // namespace serial

}  // namespace sattn
