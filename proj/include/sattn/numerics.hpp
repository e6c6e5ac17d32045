#pragma once

#include "sattn/mask_matrix.hpp"
#include "sattn/matrix.hpp"

namespace sattn {

// Kernels in this header parallelize over output rows with OpenMP when built
// with it. Each output row is computed by exactly one thread in a fixed order,
// so results are bit-identical to the serial references below for any thread
// count.

/// a[m x k] * b[k x p]. Accumulates in ascending k for every output entry.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a[m x k] * b[p x k]^T without materializing the transpose.
Matrix matmul_transposed(const Matrix& a, const Matrix& b);

/// Row-wise softmax over the unmasked entries of `scores`; masked entries of the
/// result are exactly 0. Each row is stabilized by subtracting its maximum
/// unmasked score. Throws FullyMaskedRowError for a row with no unmasked entry.
Matrix masked_row_softmax(const Matrix& scores, const MaskMatrix& mask);

/// Elementwise logistic function.
double sigmoid(double x) noexcept;

namespace serial {

// Single-threaded references, kept for tests and the benchmark.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix masked_row_softmax(const Matrix& scores, const MaskMatrix& mask);

}  // namespace serial

}  // namespace sattn
