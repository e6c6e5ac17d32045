#pragma once

#include <cmath>
#include <vector>

#include "sattn/mask_matrix.hpp"
#include "sattn/matrix.hpp"
#include "sattn/rng.hpp"

namespace oracle {

inline sattn::Matrix random(std::size_t r, std::size_t c, sattn::SeededRng& rng, double lo = -1.0, double hi = 1.0) {
  sattn::Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline sattn::Matrix triple_loop(const sattn::Matrix& a, const sattn::Matrix& b) {
  sattn::Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += static_cast<long double>(a(i, k)) * b(k, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

// Straight-from-the-definition masked attention: exp of raw scores over the
// unmasked set, normalized, times v.
inline sattn::Matrix masked_attention(const sattn::Matrix& q, const sattn::Matrix& k, const sattn::Matrix& v,
                                      const sattn::MaskMatrix& mask, double temperature = 1.0) {
  const std::size_t n = q.rows();
  const double scale = std::isinf(temperature) ? 0.0 : 1.0 / std::sqrt(double(q.cols())) / temperature;
  sattn::Matrix y(n, v.cols());
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(n, 0.0);
    double mx = -1e300;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask(i, j)) continue;
      double dot = 0;
      for (std::size_t c = 0; c < q.cols(); ++c) dot += q(i, c) * k(j, c);
      s[j] = dot * scale;
      mx = std::max(mx, s[j]);
    }
    double z = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (mask(i, j)) z += std::exp(s[j] - mx);
    for (std::size_t j = 0; j < n; ++j)
      if (mask(i, j))
        for (std::size_t c = 0; c < v.cols(); ++c) y(i, c) += std::exp(s[j] - mx) / z * v(j, c);
  }
  return y;
}

inline sattn::MaskMatrix lower_triangle(std::size_t n) {
  sattn::MaskMatrix m(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m.set(i, j, true);
  return m;
}

}  // namespace oracle
