#include "sattn/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "sattn/error.hpp"
#include "sattn/masks.hpp"
#include "sattn/numerics.hpp"

namespace sattn {

Matrix transition_matrix(const MaskMatrix& mask) {
  const std::size_t n = mask.n();
  Matrix t(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t deg = mask.row_count(i);
    if (deg == 0) throw FullyMaskedRowError(i);
    const double a = 1.0 / static_cast<double>(deg);
    for (std::size_t j = 0; j < n; ++j)
      if (mask(i, j)) t(i, j) = a;
  }
  return t;
}

Matrix permutation_matrix(const Permutation& p) {
  Matrix m(p.size(), p.size());
  for (std::size_t s = 0; s < p.size(); ++s) m(s, p.token_at(s)) = 1.0;
  return m;
}

Spectrum circulant_eigenvalues(std::size_t n, std::size_t w) {
  const WindowSpec spec{w, WindowConvention::SymmetricCircular};
  validate_window(n, spec);
  const auto offsets = window_offsets(spec);
  Spectrum ev(n);
  for (std::size_t j = 0; j < n; ++j) {
    double re = 0.0, im = 0.0;
    for (auto o : offsets) {
      // Reduce j*o mod n first so the angle stays in [0, 2 pi).
      const auto sn = static_cast<std::ptrdiff_t>(n);
      const std::ptrdiff_t phase = ((static_cast<std::ptrdiff_t>(j) * o) % sn + sn) % sn;
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(phase) / static_cast<double>(n);
      re += std::cos(theta);
      im += std::sin(theta);
    }
    ev[j] = {re / static_cast<double>(w), im / static_cast<double>(w)};
  }
  sort_spectrum(ev);
  return ev;
}

Spectrum dense_eigenvalues(const Matrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("dense_eigenvalues: matrix must be square");
  const auto n = static_cast<Eigen::Index>(a.rows());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NonFiniteError("dense_eigenvalues: eigensolver did not converge");
  Spectrum ev(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  sort_spectrum(ev);
  return ev;
}

void sort_spectrum(Spectrum& s) {
  std::sort(s.begin(), s.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
}

double spectrum_mismatch(const Spectrum& a, const Spectrum& b) {
  if (a.size() != b.size()) throw DimensionError("spectrum_mismatch: spectra differ in length");
  std::vector<char> used(b.size(), 0);
  double worst = 0.0;
  for (const auto& x : a) {
    std::size_t best = b.size();
    double best_d = 0.0;
    for (std::size_t k = 0; k < b.size(); ++k) {
      if (used[k]) continue;
      const double d = std::abs(x - b[k]);
      if (best == b.size() || d < best_d) {
        best = k;
        best_d = d;
      }
    }
    used[best] = 1;
    worst = std::max(worst, best_d);
  }
  return worst;
}

double second_magnitude(const Spectrum& s) {
  if (s.size() < 2) return 0.0;
  std::vector<double> mags;
  mags.reserve(s.size());
  for (const auto& x : s) mags.push_back(std::abs(x));
  std::partial_sort(mags.begin(), mags.begin() + 2, mags.end(), std::greater<>());
  return mags[1];
}

SpectrumReport circulant_spectrum(std::size_t n, std::size_t w) {
  SpectrumReport r;
  r.n = n;
  r.w = w;
  r.eigenvalues = circulant_eigenvalues(n, w);
  r.lambda2_abs = second_magnitude(r.eigenvalues);
  const Matrix a = transition_matrix(build_window_mask(n, {w, WindowConvention::SymmetricCircular}));
  r.dense_mismatch = spectrum_mismatch(r.eigenvalues, dense_eigenvalues(a));
  return r;
}

Matrix mixing_product(std::size_t n, std::size_t w, std::size_t depth, Seed seed, bool identity_permutations) {
  if (depth < 1) throw ConfigError("multilayer_mixing: depth must be >= 1");
  const WindowSpec spec{w, WindowConvention::SymmetricCircular};
  Matrix product;
  for (std::size_t l = 1; l <= depth; ++l) {
    SeededRng rng(derive_seed(seed, l, 0));
    const Permutation sigma = identity_permutations ? Permutation::identity(n) : sample_permutation(n, rng);
    const Matrix layer = transition_matrix(build_stochastic_mask(n, spec, sigma));
    product = (l == 1) ? layer : matmul(layer, product);
  }
  return product;
}

MixingReport multilayer_mixing(std::size_t n, std::size_t w, std::size_t depth, const std::vector<Seed>& seeds,
                               bool identity_permutations) {
  if (seeds.empty()) throw ConfigError("multilayer_mixing: at least one seed is required");
  MixingReport r;
  r.n = n;
  r.w = w;
  r.depth = depth;
  r.circulant_lambda2 = second_magnitude(circulant_eigenvalues(n, w));
  r.circulant_lambda2_pow = std::pow(r.circulant_lambda2, static_cast<double>(depth));
  for (auto seed : seeds) {
    r.product_lambda2.push_back(
        second_magnitude(dense_eigenvalues(mixing_product(n, w, depth, seed, identity_permutations))));
  }
  auto sorted = r.product_lambda2;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  r.median_product_lambda2 = (m % 2 == 1) ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  return r;
}

}  // namespace sattn
