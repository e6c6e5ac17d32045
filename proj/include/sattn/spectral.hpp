#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "sattn/mask_matrix.hpp"
#include "sattn/matrix.hpp"
#include "sattn/permutation.hpp"
#include "sattn/rng.hpp"

namespace sattn {

using Spectrum = std::vector<std::complex<double>>;

/// Uniform-attention transition matrix: row i spreads weight 1/deg(i) over its
/// unmasked keys. Throws FullyMaskedRowError on an empty row.
Matrix transition_matrix(const MaskMatrix& mask);

/// P_sigma with P[s, sigma^-1(s)] = 1, so permute_rows(x, p) == P x.
Matrix permutation_matrix(const Permutation& p);

/// Eigenvalues of A_w / w for the circular window, from the circulant DFT
/// formula lambda_j = (1/w) sum_{o in offsets} exp(2 pi i j o / n), j = 0..n-1,
/// returned in sort_spectrum order.
Spectrum circulant_eigenvalues(std::size_t n, std::size_t w);

/// General real eigensolver (Eigen's EigenSolver).
Spectrum dense_eigenvalues(const Matrix& a);

/// Sorted by descending real part, then descending imaginary part.
void sort_spectrum(Spectrum& s);

/// Largest distance between paired eigenvalues after greedy nearest matching.
/// The two lists must have equal length.
double spectrum_mismatch(const Spectrum& a, const Spectrum& b);

/// Second-largest |lambda|.
double second_magnitude(const Spectrum& s);

struct SpectrumReport {
  std::size_t n = 0;
  std::size_t w = 0;
  Spectrum eigenvalues;          ///< DFT route, sorted
  double lambda2_abs = 0;
  double dense_mismatch = 0;     ///< vs. dense eigensolver on A_w / w
};

SpectrumReport circulant_spectrum(std::size_t n, std::size_t w);

struct MixingReport {
  std::size_t n = 0;
  std::size_t w = 0;
  std::size_t depth = 0;
  std::vector<double> product_lambda2;  ///< per seed |lambda_2(A^{sigma_L} ... A^{sigma_1})|
  double median_product_lambda2 = 0;
  double circulant_lambda2 = 0;         ///< |lambda_2(A_w / w)|
  double circulant_lambda2_pow = 0;     ///< |lambda_2(A_w / w)|^L
};

/// Builds the product of `depth` uniform-attention SA transition matrices
/// (layer l of seed s draws sigma from derive_seed(seed, l, 0)) and reports its
/// second eigenvalue magnitude. `identity_permutations` replaces every sigma by
/// the identity, which reduces the product to (A_w / w)^L.
MixingReport multilayer_mixing(std::size_t n, std::size_t w, std::size_t depth, const std::vector<Seed>& seeds,
                               bool identity_permutations = false);

/// The matrix product A^{sigma_L} ... A^{sigma_1} itself.
Matrix mixing_product(std::size_t n, std::size_t w, std::size_t depth, Seed seed, bool identity_permutations = false);

}  // namespace sattn
