#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sattn/masks.hpp"
#include "sattn/numerics.hpp"
#include "sattn/spectral.hpp"

using namespace sattn;

namespace {

constexpr auto kCirc = WindowConvention::SymmetricCircular;

Matrix circulant_transition(std::size_t n, std::size_t w) {
  return transition_matrix(build_window_mask(n, {w, kCirc}));
}

// P^T A P written out entrywise: (P^T A P)[i, j] = A[sigma(i), sigma(j)].
Matrix conjugate(const Matrix& a, const Permutation& p) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(p(i), p(j));
  return out;
}

}  // namespace

TEST(Spectrum, FourByThreeExample) {
  auto ev = circulant_eigenvalues(4, 3);
  sort_spectrum(ev);
  const Spectrum want{1.0, 1.0 / 3, 1.0 / 3, -1.0 / 3};
  ASSERT_EQ(ev.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_LT(std::abs(ev[i] - want[i]), 1e-12);
  EXPECT_LE(spectrum_mismatch(ev, dense_eigenvalues(circulant_transition(4, 3))), 1e-12);
}

TEST(Spectrum, DftClosedFormForOddWindows) {
  for (std::size_t w : {3u, 5u, 9u}) {
    const std::size_t n = 40;
    const auto ev = circulant_eigenvalues(n, w);
    ASSERT_EQ(ev.size(), n);
    std::vector<double> want, got;
    for (std::size_t j = 0; j < n; ++j) {
      double x = 1;
      for (std::size_t o = 1; o <= w / 2; ++o) x += 2 * std::cos(2 * std::numbers::pi * static_cast<double>(j * o) / n);
      want.push_back(x / static_cast<double>(w));
      got.push_back(ev[j].real());
      EXPECT_LT(std::abs(ev[j].imag()), 1e-12);
    }
    std::sort(want.rbegin(), want.rend());
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(got[j], want[j], 1e-12);
  }
}

TEST(Spectrum, EvenWindowMatchesDenseSolver) {
  const auto r = circulant_spectrum(64, 8);
  EXPECT_LT(r.dense_mismatch, 1e-9);
  EXPECT_LT(std::abs(r.eigenvalues.front() - 1.0), 1e-9);
  EXPECT_NEAR(r.lambda2_abs, second_magnitude(r.eigenvalues), 0.0);
  EXPECT_LT(r.lambda2_abs, 1.0);
}

TEST(Spectrum, TransitionMatrixRowStochastic) {
  const auto m = build_stochastic_mask(30, {4, kCirc}, Permutation::from_forward({
      29, 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25, 26, 27, 28}));
  const Matrix a = transition_matrix(m);
  for (std::size_t i = 0; i < 30; ++i) {
    double s = 0;
    for (double x : a.row(i)) s += x;
    EXPECT_NEAR(s, 1.0, 1e-15);
  }
}

TEST(Spectrum, PermutationMatrixActsLikePermuteRows) {
  SeededRng rng(1);
  const auto p = sample_permutation(9, rng);
  Matrix x(9, 2);
  for (std::size_t i = 0; i < 9; ++i) x(i, 0) = static_cast<double>(i), x(i, 1) = -static_cast<double>(i * i);
  EXPECT_EQ(matmul(permutation_matrix(p), x), permute_rows(x, p));
}

TEST(Spectrum, PermutedTransitionShareEigenvalues) {
  SeededRng rng(2);
  const Matrix a = circulant_transition(64, 8);
  auto base = dense_eigenvalues(a);
  for (int t = 0; t < 20; ++t) {
    const auto p = sample_permutation(64, rng);
    const Matrix pa = matmul(matmul(permutation_matrix(p).transposed(), a), permutation_matrix(p));
    EXPECT_LE(max_abs_diff(pa, conjugate(a, p)), 0.0);
    EXPECT_EQ(pa, transition_matrix(build_stochastic_mask(64, {8, kCirc}, p)));
    EXPECT_LT(spectrum_mismatch(dense_eigenvalues(pa), base), 1e-9);
  }
}

TEST(Mixing, SingleLayerMatchesCirculant) {
  const auto r = multilayer_mixing(64, 8, 1, {1, 2, 3});
  for (double l2 : r.product_lambda2) EXPECT_NEAR(l2, r.circulant_lambda2, 1e-9);
  EXPECT_NEAR(r.circulant_lambda2_pow, r.circulant_lambda2, 0.0);
}

TEST(Mixing, IdentityPermutationsGiveCirculantPower) {
  const Matrix a = circulant_transition(32, 5);
  const Matrix a3 = matmul(matmul(a, a), a);
  EXPECT_LE(max_abs_diff(mixing_product(32, 5, 3, 7, true), a3), 1e-15);
  const auto r = multilayer_mixing(32, 5, 3, {7}, true);
  EXPECT_NEAR(r.product_lambda2[0], r.circulant_lambda2_pow, 1e-9);
}

TEST(Mixing, ProductIsRowStochastic) {
  const Matrix m = mixing_product(48, 6, 4, 3);
  for (std::size_t i = 0; i < 48; ++i) {
    double s = 0;
    for (double x : m.row(i)) s += x;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Mixing, RandomLayersMixFaster) {
  const auto r = multilayer_mixing(128, 8, 3, {1, 2, 3, 4, 5});
  EXPECT_LT(r.median_product_lambda2, r.circulant_lambda2_pow);
}

TEST(Spectrum, MismatchHelpers) {
  Spectrum a{1.0, {0.5, 0.2}, {0.5, -0.2}};
  Spectrum b{{0.5, -0.2}, 1.0, {0.5, 0.2}};
  EXPECT_LT(spectrum_mismatch(a, b), 1e-15);
  EXPECT_NEAR(second_magnitude(a), std::abs(std::complex<double>(0.5, 0.2)), 1e-15);
}
