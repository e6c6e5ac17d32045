#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sattn/error.hpp"
#include "sattn/stats.hpp"

using namespace sattn;

namespace {

// Variance of the mean of a uniform w-subset, by enumerating every subset.
double subset_mean_variance(const Matrix& v, std::size_t w) {
  const std::size_t n = v.rows(), d = v.cols();
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<long>(w), true);
  std::vector<double> mean(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) mean[c] += v(r, c) / static_cast<double>(n);
  double acc = 0;
  std::size_t count = 0;
  std::sort(pick.begin(), pick.end());
  do {
    for (std::size_t c = 0; c < d; ++c) {
      double s = 0;
      for (std::size_t r = 0; r < n; ++r)
        if (pick[r]) s += v(r, c);
      acc += (s / static_cast<double>(w) - mean[c]) * (s / static_cast<double>(w) - mean[c]);
    }
    ++count;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return acc / static_cast<double>(count);
}

Matrix constant_rows(std::size_t n, std::vector<double> row) {
  Matrix m(n, row.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < row.size(); ++c) m(i, c) = row[c];
  return m;
}

}  // namespace

TEST(Variance, TwoPointExample) {
  const auto r = sa_variance_exact(Matrix{{0}, {2}}, 1);
  EXPECT_DOUBLE_EQ(r.sigma_v2, 1.0);
  EXPECT_DOUBLE_EQ(r.exact, 1.0);
  EXPECT_DOUBLE_EQ(r.b_max, 2.0);
  EXPECT_DOUBLE_EQ(r.bound, 16.0);
}

TEST(Variance, ClosedFormMatchesSubsetEnumeration) {
  SeededRng rng(1);
  const Matrix v = oracle::random(9, 3, rng);
  for (std::size_t w = 1; w <= 9; ++w)
    EXPECT_NEAR(sa_variance_exact(v, w).exact, subset_mean_variance(v, w), 1e-14) << "w=" << w;
}

TEST(Variance, FullWindowIsZero) {
  SeededRng rng(2);
  const Matrix v = oracle::random(16, 2, rng);
  EXPECT_EQ(sa_variance_exact(v, 16).exact, 0.0);
  const auto mc = sa_variance_mc(v, 16, 200, rng);
  EXPECT_LE(mc.mc, 1e-28);
}

TEST(Variance, ConstantValuesGiveZero) {
  SeededRng rng(3);
  const auto r = sa_variance_mc(constant_rows(20, {0.3, -2.0}), 5, 200, rng);
  EXPECT_LE(r.mc, 1e-12);
  EXPECT_LE(r.token_mc, 1e-12);
  EXPECT_LE(r.exact, 1e-28);
}

TEST(Variance, BoundChainOnRandomValues) {
  SeededRng rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.uniform_below(60);
    const std::size_t w = 1 + rng.uniform_below(n);
    const double scale = std::exp(rng.uniform(-3, 3));
    const Matrix v = oracle::random(n, 1 + rng.uniform_below(6), rng, -scale, scale);
    const auto r = sa_variance_exact(v, w);
    EXPECT_GE(r.exact, 0.0);
    EXPECT_LE(r.exact, r.sigma_v2 / static_cast<double>(w) * (1 + 1e-12));
    EXPECT_LE(r.sigma_v2 / static_cast<double>(w), r.bound * (1 + 1e-12));
  }
}

TEST(Variance, MonteCarloMatchesClosedForm) {
  SeededRng rng(5);
  const Matrix v = oracle::random(32, 4, rng);
  const auto r = sa_variance_mc(v, 4, 4000, rng);
  EXPECT_NEAR(r.mc, r.exact, 4 * r.mc_std_error);
  EXPECT_NEAR(r.mc, r.exact, 0.05 * r.exact);
  EXPECT_NEAR(r.token_mc, r.token_exact, 0.1 * r.token_exact);
}

TEST(Variance, StderrShrinksLikeRootTrials) {
  SeededRng a(6), b(7);
  const Matrix v = oracle::random(32, 2, a);
  const auto small = sa_variance_mc(v, 4, 1000, a);
  const auto large = sa_variance_mc(v, 4, 4000, b);
  EXPECT_NEAR(small.mc_std_error / large.mc_std_error, 2.0, 0.4);
}

TEST(Variance, RejectsBadArguments) {
  SeededRng rng(8);
  EXPECT_THROW(sa_variance_exact(Matrix(4, 1), 0), ConfigError);
  EXPECT_THROW(sa_variance_exact(Matrix(4, 1), 5), ConfigError);
  EXPECT_THROW(sa_variance_mc(Matrix(4, 1), 2, 1, rng), ConfigError);
}

TEST(Bias, ExactFormulaAgainstDirectAverage) {
  // Token i always sees itself plus a uniform (w-1)-subset of the others.
  SeededRng rng(9);
  const Matrix v = oracle::random(7, 2, rng);
  const std::size_t n = 7, w = 3;
  double acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double sq = 0;
    for (std::size_t c = 0; c < 2; ++c) {
      double mean = 0, others = 0;
      for (std::size_t j = 0; j < n; ++j) mean += v(j, c) / n;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others += v(j, c);
      const double e = (v(i, c) + (w - 1.0) * others / (n - 1.0)) / w;
      sq += (e - mean) * (e - mean);
    }
    acc += sq;
  }
  EXPECT_NEAR(sa_bias_exact(v, w), std::sqrt(acc / n), 1e-14);
}

TEST(Bias, DegenerateCases) {
  SeededRng rng(10);
  const Matrix v = oracle::random(16, 3, rng);
  const auto full = sa_bias_mc(v, {16}, kUniformTemperature, 50, rng);
  EXPECT_LE(full.points[0].deviation, 1e-15);
  EXPECT_EQ(sa_bias_exact(v, 16), 0.0);
  const auto flat = sa_bias_mc(constant_rows(16, {1.5, -0.5}), {4}, kUniformTemperature, 50, rng);
  EXPECT_LE(flat.points[0].deviation, 1e-14);
}

TEST(Bias, MonteCarloTracksExactAndDecays) {
  SeededRng rng(11);
  const Matrix v = oracle::random(64, 4, rng);
  const auto r = sa_bias_mc(v, {4, 8, 16}, kUniformTemperature, 4000, rng);
  ASSERT_EQ(r.points.size(), 3u);
  for (const auto& p : r.points) {
    EXPECT_GT(p.std_error, 0.0);
    EXPECT_NEAR(p.deviation, p.exact, 0.1 * p.exact + 3 * p.std_error);
  }
  EXPECT_GT(r.points[0].deviation, r.points[1].deviation);
  EXPECT_GT(r.points[1].deviation, r.points[2].deviation);
  const double ratio = r.points[2].deviation / r.points[1].deviation;
  EXPECT_GE(ratio, 0.3);
  EXPECT_LE(ratio, 0.8);
}

TEST(Bias, FiniteTemperatureRuns) {
  SeededRng rng(12);
  const auto r = sa_bias_mc(oracle::random(32, 2, rng), {4}, 1e4, 500, rng);
  EXPECT_NEAR(r.points[0].deviation, r.points[0].exact, 0.2 * r.points[0].exact + 3 * r.points[0].std_error);
}

TEST(BVDecomposition, ResidualWithinNoise) {
  SeededRng rng(13);
  const auto inp = AttentionInputs::make(oracle::random(24, 4, rng), oracle::random(24, 4, rng),
                                         oracle::random(24, 4, rng));
  const GateParams g{oracle::random(4, 4, rng), oracle::random(4, 4, rng)};
  const auto r = fusion_bv_decompose(inp, g, 4, 3000, rng);
  EXPECT_GE(r.bias2, 0.0);
  EXPECT_GE(r.variance, 0.0);
  EXPECT_GT(r.combined_std_error, 0.0);
  EXPECT_LE(std::abs(r.residual), 3 * r.combined_std_error);
  EXPECT_GE(r.dim_variance_ratio, 1.0);
}

TEST(BVDecomposition, ResidualIsCalibrated) {
  // Over independent reruns residual / combined_std_error should look standard normal.
  SeededRng rng(18);
  const auto inp = AttentionInputs::make(oracle::random(16, 3, rng), oracle::random(16, 3, rng),
                                         oracle::random(16, 3, rng));
  const GateParams g{oracle::random(3, 3, rng), oracle::random(3, 3, rng)};
  constexpr int reps = 40;
  double s = 0, s2 = 0;
  for (int k = 0; k < reps; ++k) {
    SeededRng r(derive_seed(18, 1, static_cast<std::uint64_t>(k)));
    const auto rep = fusion_bv_decompose(inp, g, 4, 1000, r);
    const double z = rep.residual / rep.combined_std_error;
    s += z;
    s2 += z * z;
  }
  const double mean = s / reps, var = s2 / reps - mean * mean;
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(double(reps)));
  EXPECT_GT(var, 0.4);
  EXPECT_LT(var, 1.8);
}

TEST(BVDecomposition, ClosedSaGateIsPureSwaBias) {
  SeededRng rng(14);
  const Matrix v = oracle::random(20, 3, rng, 0.1, 1.0);
  const auto inp = AttentionInputs::make(v, v, v);
  const GateParams g{Matrix::filled(3, 3, 100.0), Matrix::filled(3, 3, -100.0)};
  const auto r = fusion_bv_decompose(inp, g, 4, 200, rng);
  EXPECT_LE(r.variance, 1e-20);
  EXPECT_NEAR(r.mse, r.swa_bias2, 1e-9 * (1 + r.swa_bias2));
  EXPECT_NEAR(r.bias2, r.swa_bias2, 1e-9 * (1 + r.swa_bias2));
}

TEST(BVDecomposition, ConstantValuesHaveNoVariance) {
  SeededRng rng(15);
  const Matrix v = constant_rows(16, {0.4, -1.0, 2.0});
  const auto inp = AttentionInputs::make(oracle::random(16, 3, rng), oracle::random(16, 3, rng), v);
  const GateParams g{oracle::random(3, 3, rng), oracle::random(3, 3, rng)};
  const auto r = fusion_bv_decompose(inp, g, 4, 100, rng);
  EXPECT_LE(r.variance, 1e-28);
  EXPECT_NEAR(r.mse, r.bias2, 1e-12);
}

TEST(BVDecomposition, GateSumOneMatchesGateForm) {
  // Opposite saturated gates make g_sa + g_swa = 1 entrywise (g_sa ~ 0).
  SeededRng rng(16);
  const Matrix v = oracle::random(16, 2, rng, 0.1, 1.0);
  const auto inp = AttentionInputs::make(v, v, v);
  const GateParams g{Matrix::filled(2, 2, 60.0), Matrix::filled(2, 2, -60.0)};
  const auto r = fusion_bv_decompose(inp, g, 4, 50, rng);
  EXPECT_NEAR(r.bias2, r.bias2_gate_form, 1e-12);
}

TEST(BVDecomposition, RejectsBadArguments) {
  SeededRng rng(17);
  const auto inp = AttentionInputs::make(Matrix(4, 2), Matrix(4, 2), Matrix(4, 2));
  EXPECT_THROW(fusion_bv_decompose(inp, GateParams::zeros(2), 5, 10, rng), ConfigError);
  EXPECT_THROW(fusion_bv_decompose(inp, GateParams::zeros(2), 2, 1, rng), ConfigError);
}
