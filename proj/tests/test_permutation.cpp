#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "oracles.hpp"
#include "sattn/error.hpp"
#include "sattn/permutation.hpp"

using namespace sattn;

TEST(Permutation, FromForwardValidatesBijection) {
  EXPECT_THROW(Permutation::from_forward({0, 0, 1}), ConfigError);
  EXPECT_THROW(Permutation::from_forward({0, 3, 1}), ConfigError);
  const auto p = Permutation::from_forward({2, 0, 1});
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(p.inverse()[p.forward()[i]], i);
}

TEST(SamplePermutation, ZeroThrowsAndOneIsIdentity) {
  SeededRng rng(1);
  EXPECT_THROW(sample_permutation(0, rng), ConfigError);
  EXPECT_TRUE(sample_permutation(1, rng).is_identity());
}

TEST(SamplePermutation, ChiSquareOverS3) {
  SeededRng rng(2024);
  std::map<std::vector<std::size_t>, int> counts;
  for (int t = 0; t < 6000; ++t) ++counts[sample_permutation(3, rng).forward()];
  ASSERT_EQ(counts.size(), 6u);
  double chi2 = 0;
  for (const auto& [perm, c] : counts) {
    EXPECT_NEAR(c, 1000, 3 * std::sqrt(1000.0 * 5.0 / 6.0)) << "permutation count";
    chi2 += (c - 1000.0) * (c - 1000.0) / 1000.0;
  }
  // chi^2 with 5 degrees of freedom: P(X > 20.515) = 0.001.
  EXPECT_LT(chi2, 20.515);
}

TEST(SamplePermutation, FirstImageUniformAtN8) {
  SeededRng rng(77);
  constexpr int trials = 100000;
  std::vector<int> counts(8, 0);
  for (int t = 0; t < trials; ++t) ++counts[sample_permutation(8, rng)(0)];
  const double p = 1.0 / 8.0;
  const double se = std::sqrt(p * (1 - p) / trials);
  for (int c : counts) EXPECT_NEAR(static_cast<double>(c) / trials, p, 3 * se);
}

TEST(Invert, Involution) {
  SeededRng rng(3);
  EXPECT_TRUE(invert(Permutation::identity(5)).is_identity());
  for (int t = 0; t < 20; ++t) {
    const auto p = sample_permutation(10, rng);
    const auto q = invert(p);
    EXPECT_EQ(invert(q), p);
    EXPECT_EQ(q.forward(), p.inverse());
    for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(q(p(i)), i);
  }
}

TEST(PermuteRows, CyclicShiftConvention) {
  const Matrix x{{1, 1}, {2, 2}, {3, 3}};  // a, b, c
  const auto p = Permutation::from_forward({1, 2, 0});
  const Matrix want{{3, 3}, {1, 1}, {2, 2}};  // c, a, b
  EXPECT_EQ(permute_rows(x, p), want);
}

TEST(PermuteRows, IdentityRoundTripAndMultiset) {
  SeededRng rng(4);
  const Matrix x = oracle::random(17, 3, rng);
  EXPECT_EQ(permute_rows(x, Permutation::identity(17)), x);
  for (int t = 0; t < 20; ++t) {
    const auto p = sample_permutation(17, rng);
    const Matrix y = permute_rows(x, p);
    EXPECT_EQ(permute_rows(y, invert(p)), x);
    auto rows = [](const Matrix& m) {
      std::vector<std::vector<double>> r;
      for (std::size_t i = 0; i < m.rows(); ++i) r.emplace_back(m.row(i).begin(), m.row(i).end());
      std::sort(r.begin(), r.end());
      return r;
    };
    EXPECT_EQ(rows(y), rows(x));
    for (std::size_t i = 0; i < 17; ++i)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(y(p(i), c), x(i, c));
  }
}

TEST(PermuteRows, SizeMismatchThrows) {
  EXPECT_THROW(permute_rows(Matrix(3, 2), Permutation::identity(4)), DimensionError);
}
