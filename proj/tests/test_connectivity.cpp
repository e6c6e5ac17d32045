#include <gtest/gtest.h>

#include <cmath>

#include "sattn/connectivity.hpp"
#include "sattn/error.hpp"

using namespace sattn;

namespace {
constexpr auto kCirc = WindowConvention::SymmetricCircular;
}

TEST(ConnectionProbability, ClosedForms) {
  EXPECT_DOUBLE_EQ(connection_probability(256, 16), 15.0 / 255.0);
  EXPECT_DOUBLE_EQ(connection_probability(6, 3), 0.4);
  EXPECT_DOUBLE_EQ(causal_connection_probability(256, 16), 15.0 / 510.0);
}

TEST(ConnectionProbability, ExhaustiveS6IsExactlyTwoFifths) {
  const auto e = connection_probability_exhaustive(6, {3, kCirc}, 0, 5);
  EXPECT_EQ(e.total, 720u);
  EXPECT_EQ(e.hits * 5, e.total * 2);
  EXPECT_DOUBLE_EQ(e.value(), 0.4);
}

TEST(ConnectionProbability, ExhaustiveAllPairsAndWindows) {
  for (std::size_t w = 1; w <= 5; ++w)
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) {
        if (i == j) continue;
        const auto e = connection_probability_exhaustive(5, {w, kCirc}, i, j);
        EXPECT_EQ(e.total, 120u);
        EXPECT_EQ(e.hits * 4, e.total * (w - 1));
      }
}

TEST(ConnectionProbability, FullWindowIsCertain) {
  SeededRng rng(1);
  const auto e = connection_probability_mc(40, 40, 500, false, rng);
  EXPECT_EQ(e.estimate, 1.0);
  EXPECT_EQ(e.std_error, 0.0);
}

TEST(ConnectionProbability, MonteCarloWithinThreeStderr) {
  SeededRng rng(2);
  const auto e = connection_probability_mc(256, 16, 20000, false, rng);
  EXPECT_DOUBLE_EQ(e.analytic, 15.0 / 255.0);
  EXPECT_GT(e.std_error, 0.0);
  EXPECT_LE(std::abs(e.estimate - e.analytic), 3 * e.std_error);
  const auto other = connection_probability_mc(64, 8, 20000, false, rng, 10, 11);
  EXPECT_LE(std::abs(other.estimate - 7.0 / 63.0), 3 * other.std_error);
}

TEST(ConnectionProbability, CausalDensity) {
  SeededRng rng(3);
  const auto e = connection_probability_mc(256, 16, 2000, true, rng);
  EXPECT_TRUE(e.causal);
  EXPECT_NEAR(e.estimate, e.analytic, 0.15 * e.analytic);
}

TEST(ConnectionProbability, SeededRepeatable) {
  SeededRng a(4), b(4);
  EXPECT_EQ(connection_probability_mc(32, 4, 3000, false, a).estimate,
            connection_probability_mc(32, 4, 3000, false, b).estimate);
}

TEST(ConnectionProbability, RejectsBadArguments) {
  SeededRng rng(5);
  EXPECT_THROW(connection_probability_exhaustive(11, {3, kCirc}, 0, 1), ConfigError);
  EXPECT_THROW(connection_probability_mc(8, 9, 10, false, rng), ConfigError);
  EXPECT_THROW(connection_probability_mc(8, 2, 0, false, rng), ConfigError);
}
