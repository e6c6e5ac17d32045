#include <gtest/gtest.h>

#include <sstream>

#include "oracles.hpp"
#include "sattn/error.hpp"
#include "sattn/masks.hpp"

using namespace sattn;

namespace {

constexpr auto kCausal = WindowConvention::CausalOneSided;
constexpr auto kCirc = WindowConvention::SymmetricCircular;

// Circular offset set from the definition: o in [-(ceil(w/2)-1), floor(w/2)].
bool circ_oracle(std::size_t n, std::size_t w, std::size_t i, std::size_t j) {
  const long lo = -(static_cast<long>((w + 1) / 2) - 1);
  const long hi = static_cast<long>(w / 2);
  for (long o = lo; o <= hi; ++o) {
    const long t = ((static_cast<long>(i) + o) % static_cast<long>(n) + static_cast<long>(n)) % static_cast<long>(n);
    if (static_cast<std::size_t>(t) == j) return true;
  }
  return false;
}

}  // namespace

TEST(WindowMask, OneSidedSelfOnlyAndFullTriangle) {
  EXPECT_EQ(build_window_mask(5, {1, kCausal}), MaskMatrix::identity(5));
  const auto m = build_window_mask(4, {4, kCausal});
  EXPECT_EQ(m.count_ones(), 10u);
  EXPECT_EQ(m, oracle::lower_triangle(4));
}

TEST(WindowMask, CircularN6W3) {
  const auto m = build_window_mask(6, {3, kCirc});
  EXPECT_EQ(m.count_ones(), 18u);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      const std::size_t d = std::min((i + 6 - j) % 6, (j + 6 - i) % 6);
      EXPECT_EQ(m(i, j), d <= 1);
    }
}

TEST(WindowMask, CircularMatchesOffsetOracleBothParities) {
  for (std::size_t n : {5u, 8u, 13u})
    for (std::size_t w = 1; w <= n; ++w) {
      const auto m = build_window_mask(n, {w, kCirc});
      for (std::size_t i = 0; i < n; ++i) {
        EXPECT_EQ(m.row_count(i), w);
        for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(m(i, j), circ_oracle(n, w, i, j)) << n << " " << w;
      }
    }
}

TEST(WindowMask, RejectsBadSizes) {
  EXPECT_THROW(build_window_mask(4, {0, kCausal}), ConfigError);
  EXPECT_THROW(build_window_mask(4, {5, kCirc}), ConfigError);
}

TEST(WindowOffsets, AscendingAndSized) {
  EXPECT_EQ(window_offsets({4, kCirc}), (std::vector<std::ptrdiff_t>{-1, 0, 1, 2}));
  EXPECT_EQ(window_offsets({3, kCirc}), (std::vector<std::ptrdiff_t>{-1, 0, 1}));
  EXPECT_EQ(window_offsets({3, kCausal}), (std::vector<std::ptrdiff_t>{-2, -1, 0}));
}

TEST(StochasticMask, IdentityPermutationIsWindowMask) {
  for (auto conv : {kCausal, kCirc})
    EXPECT_EQ(build_stochastic_mask(12, {5, conv}, Permutation::identity(12)), build_window_mask(12, {5, conv}));
}

TEST(StochasticMask, DefinitionRegularityAndSymmetry) {
  SeededRng rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto p = sample_permutation(32, rng);
    const auto base = build_window_mask(32, {8, kCirc});
    const auto m = build_stochastic_mask(32, {8, kCirc}, p);
    for (std::size_t i = 0; i < 32; ++i) {
      EXPECT_EQ(m.row_count(i), 8u);
      std::size_t col = 0;
      for (std::size_t j = 0; j < 32; ++j) {
        EXPECT_EQ(m(i, j), base(p(i), p(j)));
        col += m(j, i);
      }
      EXPECT_EQ(col, 8u);
    }
    // Odd windows give a symmetric offset set and hence a symmetric mask.
    const auto odd = build_stochastic_mask(32, {7, kCirc}, p);
    for (std::size_t i = 0; i < 32; ++i)
      for (std::size_t j = 0; j < 32; ++j) EXPECT_EQ(odd(i, j), odd(j, i));
  }
  EXPECT_THROW(build_stochastic_mask(5, {2, kCirc}, Permutation::identity(4)), DimensionError);
}

TEST(StochasticMask, ExhaustiveMarginalOverS6) {
  for (std::size_t w = 1; w <= 6; ++w) {
    std::vector<std::size_t> f{0, 1, 2, 3, 4, 5};
    std::size_t hits = 0, total = 0;
    do {
      hits += build_stochastic_mask(6, {w, kCirc}, Permutation::from_forward(f))(1, 4);
      ++total;
    } while (std::next_permutation(f.begin(), f.end()));
    EXPECT_EQ(hits * 5, total * (w - 1)) << "w=" << w;
  }
}

TEST(IntersectCausal, LowerTriangleAndForcedDiagonal) {
  EXPECT_EQ(intersect_causal(MaskMatrix(6, true)), oracle::lower_triangle(6));
  MaskMatrix m(4);
  m.set(0, 3, true);
  m.set(2, 1, true);
  const auto c = intersect_causal(m);
  EXPECT_EQ(c.row_count(0), 1u);
  EXPECT_TRUE(c(0, 0));
  EXPECT_TRUE(c(2, 1));
  EXPECT_FALSE(c(0, 3));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(c(i, i));
}

TEST(IntersectCausal, SubsetPlusDiagonal) {
  SeededRng rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto m = build_stochastic_mask(40, {6, kCirc}, sample_permutation(40, rng));
    const auto c = intersect_causal(m);
    for (std::size_t i = 0; i < 40; ++i)
      for (std::size_t j = 0; j < 40; ++j) {
        if (i == j) EXPECT_TRUE(c(i, j));
        else EXPECT_EQ(c(i, j), m(i, j) && j < i);
      }
  }
}

TEST(IntersectCausal, OffDiagonalDensityNearHalfOfMarginal) {
  SeededRng rng(10);
  constexpr std::size_t n = 256, w = 16, trials = 10000;
  double acc = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto lists = stochastic_key_lists(n, {w, kCirc}, sample_permutation(n, rng), true);
    std::size_t off = 0;
    for (const auto& row : lists) off += row.size() - 1;
    acc += static_cast<double>(off) / (n * (n - 1.0));
  }
  const double want = (w - 1.0) / (2.0 * (n - 1.0));
  EXPECT_NEAR(acc / trials, want, 0.15 * want);
}

TEST(KeyLists, MatchDenseMasks) {
  SeededRng rng(12);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + rng.uniform_below(40);
    const std::size_t w = 1 + rng.uniform_below(n);
    const auto conv = rng.uniform_below(2) ? kCirc : kCausal;
    const auto p = sample_permutation(n, rng);
    const auto m = build_stochastic_mask(n, {w, conv}, p);
    EXPECT_EQ(stochastic_key_lists(n, {w, conv}, p, false), key_lists(m));
    EXPECT_EQ(stochastic_key_lists(n, {w, conv}, p, true), key_lists(intersect_causal(m)));
  }
}

TEST(MaskDensity, Examples) {
  EXPECT_DOUBLE_EQ(mask_density(MaskMatrix::identity(4)), 0.25);
  EXPECT_DOUBLE_EQ(mask_density(MaskMatrix(4, true)), 1.0);
  EXPECT_DOUBLE_EQ(mask_density(oracle::lower_triangle(4)), 10.0 / 16.0);
  EXPECT_DOUBLE_EQ(off_diagonal_density(MaskMatrix::identity(4)), 0.0);
}

TEST(MaskUnionAndSubset, Basics) {
  const auto a = build_window_mask(8, {2, kCausal});
  const auto b = full_causal_mask(8);
  EXPECT_EQ(mask_union(a, b), b);
  EXPECT_TRUE(is_subset(a, b));
  EXPECT_FALSE(is_subset(b, a));
  EXPECT_EQ(full_causal_mask(8), oracle::lower_triangle(8));
}

TEST(MaskWriters, CsvAndPgmLayout) {
  const auto m = oracle::lower_triangle(3);
  std::ostringstream csv;
  write_mask_csv(csv, m);
  EXPECT_EQ(csv.str(), "0,1,2\n1,0,0\n1,1,0\n1,1,1\n");

  std::ostringstream pgm;
  write_mask_pgm(pgm, m);
  const std::string bytes = pgm.str();
  const std::string header = "P5\n3 3\n255\n";
  ASSERT_EQ(bytes.size(), header.size() + 9);
  EXPECT_EQ(bytes.substr(0, header.size()), header);
  const std::string body = bytes.substr(header.size());
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_EQ(static_cast<unsigned char>(body[i * 3 + j]), m(i, j) ? 255 : 0);

  std::ostringstream commented;
  write_mask_pgm(commented, m, "hello");
  EXPECT_EQ(commented.str().substr(0, 11), "P5\n# hello\n");
}

TEST(Convention, ParseRoundTrip) {
  for (auto c : {kCausal, kCirc}) EXPECT_EQ(parse_convention(to_string(c)), c);
  EXPECT_THROW(parse_convention("diagonal"), ConfigError);
}
