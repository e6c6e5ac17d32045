#include <gtest/gtest.h>

#include <set>

#include "sattn/error.hpp"
#include "sattn/verify.hpp"

using namespace sattn;

TEST(Verify, AllSuitesPassAtDeskScale) {
  const auto results = run_verify({});
  std::set<std::string> suites;
  for (const auto& r : results) {
    EXPECT_TRUE(r.passed) << r.suite << "/" << r.name;
    EXPECT_FALSE(r.values.empty());
    suites.insert(r.suite);
  }
  EXPECT_EQ(suites.size(), verify_suite_names().size());
}

TEST(Verify, DeterministicInSeed) {
  VerifyConfig cfg{123, {"connprob", "variance"}, false};
  const auto a = run_verify(cfg), b = run_verify(cfg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].values.size(), b[i].values.size());
    for (std::size_t k = 0; k < a[i].values.size(); ++k) EXPECT_EQ(a[i].values[k].value, b[i].values[k].value);
  }
}

TEST(Verify, SuiteSeedIndependentOfSelection) {
  const auto alone = run_verify({5, {"bias"}, false});
  const auto all = run_verify({5, {}, false});
  for (const auto& r : all)
    if (r.suite == "bias") EXPECT_EQ(r.values.front().value, alone.front().values.front().value);
}

TEST(Verify, PerturbedBackwardFailsGradcheck) {
  const auto r = run_verify({0, {"gradcheck"}, true});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_FALSE(r[0].passed);
}

TEST(Verify, UnknownSuiteThrows) { EXPECT_THROW(run_verify({0, {"nope"}, false}), ConfigError); }
