#include <gtest/gtest.h>

#include "hmfmd/errors.hpp"
#include "hmfmd/verify.hpp"

namespace hmfmd {
namespace {

TEST(GradcheckSuite, AllComponentsPass) {
  const auto entries = run_gradcheck_suite(GradcheckScope::all);
  ASSERT_FALSE(entries.empty());
  for (const auto& e : entries) {
    EXPECT_TRUE(e.passed) << e.component << " " << e.max_rel_error;
    EXPECT_LT(e.max_rel_error, kGradcheckTolerance) << e.component;
    EXPECT_GT(e.n_params, 0u) << e.component;
  }
}

TEST(GradcheckSuite, CorruptedGradientsFail) {
  for (const auto& e : run_gradcheck_suite(GradcheckScope::models, 0.01)) {
    EXPECT_FALSE(e.passed) << e.component;
  }
}

TEST(GradcheckSuite, ScopeParsing) {
  EXPECT_EQ(parse_gradcheck_scope("layers"), GradcheckScope::layers);
  EXPECT_EQ(parse_gradcheck_scope("models"), GradcheckScope::models);
  EXPECT_THROW(parse_gradcheck_scope("everything"), InvalidInput);
}

}  // namespace
}  // namespace hmfmd
