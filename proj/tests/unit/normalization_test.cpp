#include <gtest/gtest.h>

#include "support/normalization_cases.hpp"

TEST(Normalization, RandomPipelinesKeepColumnsStochastic) {
    const auto stats = vup::testing::run_normalization_cases(2024, 60);
    EXPECT_EQ(stats.cases, 60u);
    EXPECT_EQ(stats.failures, 0u) << stats.first_failure;
    EXPECT_LE(stats.worst_sum_error, 1e-9);
    EXPECT_GE(stats.most_negative, 0.0);
}
