#include <gtest/gtest.h>

#include "oracles.hpp"
#include "raid/retrieval_metrics.hpp"

using raid::metrics::precision_at_n;

TEST(PrecisionAtN, AllRelevant) {
  const auto p = precision_at_n({true, true, true, true, true});
  ASSERT_EQ(p.size(), 5u);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(p[i].n, static_cast<int>(i + 1));
    EXPECT_DOUBLE_EQ(p[i].precision, 1.0);
  }
}

TEST(PrecisionAtN, Alternating) {
  const auto p = precision_at_n({true, false, true, false});
  ASSERT_EQ(p.size(), 4u);
  EXPECT_DOUBLE_EQ(p[0].precision, 1.0);
  EXPECT_DOUBLE_EQ(p[1].precision, 0.5);
  EXPECT_NEAR(p[2].precision, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(p[3].precision, 0.5);
}

TEST(PrecisionAtN, Empty) { EXPECT_TRUE(precision_at_n({}).empty()); }

TEST(PrecisionAtN, RandomPatternsMatchRecount) {
  raid::testing::TestRng g(91);
  for (int t = 0; t < 50; ++t) {
    std::vector<bool> rel(static_cast<std::size_t>(g.integer(1, 60)));
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = g.uniform() < 0.4;
    const auto p = precision_at_n(rel);
    ASSERT_EQ(p.size(), rel.size());
    for (std::size_t n = 1; n <= rel.size(); ++n) {
      int hits = 0;
      for (std::size_t i = 0; i < n; ++i) hits += rel[i] ? 1 : 0;
      EXPECT_DOUBLE_EQ(p[n - 1].precision, static_cast<double>(hits) / static_cast<double>(n));
    }
  }
}
