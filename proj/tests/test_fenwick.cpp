#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "sirenv/fenwick.hpp"

using sirenv::FenwickTree;

TEST(Fenwick, TotalsAndSearch) {
  FenwickTree t(5);
  for (std::size_t i = 0; i < 5; ++i) t.assign(i, static_cast<double>(i));
  t.rebuild();
  EXPECT_DOUBLE_EQ(t.total(), 10.0);
  EXPECT_EQ(t.find(0.0), 1u);
  EXPECT_EQ(t.find(0.999), 1u);
  EXPECT_EQ(t.find(1.0), 2u);
  EXPECT_EQ(t.find(9.999), 4u);
}

TEST(Fenwick, SkipsZeroLeaves) {
  FenwickTree t(8);
  t.assign(3, 2.0);
  t.rebuild();
  for (double x : {0.0, 1.0, 1.999999}) EXPECT_EQ(t.find(x), 3u);
  // Slightly past the total from rounding still lands on the live leaf.
  EXPECT_EQ(t.find(2.0), 3u);
}

TEST(Fenwick, PointUpdatesMatchRebuild) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {1u, 2u, 7u, 64u, 1000u}) {
    FenwickTree a(n), b(n);
    for (int k = 0; k < 3000; ++k) {
      const std::size_t i = gen() % n;
      const double w = (k % 5 == 0) ? 0.0 : u(gen);
      a.set(i, w);
      b.assign(i, w);
    }
    b.rebuild();
    const auto leaves = a.leaves();
    const double sum = std::accumulate(leaves.begin(), leaves.end(), 0.0);
    EXPECT_NEAR(a.total(), sum, 1e-9);
    EXPECT_NEAR(b.total(), sum, 1e-12);
    for (int k = 0; k < 200 && sum > 0; ++k) {
      const double target = u(gen) * sum;
      const std::size_t idx = b.find(target);
      EXPECT_GT(b.leaf(idx), 0.0);
      double prefix = 0;
      for (std::size_t j = 0; j <= idx; ++j) prefix += b.leaf(j);
      EXPECT_GE(prefix, target - 1e-9);
      EXPECT_LE(prefix - b.leaf(idx), target + 1e-9);
    }
  }
}
