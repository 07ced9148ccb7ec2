#include "ebrl/sum_tree.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "ebrl/errors.hpp"
#include "support/stats.hpp"

namespace ebrl {
namespace {

// Linear-scan oracle: first leaf whose cumulative sum exceeds the prefix.
std::size_t linear_scan(const std::vector<double>& leaves, double prefix) {
  double cum = 0.0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    cum += leaves[i];
    if (prefix < cum) return i;
  }
  return leaves.size() - 1;
}

TEST(SumTree, SingleLeafRoot) {
  SumTree tree(4);
  tree.update(0, 1.0);
  EXPECT_DOUBLE_EQ(tree.total(), 1.0);
}

TEST(SumTree, RootIsLeafSum) {
  SumTree tree(4);
  const double priorities[] = {1, 2, 3, 4};
  for (std::size_t i = 0; i < 4; ++i) tree.update(i, priorities[i]);
  EXPECT_DOUBLE_EQ(tree.total(), 10.0);

  tree.update(2, 0.0);
  EXPECT_DOUBLE_EQ(tree.total(), 7.0);
}

TEST(SumTree, CapacityRoundsUpToPowerOfTwo) {
  EXPECT_EQ(SumTree(5).capacity(), 8u);
  EXPECT_EQ(SumTree(1).capacity(), 1u);
  EXPECT_EQ(SumTree(1024).capacity(), 1024u);
}

TEST(SumTree, UpdateValidation) {
  SumTree tree(4);
  EXPECT_THROW(tree.update(4, 1.0), std::out_of_range);
  EXPECT_THROW(tree.update(0, -1.0), InvalidPriorityError);
  EXPECT_THROW(tree.update(0, NAN), InvalidPriorityError);
}

TEST(SumTree, SampleDescendsPrefixSums) {
  SumTree tree(4);
  const double priorities[] = {1, 2, 3, 4};
  for (std::size_t i = 0; i < 4; ++i) tree.update(i, priorities[i]);

  EXPECT_EQ(tree.sample(3.5), 2u);  // cumulative [1, 3, 6, 10]
  EXPECT_EQ(tree.sample(0.0), 0u);
  EXPECT_EQ(tree.sample(0.999999), 0u);
  EXPECT_EQ(tree.sample(1.0), 1u);
  EXPECT_EQ(tree.sample(9.999), 3u);
  EXPECT_THROW(tree.sample(10.0), std::out_of_range);
  EXPECT_THROW(tree.sample(-0.1), std::out_of_range);
}

TEST(SumTree, SamplingFrequenciesMatchPriorities) {
  SumTree tree(4);
  const double priorities[] = {1, 2, 3, 4};
  for (std::size_t i = 0; i < 4; ++i) tree.update(i, priorities[i]);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, tree.total());
  std::vector<std::size_t> counts(4, 0);
  constexpr std::size_t kDraws = 100000;
  for (std::size_t i = 0; i < kDraws; ++i) ++counts[tree.sample(u(rng))];

  for (std::size_t i = 0; i < 4; ++i)
    EXPECT_TRUE(test::within_three_sigma(counts[i], kDraws,
                                         priorities[i] / 10.0))
        << "leaf " << i << " count " << counts[i];
}

TEST(SumTree, AgreesWithLinearScanOnDyadicPriorities) {
  // Dyadic priorities make every partial sum exact, so the tree and the
  // left-to-right scan must agree on every query, not just almost surely.
  std::mt19937_64 rng(5);
  for (std::size_t size : {2u, 3u, 17u, 64u, 1000u, 1024u}) {
    SumTree tree(size);
    std::vector<double> leaves(tree.capacity(), 0.0);
    std::uniform_int_distribution<int> numerator(0, 1 << 20);
    for (std::size_t i = 0; i < size; ++i) {
      const double p = static_cast<double>(numerator(rng)) / 1024.0;
      leaves[i] = p;
      tree.update(i, p);
    }
    std::uniform_real_distribution<double> u(0.0, tree.total());
    for (int q = 0; q < 20000; ++q) {
      const double prefix = u(rng);
      ASSERT_EQ(tree.sample(prefix), linear_scan(leaves, prefix))
          << "size " << size << " prefix " << prefix;
    }
  }
}

TEST(SumTree, AgreesWithLinearScanAfterRandomUpdates) {
  std::mt19937_64 rng(9);
  SumTree tree(256);
  std::vector<double> leaves(256, 0.0);
  std::uniform_int_distribution<std::size_t> which(0, 255);
  std::uniform_real_distribution<double> pr(0.0, 2.0);
  for (int round = 0; round < 5000; ++round) {
    const std::size_t i = which(rng);
    const double p = pr(rng);
    leaves[i] = p;
    tree.update(i, p);
  }
  std::uniform_real_distribution<double> u(0.0, tree.total());
  for (int q = 0; q < 20000; ++q) {
    const double prefix = u(rng);
    ASSERT_EQ(tree.sample(prefix), linear_scan(leaves, prefix));
  }
}

TEST(SumTree, DriftStaysBoundedAndRebuildRestoresInvariant) {
  SumTree tree(128);
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<std::size_t> which(0, 127);
  std::uniform_real_distribution<double> pr(0.0, 1.0);
  std::vector<double> leaves(128, 0.0);
  for (int i = 0; i < 100000; ++i) {
    const std::size_t idx = which(rng);
    leaves[idx] = pr(rng);
    tree.update(idx, leaves[idx]);
  }
  double linear = 0.0;
  for (double v : leaves) linear += v;
  EXPECT_LT(std::abs(tree.total() - linear) / linear, 1e-9);

  tree.rebuild();
  // After a rebuild every internal node is exactly its children's sum.
  for (std::size_t i = 0; i < 128; ++i)
    ASSERT_DOUBLE_EQ(tree.leaf(i), leaves[i]);
  EXPECT_LT(std::abs(tree.total() - linear) / linear, 1e-12);
}

}  // namespace
}  // namespace ebrl
