#pragma once

// Complete binary tree over nonnegative leaf priorities where each internal
// node holds the sum of its children. Supports O(log n) point updates and
// O(log n) prefix-sum descent for proportional sampling.

#include <cstddef>
#include <vector>

namespace ebrl {

class SumTree {
 public:
  // Leaf count is rounded up to the next power of two; extra leaves hold 0.
  explicit SumTree(std::size_t min_capacity);

  std::size_t capacity() const { return capacity_; }
  double total() const { return nodes_[0]; }
  double leaf(std::size_t leaf_index) const;

  // Sets a leaf and adjusts all ancestor sums. Throws std::out_of_range on a
  // bad index, InvalidPriorityError on negative or non-finite priority.
  // Internal sums are rebuilt from the leaves every kRebuildInterval updates
  // to bound float accumulation drift.
  void update(std::size_t leaf_index, double priority);

  // Returns the unique leaf i with sum(leaves [0, i)) <= prefix < sum([0, i]).
  // Requires 0 <= prefix < total(); throws std::out_of_range otherwise.
  std::size_t sample(double prefix) const;

  // Recomputes every internal node from the leaves.
  void rebuild();

  static constexpr std::size_t kRebuildInterval = 1u << 16;

 private:
  std::size_t capacity_;
  std::vector<double> nodes_;  // 2 * capacity - 1; leaves start at capacity - 1
  std::size_t updates_since_rebuild_ = 0;
};

}  // namespace ebrl
