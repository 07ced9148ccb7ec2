#include "ebrl/sum_tree.hpp"

#include <cmath>
#include <stdexcept>

#include "ebrl/errors.hpp"

namespace ebrl {

namespace {

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

SumTree::SumTree(std::size_t min_capacity)
    : capacity_(next_pow2(min_capacity == 0 ? 1 : min_capacity)),
      nodes_(2 * capacity_ - 1, 0.0) {}

double SumTree::leaf(std::size_t leaf_index) const {
  if (leaf_index >= capacity_) throw std::out_of_range("sum tree leaf index");
  return nodes_[capacity_ - 1 + leaf_index];
}

void SumTree::update(std::size_t leaf_index, double priority) {
  if (leaf_index >= capacity_) throw std::out_of_range("sum tree leaf index");
  if (!(priority >= 0.0) || !std::isfinite(priority))
    throw InvalidPriorityError("priority must be finite and nonnegative");

  std::size_t node = capacity_ - 1 + leaf_index;
  const double delta = priority - nodes_[node];
  nodes_[node] = priority;
  while (node != 0) {
    node = (node - 1) / 2;
    nodes_[node] += delta;
  }

  if (++updates_since_rebuild_ >= kRebuildInterval) rebuild();
}

std::size_t SumTree::sample(double prefix) const {
  if (!(prefix >= 0.0) || prefix >= total())
    throw std::out_of_range("prefix outside [0, total)");

  std::size_t node = 0;
  while (node < capacity_ - 1) {
    const std::size_t left = 2 * node + 1;
    if (prefix < nodes_[left]) {
      node = left;
    } else {
      prefix -= nodes_[left];
      node = left + 1;
    }
  }
  return node - (capacity_ - 1);
}

void SumTree::rebuild() {
  if (capacity_ > 1) {
    for (std::size_t node = capacity_ - 1; node-- > 0;) {
      nodes_[node] = nodes_[2 * node + 1] + nodes_[2 * node + 2];
    }
  }
  updates_since_rebuild_ = 0;
}

}  // namespace ebrl
