#pragma once

// TD-error-proportional experience replay over single transitions, backed by
// a sum tree. Baseline against the energy-prioritized episode buffer: here
// priorities are (|td_error| + epsilon)^alpha, refreshed after every
// optimization step.

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ebrl/replay.hpp"
#include "ebrl/sum_tree.hpp"

namespace ebrl {

struct PerConfig {
  double alpha = 0.6;    // priority exponent, >= 0
  double epsilon = 0.01; // priority floor, > 0
  bool max_priority_for_new = true;

  void validate() const;
  // (|td_error| + epsilon)^alpha; InvalidPriorityError on non-finite input.
  double priority(double td_error) const;
};

class PerStore {
 public:
  PerStore(std::size_t capacity, const PerConfig& config);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  const PerConfig& config() const { return config_; }

  // Ring insert; new transitions take the current max leaf priority (1 when
  // the store is empty or the flag is off) so they are replayed soon.
  // Returns the slot written.
  std::size_t insert(Transition transition);

  const Transition& transition(std::size_t slot) const;
  double priority(std::size_t slot) const { return tree_.leaf(slot); }
  double max_priority() const;

  // Proportional draw over stored transitions.
  std::size_t sample_slot(std::mt19937_64& rng) const;
  std::vector<std::size_t> sample_slots(std::size_t n,
                                        std::mt19937_64& rng) const;

  // Re-prioritizes previously sampled transitions with fresh TD errors.
  void update_priorities(std::span<const std::size_t> slots,
                         std::span<const double> td_errors);

  const SumTree& tree() const { return tree_; }

 private:
  void set_priority(std::size_t slot, double priority);

  PerConfig config_;
  std::size_t capacity_;
  std::vector<Transition> items_;
  std::size_t size_ = 0;
  std::size_t next_ = 0;  // write cursor
  SumTree tree_;
  std::vector<double> max_nodes_;  // parallel max tree for exact current max
};

}  // namespace ebrl
