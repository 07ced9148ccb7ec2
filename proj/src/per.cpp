#include "ebrl/per.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ebrl {

void PerConfig::validate() const {
  if (!(alpha >= 0.0) || !(epsilon > 0.0))
    throw InvalidPriorityError("require alpha >= 0 and epsilon > 0");
}

double PerConfig::priority(double td_error) const {
  if (!std::isfinite(td_error))
    throw InvalidPriorityError("td error must be finite");
  return std::pow(std::abs(td_error) + epsilon, alpha);
}

PerStore::PerStore(std::size_t capacity, const PerConfig& config)
    : config_(config),
      capacity_(capacity),
      items_(capacity),
      tree_(capacity == 0 ? 1 : capacity),
      max_nodes_(2 * tree_.capacity() - 1, 0.0) {
  if (capacity_ == 0) throw std::invalid_argument("per capacity must be > 0");
  config_.validate();
}

double PerStore::max_priority() const { return max_nodes_[0]; }

std::size_t PerStore::insert(Transition transition) {
  const std::size_t slot = next_;
  items_[slot] = std::move(transition);
  const bool had_any = size_ > 0;
  if (size_ < capacity_) ++size_;
  next_ = (next_ + 1) % capacity_;

  const double p =
      (config_.max_priority_for_new && had_any) ? max_priority() : 1.0;
  set_priority(slot, p);
  return slot;
}

const Transition& PerStore::transition(std::size_t slot) const {
  if (slot >= size_) throw std::out_of_range("per transition slot");
  return items_[slot];
}

std::size_t PerStore::sample_slot(std::mt19937_64& rng) const {
  if (size_ == 0) throw EmptyBufferError("sample from empty per store");
  const double total = tree_.total();
  std::uniform_real_distribution<double> dist(0.0, total);
  double u = dist(rng);
  if (u >= total) u = std::nextafter(total, 0.0);
  return tree_.sample(u);
}

std::vector<std::size_t> PerStore::sample_slots(std::size_t n,
                                                std::mt19937_64& rng) const {
  std::vector<std::size_t> slots(n);
  for (std::size_t i = 0; i < n; ++i) slots[i] = sample_slot(rng);
  return slots;
}

void PerStore::update_priorities(std::span<const std::size_t> slots,
                                 std::span<const double> td_errors) {
  if (slots.size() != td_errors.size())
    throw ShapeError("slot/td-error count mismatch");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (slots[i] >= size_) throw std::out_of_range("per priority slot");
    set_priority(slots[i], config_.priority(td_errors[i]));
  }
}

void PerStore::set_priority(std::size_t slot, double priority) {
  tree_.update(slot, priority);
  std::size_t node = tree_.capacity() - 1 + slot;
  max_nodes_[node] = priority;
  while (node != 0) {
    node = (node - 1) / 2;
    max_nodes_[node] =
        std::max(max_nodes_[2 * node + 1], max_nodes_[2 * node + 2]);
  }
}

}  // namespace ebrl
