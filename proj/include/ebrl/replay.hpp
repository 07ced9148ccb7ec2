#pragma once

// Episode replay storage with hindsight goal relabeling and sampling either
// uniform or proportional to cached trajectory energy. Energy is computed
// once, when an episode is inserted, never again.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ebrl/energy.hpp"
#include "ebrl/errors.hpp"
#include "ebrl/sum_tree.hpp"

namespace ebrl {

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = -1.0;  // sparse regime: -1 or 0
  std::vector<double> next_state;
  std::vector<double> goal;
  bool done = false;
};

struct Episode {
  std::vector<Transition> transitions;      // length T
  std::vector<ObjectState> achieved_goals;  // length T + 1
  double trajectory_energy = 0.0;           // cached by ReplayBuffer::insert
  std::uint64_t insertion_index = 0;

  std::size_t length() const { return transitions.size(); }
  double undiscounted_return() const;
  bool success() const;  // final transition reached its goal
};

// How the owning environment turns achieved object states into goal vectors
// and scores them. Supplied by the env so the buffer stays env-agnostic.
struct GoalSpace {
  std::function<std::vector<double>(const ObjectState&)> project;
  std::function<double(std::span<const double> achieved,
                       std::span<const double> desired)>
      reward;
};

enum class SampleStrategy { kUniform, kEnergy };

class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, SampleStrategy strategy,
               const EnergyParams& energy_params);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return episodes_.size(); }
  bool empty() const { return episodes_.empty(); }
  SampleStrategy strategy() const { return strategy_; }
  const EnergyParams& energy_params() const { return energy_params_; }

  // Stores the episode with its trajectory energy cached; evicts the oldest
  // episode when at capacity (FIFO ring). Throws InvalidEpisodeError when
  // achieved_goals.size() != transitions.size() + 1 or the episode is too
  // short. Returns the episode's insertion index.
  std::uint64_t insert(Episode episode);

  // i in [0, size()), oldest first.
  const Episode& episode(std::size_t i) const;

  // Left-to-right sum of stored episode energies, recomputed on every
  // mutation so it matches a fresh recomputation exactly.
  double energy_sum() const { return energy_sum_; }
  double max_energy() const;

  // Energy strategy draws episode i with probability E_i / sum(E); falls
  // back to uniform when the total energy is zero. Uniform strategy is
  // always 1/N. Throws EmptyBufferError on an empty buffer.
  std::size_t sample_index(std::mt19937_64& rng) const;
  const Episode& sample_episode(std::mt19937_64& rng) const;

  // The per-episode sampling distribution currently in effect.
  std::vector<double> sampling_probabilities() const;

  // Test/ablation hook: when set, every episode is prioritized as if its
  // energy were this constant (stored energies are untouched).
  void set_energy_override(std::optional<double> energy);

 private:
  double priority_of(const Episode& ep) const;
  void refresh_sums();

  std::size_t capacity_;
  SampleStrategy strategy_;
  EnergyParams energy_params_;
  std::optional<double> energy_override_;
  std::vector<Episode> episodes_;  // ring storage
  std::size_t head_ = 0;           // slot of the oldest episode once full
  std::uint64_t next_insertion_ = 0;
  double energy_sum_ = 0.0;
  double priority_sum_ = 0.0;
  SumTree tree_;  // leaf = storage slot, keyed by priority
};

struct RelabeledGoal {
  std::size_t future_index = 0;  // index into achieved_goals
  std::vector<double> goal;
  double reward = -1.0;
};

// "Future" hindsight relabeling: picks t' uniformly from [t+1, T-1], returns
// the achieved goal there as a virtual goal plus the recomputed reward of the
// transition at t against it. Throws NoFutureGoalError when t >= T - 1.
RelabeledGoal relabel_future(const Episode& episode, std::size_t t,
                             const GoalSpace& goal_space, std::mt19937_64& rng);

// Draws batch_size transitions: sample an episode (per buffer strategy), a
// timestep uniformly, then relabel the goal with probability her_ratio when
// a future goal exists.
std::vector<Transition> make_batch(const ReplayBuffer& buffer,
                                   std::size_t batch_size, double her_ratio,
                                   const GoalSpace& goal_space,
                                   std::mt19937_64& rng);

// One JSON record per stored episode:
// {episode_index, trajectory_energy, success, return}.
void write_episode_log(const ReplayBuffer& buffer, const std::string& path);

}  // namespace ebrl
