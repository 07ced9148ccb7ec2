#include "ebrl/replay.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace ebrl {

double Episode::undiscounted_return() const {
  double sum = 0.0;
  for (const Transition& t : transitions) sum += t.reward;
  return sum;
}

bool Episode::success() const {
  return !transitions.empty() && transitions.back().reward == 0.0;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, SampleStrategy strategy,
                           const EnergyParams& energy_params)
    : capacity_(capacity),
      strategy_(strategy),
      energy_params_(energy_params),
      tree_(capacity == 0 ? 1 : capacity) {
  if (capacity_ == 0) throw InvalidEpisodeError("buffer capacity must be > 0");
  energy_params_.validate();
}

std::uint64_t ReplayBuffer::insert(Episode episode) {
  if (episode.achieved_goals.size() != episode.transitions.size() + 1)
    throw InvalidEpisodeError(
        "achieved goal count must be transition count + 1");
  if (episode.achieved_goals.size() < 2)
    throw InvalidEpisodeError("episode needs at least one transition");

  episode.trajectory_energy =
      trajectory_energy(episode.achieved_goals, energy_params_);
  episode.insertion_index = next_insertion_++;

  std::size_t slot;
  if (episodes_.size() < capacity_) {
    slot = episodes_.size();
    episodes_.push_back(std::move(episode));
  } else {
    slot = head_;  // overwrite the oldest
    episodes_[slot] = std::move(episode);
    head_ = (head_ + 1) % capacity_;
  }
  tree_.update(slot, priority_of(episodes_[slot]));
  refresh_sums();
  return episodes_[slot].insertion_index;
}

const Episode& ReplayBuffer::episode(std::size_t i) const {
  if (i >= episodes_.size()) throw std::out_of_range("episode index");
  return episodes_[(head_ + i) % episodes_.size()];
}

double ReplayBuffer::max_energy() const {
  double m = 0.0;
  for (const Episode& ep : episodes_) m = std::max(m, ep.trajectory_energy);
  return m;
}

double ReplayBuffer::priority_of(const Episode& ep) const {
  return energy_override_.value_or(ep.trajectory_energy);
}

void ReplayBuffer::refresh_sums() {
  double energy = 0.0;
  double priority = 0.0;
  for (std::size_t i = 0; i < episodes_.size(); ++i) {
    energy += episode(i).trajectory_energy;
    priority += priority_of(episode(i));
  }
  energy_sum_ = energy;
  priority_sum_ = priority;
}

std::size_t ReplayBuffer::sample_index(std::mt19937_64& rng) const {
  if (episodes_.empty()) throw EmptyBufferError("sample from empty buffer");

  if (strategy_ == SampleStrategy::kEnergy && priority_sum_ > 0.0) {
    const double total = tree_.total();
    std::uniform_real_distribution<double> dist(0.0, total);
    double u = dist(rng);
    if (u >= total) u = std::nextafter(total, 0.0);
    const std::size_t slot = tree_.sample(u);
    // Map the storage slot back to oldest-first indexing.
    return (slot + episodes_.size() - head_) % episodes_.size();
  }
  std::uniform_int_distribution<std::size_t> dist(0, episodes_.size() - 1);
  return dist(rng);
}

const Episode& ReplayBuffer::sample_episode(std::mt19937_64& rng) const {
  return episode(sample_index(rng));
}

std::vector<double> ReplayBuffer::sampling_probabilities() const {
  std::vector<double> probs(episodes_.size(), 0.0);
  if (episodes_.empty()) return probs;
  if (strategy_ == SampleStrategy::kEnergy && priority_sum_ > 0.0) {
    for (std::size_t i = 0; i < episodes_.size(); ++i)
      probs[i] = priority_of(episode(i)) / priority_sum_;
  } else {
    std::fill(probs.begin(), probs.end(), 1.0 / episodes_.size());
  }
  return probs;
}

void ReplayBuffer::set_energy_override(std::optional<double> energy) {
  if (energy && !(*energy >= 0.0))
    throw InvalidPriorityError("energy override must be nonnegative");
  energy_override_ = energy;
  for (std::size_t slot = 0; slot < episodes_.size(); ++slot)
    tree_.update(slot, priority_of(episodes_[slot]));
  refresh_sums();
}

RelabeledGoal relabel_future(const Episode& episode, std::size_t t,
                             const GoalSpace& goal_space,
                             std::mt19937_64& rng) {
  const std::size_t horizon = episode.length();  // T
  if (t + 1 >= horizon)
    throw NoFutureGoalError("no future achieved goal before the final state");

  std::uniform_int_distribution<std::size_t> dist(t + 1, horizon - 1);
  RelabeledGoal out;
  out.future_index = dist(rng);
  out.goal = goal_space.project(episode.achieved_goals[out.future_index]);
  const std::vector<double> achieved_next =
      goal_space.project(episode.achieved_goals[t + 1]);
  out.reward = goal_space.reward(achieved_next, out.goal);
  return out;
}

std::vector<Transition> make_batch(const ReplayBuffer& buffer,
                                   std::size_t batch_size, double her_ratio,
                                   const GoalSpace& goal_space,
                                   std::mt19937_64& rng) {
  if (her_ratio < 0.0 || her_ratio > 1.0)
    throw InvalidEpisodeError("her_ratio must lie in [0, 1]");

  std::vector<Transition> batch;
  batch.reserve(batch_size);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (batch.size() < batch_size) {
    const Episode& ep = buffer.sample_episode(rng);
    std::uniform_int_distribution<std::size_t> tdist(0, ep.length() - 1);
    const std::size_t t = tdist(rng);

    Transition tr = ep.transitions[t];
    if (t + 1 < ep.length() && coin(rng) < her_ratio) {
      RelabeledGoal rg = relabel_future(ep, t, goal_space, rng);
      tr.goal = std::move(rg.goal);
      tr.reward = rg.reward;
    }
    batch.push_back(std::move(tr));
  }
  return batch;
}

void write_episode_log(const ReplayBuffer& buffer, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open episode log for writing: " + path);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const Episode& ep = buffer.episode(i);
    nlohmann::json rec{{"episode_index", ep.insertion_index},
                       {"trajectory_energy", ep.trajectory_energy},
                       {"success", ep.success()},
                       {"return", ep.undiscounted_return()}};
    out << rec.dump() << '\n';
  }
}

}  // namespace ebrl
