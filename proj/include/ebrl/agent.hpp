#pragma once

// DDPG actor-critic over goal-conditioned inputs (observation and goal are
// concatenated at the network input). Targets come from Polyak-averaged
// copies of both networks; updates are plain momentum-free gradient steps.

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ebrl/mlp.hpp"
#include "ebrl/policy.hpp"
#include "ebrl/replay.hpp"

namespace ebrl {

struct AgentConfig {
  double gamma = 0.95;  // [0, 1)
  double tau = 0.05;    // (0, 1]
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double noise_scale = 0.2;         // exploration stddev, fraction of bound
  double random_action_prob = 0.2;  // fully random actions while exploring
  std::vector<int> hidden = {64, 64};
  double action_bound = 1.0;  // actions clipped to [-bound, bound]

  void validate() const;
};

class DdpgAgent {
 public:
  DdpgAgent(int obs_dim, int goal_dim, int action_dim,
            const AgentConfig& config, std::uint64_t seed);

  int obs_dim() const { return obs_dim_; }
  int goal_dim() const { return goal_dim_; }
  int action_dim() const { return action_dim_; }
  const AgentConfig& config() const { return config_; }

  // Deterministic tanh-bounded action plus Gaussian noise of the given
  // absolute scale, clipped to the action bounds. noise_scale = 0 is the
  // evaluation policy.
  std::vector<double> act(std::span<const double> obs,
                          std::span<const double> goal, double noise_scale,
                          std::mt19937_64& rng) const;

  // y = r + gamma * Q_target(s', pi_target(s'), g), clipped to
  // [-1/(1-gamma), 0] (returns under {-1, 0} rewards cannot leave it).
  double td_target(double reward, std::span<const double> next_obs,
                   std::span<const double> goal) const;
  Eigen::VectorXd td_targets(const std::vector<Transition>& batch) const;

  // One gradient step on mean squared (Q - y)^2; returns the pre-step loss.
  // Per-sample TD errors Q - y are kept for prioritization and metrics.
  double critic_update(const std::vector<Transition>& batch,
                       const Eigen::VectorXd& targets);

  // One gradient step on -mean Q(s, pi(s), g); critic parameters frozen.
  double actor_update(const std::vector<Transition>& batch);

  // Polyak step for both target networks with the configured tau.
  void soft_update_targets();

  const Eigen::VectorXd& last_td_errors() const { return last_td_errors_; }

  // TD errors of a batch under the current networks, no parameter updates.
  Eigen::VectorXd td_errors(const std::vector<Transition>& batch) const;

  std::unique_ptr<Policy> deterministic_policy() const;

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  const Mlp& actor_target() const { return actor_target_; }
  const Mlp& critic_target() const { return critic_target_; }
  Mlp& mutable_critic() { return critic_; }
  Mlp& mutable_actor() { return actor_; }

  // Versioned binary checkpoint; load round-trips bit-exactly.
  void save(const std::string& path) const;
  static DdpgAgent load(const std::string& path);

 private:
  DdpgAgent(int obs_dim, int goal_dim, int action_dim,
            const AgentConfig& config, Mlp actor, Mlp critic, Mlp actor_target,
            Mlp critic_target);

  Eigen::MatrixXd critic_input(const std::vector<Transition>& batch) const;

  int obs_dim_;
  int goal_dim_;
  int action_dim_;
  AgentConfig config_;
  Mlp actor_;
  Mlp critic_;
  Mlp actor_target_;
  Mlp critic_target_;
  Eigen::VectorXd last_td_errors_;
};

}  // namespace ebrl
