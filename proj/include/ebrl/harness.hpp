#pragma once

// End-to-end training runs: roll out the behavior policy, store episodes
// with their trajectory energy, replay with the configured strategy, and
// collect per-epoch metrics (test success rate, sample counts, energy /
// TD-error correlation, wall clock) into plot-ready CSV files.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebrl/agent.hpp"
#include "ebrl/envs.hpp"
#include "ebrl/policy.hpp"

namespace ebrl {

enum class Strategy { kUniformHer, kPerHer, kEbpHer };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

struct RunConfig {
  std::string env = "planar-push";
  Strategy strategy = Strategy::kEbpHer;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  int epochs = 30;
  int episodes_per_epoch = 100;
  int optim_steps = 40;  // optimizer steps after each episode
  int batch_size = 64;
  int eval_episodes = 20;
  // Episodes of critic-only updates before actor training starts. Training
  // the actor against an uninformed critic saturates the tanh head on noise
  // and the policy never recovers; a short value warm-up avoids that.
  int actor_warmup_episodes = 100;

  std::size_t buffer_capacity = 10000;  // episodes
  double her_ratio = 0.8;

  std::size_t per_capacity = 1u << 20;  // transitions
  int per_relabel_copies = 4;           // hindsight copies stored per original
  double per_alpha = 0.6;
  double per_epsilon = 0.01;

  double gamma = 0.95;
  double tau = 0.05;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double noise_scale = 0.2;
  double random_action_prob = 0.2;
  std::vector<int> hidden{64, 64};

  double mass = 1.0;
  double gravity = 9.81;
  double inertia = 1.0;
  double transition_cap = 0.0;  // <= 0: use the environment default

  int pearson_window = 300;  // recent episodes scanned per epoch

  void validate() const;
  AgentConfig agent_config() const;
  EnergyParams energy_params(const EnvSpec& spec) const;
  std::uint64_t samples_per_epoch(const EnvSpec& spec) const;
};

// Flat `key = value` config file covering every RunConfig field. Unknown
// keys are rejected (ConfigError). '#' starts a comment.
RunConfig parse_config_file(const std::string& path);
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);
void write_config_json(const RunConfig& config, const std::string& path);

struct EpochRecord {
  int epoch = 0;
  double success_rate = 0.0;
  std::uint64_t cumulative_samples = 0;  // training transitions so far
  double mean_buffer_energy = 0.0;
  double max_buffer_energy = 0.0;
  std::optional<double> pearson_r;  // missing when variance is zero
  double wall_clock_seconds = 0.0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpochRecord> records;
  std::optional<double> mid_training_pearson;  // full-buffer, at epochs/2
  double best_success = 0.0;
  int best_epoch = -1;
};

// Trains one seed. When out_dir is nonempty the best-evaluation checkpoint
// is saved as <out_dir>/seed_<seed>_best.ckpt. Throws TrainingDivergedError
// on non-finite losses.
SeedResult train_seed(const RunConfig& config, std::uint64_t seed,
                      const std::string& out_dir = "");

// All configured seeds, in order.
std::vector<SeedResult> train(const RunConfig& config,
                              const std::string& out_dir = "");

// Deterministic-policy evaluation: fraction of episodes whose final
// transition earned reward 0.
double evaluate(Policy& policy, Env& env, int episodes, std::uint64_t seed);

// Pearson product-moment correlation. Throws UndefinedCorrelationError when
// fewer than two points or either side has zero variance.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

// Cumulative samples at the first epoch whose success rate reaches the
// threshold; nullopt when never reached.
std::optional<std::uint64_t> samples_to_threshold(
    const std::vector<EpochRecord>& records, double threshold);

// baseline-samples / ebp-samples, the Fig.3-style sample-efficiency ratio.
double efficiency_ratio(double baseline_samples, double ebp_samples);
std::string format_ratio(double ratio);  // two decimals

// Writes seed_<s>.csv per seed, aggregate.csv (mean/std across seeds) and
// samples_to_success.csv into out_dir, plus run.json metadata.
void write_reports(const RunConfig& config,
                   const std::vector<SeedResult>& results,
                   const std::string& out_dir);

}  // namespace ebrl
