#include "ebrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace ebrl {

namespace {

constexpr char kMagic[8] = {'E', 'B', 'R', 'L', 'A', 'G', 'T', '1'};

std::vector<int> make_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

}  // namespace

void AgentConfig::validate() const {
  if (!(gamma >= 0.0) || gamma >= 1.0)
    throw ConfigError("gamma must lie in [0, 1)");
  if (!(tau > 0.0) || tau > 1.0) throw ConfigError("tau must lie in (0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0))
    throw ConfigError("learning rates must be positive");
  if (noise_scale < 0.0 || random_action_prob < 0.0 ||
      random_action_prob > 1.0)
    throw ConfigError("bad exploration parameters");
  if (!(action_bound > 0.0)) throw ConfigError("action bound must be positive");
  if (hidden.empty()) throw ConfigError("need at least one hidden layer");
  for (int h : hidden)
    if (h <= 0) throw ConfigError("hidden sizes must be positive");
}

DdpgAgent::DdpgAgent(int obs_dim, int goal_dim, int action_dim,
                     const AgentConfig& config, std::uint64_t seed)
    : obs_dim_(obs_dim),
      goal_dim_(goal_dim),
      action_dim_(action_dim),
      config_(config),
      actor_(make_sizes(obs_dim + goal_dim, config.hidden, action_dim),
             Mlp::Output::kTanh, seed),
      critic_(
          make_sizes(obs_dim + goal_dim + action_dim, config.hidden, 1),
          Mlp::Output::kIdentity, seed + 0x9e3779b97f4a7c15ull),
      actor_target_(actor_),
      critic_target_(critic_) {
  if (obs_dim <= 0 || goal_dim < 0 || action_dim <= 0)
    throw ShapeError("bad network dimensions");
  config_.validate();
}

DdpgAgent::DdpgAgent(int obs_dim, int goal_dim, int action_dim,
                     const AgentConfig& config, Mlp actor, Mlp critic,
                     Mlp actor_target, Mlp critic_target)
    : obs_dim_(obs_dim),
      goal_dim_(goal_dim),
      action_dim_(action_dim),
      config_(config),
      actor_(std::move(actor)),
      critic_(std::move(critic)),
      actor_target_(std::move(actor_target)),
      critic_target_(std::move(critic_target)) {}

std::vector<double> DdpgAgent::act(std::span<const double> obs,
                                   std::span<const double> goal,
                                   double noise_scale,
                                   std::mt19937_64& rng) const {
  if (static_cast<int>(obs.size()) != obs_dim_ ||
      static_cast<int>(goal.size()) != goal_dim_)
    throw ShapeError("observation/goal dimension mismatch");

  Eigen::MatrixXd x(obs_dim_ + goal_dim_, 1);
  for (int i = 0; i < obs_dim_; ++i) x(i, 0) = obs[i];
  for (int i = 0; i < goal_dim_; ++i) x(obs_dim_ + i, 0) = goal[i];

  const Eigen::MatrixXd u = actor_.forward(x);
  const double bound = config_.action_bound;
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> action(static_cast<std::size_t>(action_dim_));
  for (int i = 0; i < action_dim_; ++i) {
    double a = bound * u(i, 0);
    if (noise_scale > 0.0) a += noise_scale * noise(rng);
    action[static_cast<std::size_t>(i)] = std::clamp(a, -bound, bound);
  }
  return action;
}

Eigen::MatrixXd DdpgAgent::critic_input(
    const std::vector<Transition>& batch) const {
  const int rows = obs_dim_ + goal_dim_ + action_dim_;
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t c = 0; c < batch.size(); ++c) {
    const Transition& t = batch[c];
    if (static_cast<int>(t.state.size()) != obs_dim_ ||
        static_cast<int>(t.goal.size()) != goal_dim_ ||
        static_cast<int>(t.action.size()) != action_dim_)
      throw ShapeError("transition dimensions do not match the agent");
    const auto col = static_cast<Eigen::Index>(c);
    for (int i = 0; i < obs_dim_; ++i) x(i, col) = t.state[i];
    for (int i = 0; i < goal_dim_; ++i) x(obs_dim_ + i, col) = t.goal[i];
    for (int i = 0; i < action_dim_; ++i)
      x(obs_dim_ + goal_dim_ + i, col) = t.action[i];
  }
  return x;
}

double DdpgAgent::td_target(double reward, std::span<const double> next_obs,
                            std::span<const double> goal) const {
  Transition t;
  t.state.assign(next_obs.begin(), next_obs.end());
  t.goal.assign(goal.begin(), goal.end());
  t.action.assign(static_cast<std::size_t>(action_dim_), 0.0);
  t.reward = reward;
  t.next_state = t.state;
  std::vector<Transition> batch{std::move(t)};
  return td_targets(batch)(0);
}

Eigen::VectorXd DdpgAgent::td_targets(
    const std::vector<Transition>& batch) const {
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd next_in(obs_dim_ + goal_dim_, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Transition& t = batch[static_cast<std::size_t>(c)];
    if (static_cast<int>(t.next_state.size()) != obs_dim_ ||
        static_cast<int>(t.goal.size()) != goal_dim_)
      throw ShapeError("transition dimensions do not match the agent");
    for (int i = 0; i < obs_dim_; ++i) next_in(i, c) = t.next_state[i];
    for (int i = 0; i < goal_dim_; ++i)
      next_in(obs_dim_ + i, c) = t.goal[i];
  }

  const Eigen::MatrixXd next_action =
      config_.action_bound * actor_target_.forward(next_in);
  Eigen::MatrixXd q_in(obs_dim_ + goal_dim_ + action_dim_, n);
  q_in.topRows(obs_dim_ + goal_dim_) = next_in;
  q_in.bottomRows(action_dim_) = next_action;
  const Eigen::MatrixXd q_next = critic_target_.forward(q_in);

  const double lo = -1.0 / (1.0 - config_.gamma);
  Eigen::VectorXd y(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const double raw =
        batch[static_cast<std::size_t>(c)].reward + config_.gamma * q_next(0, c);
    y(c) = std::clamp(raw, lo, 0.0);
  }
  return y;
}

double DdpgAgent::critic_update(const std::vector<Transition>& batch,
                                const Eigen::VectorXd& targets) {
  if (batch.empty()) throw ShapeError("empty batch");
  if (targets.size() != static_cast<Eigen::Index>(batch.size()))
    throw ShapeError("target/batch size mismatch");

  const Eigen::MatrixXd x = critic_input(batch);
  Mlp::Cache cache;
  const Eigen::MatrixXd q = critic_.forward(x, cache);

  last_td_errors_ = (q.row(0).transpose() - targets);
  const double loss =
      last_td_errors_.squaredNorm() / static_cast<double>(batch.size());
  if (!std::isfinite(loss))
    throw TrainingDivergedError("non-finite critic loss");

  Eigen::MatrixXd dq(1, static_cast<Eigen::Index>(batch.size()));
  dq.row(0) =
      (2.0 / static_cast<double>(batch.size())) * last_td_errors_.transpose();

  Mlp::Gradients grads;
  critic_.backward(cache, dq, &grads);
  critic_.apply_gradients(grads, config_.critic_lr);
  if (!critic_.parameters_finite())
    throw TrainingDivergedError("critic parameters diverged");
  return loss;
}

double DdpgAgent::actor_update(const std::vector<Transition>& batch) {
  if (batch.empty()) throw ShapeError("empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());

  Eigen::MatrixXd obs_goal(obs_dim_ + goal_dim_, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    const Transition& t = batch[static_cast<std::size_t>(c)];
    for (int i = 0; i < obs_dim_; ++i) obs_goal(i, c) = t.state[i];
    for (int i = 0; i < goal_dim_; ++i) obs_goal(obs_dim_ + i, c) = t.goal[i];
  }

  Mlp::Cache actor_cache;
  const Eigen::MatrixXd u = actor_.forward(obs_goal, actor_cache);

  Eigen::MatrixXd q_in(obs_dim_ + goal_dim_ + action_dim_, n);
  q_in.topRows(obs_dim_ + goal_dim_) = obs_goal;
  q_in.bottomRows(action_dim_) = config_.action_bound * u;

  Mlp::Cache critic_cache;
  const Eigen::MatrixXd q = critic_.forward(q_in, critic_cache);
  const double loss = -q.row(0).mean();
  if (!std::isfinite(loss))
    throw TrainingDivergedError("non-finite actor loss");

  Eigen::MatrixXd dq = Eigen::MatrixXd::Constant(
      1, n, -1.0 / static_cast<double>(batch.size()));
  // dL/d(critic input); critic parameters stay frozen here.
  const Eigen::MatrixXd dx = critic_.backward(critic_cache, dq, nullptr);
  const Eigen::MatrixXd du =
      config_.action_bound * dx.bottomRows(action_dim_);

  Mlp::Gradients grads;
  actor_.backward(actor_cache, du, &grads);
  actor_.apply_gradients(grads, config_.actor_lr);
  if (!actor_.parameters_finite())
    throw TrainingDivergedError("actor parameters diverged");
  return loss;
}

void DdpgAgent::soft_update_targets() {
  polyak_update(actor_target_, actor_, config_.tau);
  polyak_update(critic_target_, critic_, config_.tau);
}

Eigen::VectorXd DdpgAgent::td_errors(
    const std::vector<Transition>& batch) const {
  const Eigen::VectorXd y = td_targets(batch);
  const Eigen::MatrixXd q = critic_.forward(critic_input(batch));
  return q.row(0).transpose() - y;
}

namespace {

class DeterministicDdpgPolicy : public Policy {
 public:
  explicit DeterministicDdpgPolicy(const DdpgAgent& agent) : agent_(agent) {}
  std::vector<double> act(std::span<const double> obs,
                          std::span<const double> goal) override {
    return agent_.act(obs, goal, 0.0, rng_);
  }

 private:
  const DdpgAgent& agent_;
  std::mt19937_64 rng_{0};  // unused at zero noise
};

}  // namespace

std::unique_ptr<Policy> DdpgAgent::deterministic_policy() const {
  return std::make_unique<DeterministicDdpgPolicy>(*this);
}

void DdpgAgent::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::int32_t dims[3] = {obs_dim_, goal_dim_, action_dim_};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  const double cfg[7] = {config_.gamma,       config_.tau,
                         config_.actor_lr,    config_.critic_lr,
                         config_.noise_scale, config_.random_action_prob,
                         config_.action_bound};
  out.write(reinterpret_cast<const char*>(cfg), sizeof(cfg));
  const std::uint32_t n_hidden = static_cast<std::uint32_t>(config_.hidden.size());
  out.write(reinterpret_cast<const char*>(&n_hidden), sizeof(n_hidden));
  for (int h : config_.hidden) {
    const std::int32_t v = h;
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
  }
  actor_.save(out);
  critic_.save(out);
  actor_target_.save(out);
  critic_target_.save(out);
  if (!out) throw IoError("checkpoint write failed: " + path);
}

DdpgAgent DdpgAgent::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kMagic))
    throw IoError("bad checkpoint magic");

  std::int32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  double cfg[7];
  in.read(reinterpret_cast<char*>(cfg), sizeof(cfg));
  std::uint32_t n_hidden = 0;
  in.read(reinterpret_cast<char*>(&n_hidden), sizeof(n_hidden));
  if (!in || n_hidden > 64) throw IoError("bad checkpoint header");

  AgentConfig config;
  config.gamma = cfg[0];
  config.tau = cfg[1];
  config.actor_lr = cfg[2];
  config.critic_lr = cfg[3];
  config.noise_scale = cfg[4];
  config.random_action_prob = cfg[5];
  config.action_bound = cfg[6];
  config.hidden.resize(n_hidden);
  for (std::uint32_t i = 0; i < n_hidden; ++i) {
    std::int32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    config.hidden[i] = v;
  }

  Mlp actor = Mlp::load(in);
  Mlp critic = Mlp::load(in);
  Mlp actor_target = Mlp::load(in);
  Mlp critic_target = Mlp::load(in);
  return DdpgAgent(dims[0], dims[1], dims[2], config, std::move(actor),
                   std::move(critic), std::move(actor_target),
                   std::move(critic_target));
}

}  // namespace ebrl
