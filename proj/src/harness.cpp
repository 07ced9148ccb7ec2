#include "ebrl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ebrl/per.hpp"

namespace ebrl {

namespace {

// Decorrelated rng streams per role, all derived from the run seed.
constexpr std::uint64_t kEnvStream = 0x1ull;
constexpr std::uint64_t kActionStream = 0x2ull;
constexpr std::uint64_t kSampleStream = 0x3ull;
constexpr std::uint64_t kRelabelStream = 0x4ull;
constexpr std::uint64_t kAgentStream = 0x5ull;

std::uint64_t substream(std::uint64_t seed, std::uint64_t role) {
  return seed * 0x9e3779b97f4a7c15ull + role;
}

std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
  return buf;
}

}  // namespace

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kUniformHer: return "uniform-her";
    case Strategy::kPerHer: return "per-her";
    case Strategy::kEbpHer: return "ebp-her";
  }
  throw ConfigError("bad strategy value");
}

Strategy strategy_from_string(const std::string& name) {
  if (name == "uniform-her") return Strategy::kUniformHer;
  if (name == "per-her") return Strategy::kPerHer;
  if (name == "ebp-her") return Strategy::kEbpHer;
  throw ConfigError("unknown strategy: " + name);
}

void RunConfig::validate() const {
  if (seeds.empty()) throw ConfigError("need at least one seed");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (episodes_per_epoch < 1) throw ConfigError("episodes_per_epoch must be >= 1");
  if (optim_steps < 0) throw ConfigError("optim_steps must be >= 0");
  if (actor_warmup_episodes < 0)
    throw ConfigError("actor_warmup_episodes must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (buffer_capacity == 0) throw ConfigError("buffer_capacity must be > 0");
  if (per_capacity == 0) throw ConfigError("per_capacity must be > 0");
  if (her_ratio < 0.0 || her_ratio > 1.0)
    throw ConfigError("her_ratio must lie in [0, 1]");
  if (per_relabel_copies < 0) throw ConfigError("per_relabel_copies must be >= 0");
  if (pearson_window < 2) throw ConfigError("pearson_window must be >= 2");
  agent_config().validate();
  make_env(env);  // rejects unknown names
}

AgentConfig RunConfig::agent_config() const {
  AgentConfig a;
  a.gamma = gamma;
  a.tau = tau;
  a.actor_lr = actor_lr;
  a.critic_lr = critic_lr;
  a.noise_scale = noise_scale;
  a.random_action_prob = random_action_prob;
  a.hidden = hidden;
  return a;
}

EnergyParams RunConfig::energy_params(const EnvSpec& spec) const {
  EnergyParams p;
  p.mass = mass;
  p.gravity = gravity;
  p.inertia_x = inertia;
  p.inertia_y = inertia;
  p.inertia_z = inertia;
  p.dt = spec.dt;
  p.transition_cap = transition_cap > 0.0 ? transition_cap : spec.transition_cap;
  p.validate();
  return p;
}

std::uint64_t RunConfig::samples_per_epoch(const EnvSpec& spec) const {
  return static_cast<std::uint64_t>(episodes_per_epoch) *
         static_cast<std::uint64_t>(spec.horizon);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& value, const std::string& key) {
  std::istringstream in(value);
  T out;
  in >> out;
  if (in.fail() || !in.eof())
    throw ConfigError("bad value for " + key + ": " + value);
  return out;
}

}  // namespace

void apply_config_entry(RunConfig& c, const std::string& key,
                        const std::string& value) {
  if (key == "env") c.env = value;
  else if (key == "strategy") c.strategy = strategy_from_string(value);
  else if (key == "seeds") {
    c.seeds.clear();
    for (const std::string& s : split(value, ','))
      c.seeds.push_back(parse_number<std::uint64_t>(trim(s), key));
  } else if (key == "epochs") c.epochs = parse_number<int>(value, key);
  else if (key == "episodes_per_epoch")
    c.episodes_per_epoch = parse_number<int>(value, key);
  else if (key == "optim_steps") c.optim_steps = parse_number<int>(value, key);
  else if (key == "batch_size") c.batch_size = parse_number<int>(value, key);
  else if (key == "eval_episodes")
    c.eval_episodes = parse_number<int>(value, key);
  else if (key == "actor_warmup_episodes")
    c.actor_warmup_episodes = parse_number<int>(value, key);
  else if (key == "buffer_capacity")
    c.buffer_capacity = parse_number<std::size_t>(value, key);
  else if (key == "her_ratio") c.her_ratio = parse_number<double>(value, key);
  else if (key == "per_capacity")
    c.per_capacity = parse_number<std::size_t>(value, key);
  else if (key == "per_relabel_copies")
    c.per_relabel_copies = parse_number<int>(value, key);
  else if (key == "per_alpha") c.per_alpha = parse_number<double>(value, key);
  else if (key == "per_epsilon")
    c.per_epsilon = parse_number<double>(value, key);
  else if (key == "gamma") c.gamma = parse_number<double>(value, key);
  else if (key == "tau") c.tau = parse_number<double>(value, key);
  else if (key == "actor_lr") c.actor_lr = parse_number<double>(value, key);
  else if (key == "critic_lr") c.critic_lr = parse_number<double>(value, key);
  else if (key == "noise_scale")
    c.noise_scale = parse_number<double>(value, key);
  else if (key == "random_action_prob")
    c.random_action_prob = parse_number<double>(value, key);
  else if (key == "hidden") {
    c.hidden.clear();
    for (const std::string& s : split(value, ','))
      c.hidden.push_back(parse_number<int>(trim(s), key));
  } else if (key == "mass") c.mass = parse_number<double>(value, key);
  else if (key == "gravity") c.gravity = parse_number<double>(value, key);
  else if (key == "inertia") c.inertia = parse_number<double>(value, key);
  else if (key == "transition_cap")
    c.transition_cap = parse_number<double>(value, key);
  else if (key == "pearson_window")
    c.pearson_window = parse_number<int>(value, key);
  else throw ConfigError("unknown config key: " + key);
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    apply_config_entry(config, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

void write_config_json(const RunConfig& c, const std::string& path) {
  nlohmann::json j{{"env", c.env},
                   {"strategy", to_string(c.strategy)},
                   {"seeds", c.seeds},
                   {"epochs", c.epochs},
                   {"episodes_per_epoch", c.episodes_per_epoch},
                   {"optim_steps", c.optim_steps},
                   {"batch_size", c.batch_size},
                   {"eval_episodes", c.eval_episodes},
                   {"actor_warmup_episodes", c.actor_warmup_episodes},
                   {"buffer_capacity", c.buffer_capacity},
                   {"her_ratio", c.her_ratio},
                   {"per_capacity", c.per_capacity},
                   {"per_relabel_copies", c.per_relabel_copies},
                   {"per_alpha", c.per_alpha},
                   {"per_epsilon", c.per_epsilon},
                   {"gamma", c.gamma},
                   {"tau", c.tau},
                   {"actor_lr", c.actor_lr},
                   {"critic_lr", c.critic_lr},
                   {"noise_scale", c.noise_scale},
                   {"random_action_prob", c.random_action_prob},
                   {"hidden", c.hidden},
                   {"mass", c.mass},
                   {"gravity", c.gravity},
                   {"inertia", c.inertia},
                   {"transition_cap", c.transition_cap},
                   {"pearson_window", c.pearson_window}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

double evaluate(Policy& policy, Env& env, int episodes, std::uint64_t seed) {
  if (episodes < 1) throw ConfigError("evaluation needs at least one episode");
  std::mt19937_64 rng(seed);
  int successes = 0;
  for (int e = 0; e < episodes; ++e) {
    policy.reset();
    auto [obs, goal] = env.reset(rng);
    double last_reward = -1.0;
    for (int t = 0; t < env.spec().horizon; ++t) {
      const std::vector<double> action = policy.act(obs, goal);
      StepResult r = env.step(action);
      obs = std::move(r.observation);
      last_reward = r.reward;
    }
    if (last_reward == 0.0) ++successes;
  }
  return static_cast<double>(successes) / episodes;
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw ShapeError("pearson inputs must have equal length");
  const std::size_t n = xs.size();
  if (n < 2) throw UndefinedCorrelationError("need at least two points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw UndefinedCorrelationError("zero variance");
  return sxy / std::sqrt(sxx * syy);
}

namespace {

// Mean |TD error| of an episode's stored transitions under the current nets.
double episode_mean_abs_td(const DdpgAgent& agent, const Episode& ep) {
  const Eigen::VectorXd d = agent.td_errors(ep.transitions);
  return d.cwiseAbs().mean();
}

std::optional<double> buffer_pearson(const DdpgAgent& agent,
                                     const ReplayBuffer& buffer,
                                     std::size_t window) {
  const std::size_t n = std::min(window, buffer.size());
  if (n < 2) return std::nullopt;
  std::vector<double> energies, tds;
  energies.reserve(n);
  tds.reserve(n);
  const std::size_t start = buffer.size() - n;
  for (std::size_t i = start; i < buffer.size(); ++i) {
    const Episode& ep = buffer.episode(i);
    energies.push_back(ep.trajectory_energy);
    tds.push_back(episode_mean_abs_td(agent, ep));
  }
  try {
    return pearson_r(energies, tds);
  } catch (const UndefinedCorrelationError&) {
    return std::nullopt;
  }
}

void store_per_episode(PerStore& store, const Episode& ep,
                       const GoalSpace& gs, int relabel_copies,
                       std::mt19937_64& rng) {
  for (const Transition& t : ep.transitions) store.insert(t);
  for (int c = 0; c < relabel_copies; ++c) {
    for (std::size_t t = 0; t + 1 < ep.length(); ++t) {
      RelabeledGoal rg = relabel_future(ep, t, gs, rng);
      Transition tr = ep.transitions[t];
      tr.goal = std::move(rg.goal);
      tr.reward = rg.reward;
      store.insert(std::move(tr));
    }
  }
}

}  // namespace

SeedResult train_seed(const RunConfig& config, std::uint64_t seed,
                      const std::string& out_dir) {
  config.validate();

  std::unique_ptr<Env> env = make_env(config.env);
  std::unique_ptr<Env> eval_env = make_env(config.env);
  const EnvSpec& spec = env->spec();
  const GoalSpace gs = env->goal_space();
  const EnergyParams energy = config.energy_params(spec);

  DdpgAgent agent(spec.obs_dim, spec.goal_dim, spec.action_dim,
                  config.agent_config(), substream(seed, kAgentStream));

  const SampleStrategy buffer_strategy =
      config.strategy == Strategy::kEbpHer ? SampleStrategy::kEnergy
                                           : SampleStrategy::kUniform;
  ReplayBuffer buffer(config.buffer_capacity, buffer_strategy, energy);

  std::unique_ptr<PerStore> per_store;
  if (config.strategy == Strategy::kPerHer) {
    PerConfig pc;
    pc.alpha = config.per_alpha;
    pc.epsilon = config.per_epsilon;
    per_store = std::make_unique<PerStore>(config.per_capacity, pc);
  }

  std::mt19937_64 env_rng(substream(seed, kEnvStream));
  std::mt19937_64 action_rng(substream(seed, kActionStream));
  std::mt19937_64 sample_rng(substream(seed, kSampleStream));
  std::mt19937_64 relabel_rng(substream(seed, kRelabelStream));

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> uniform_action(-1.0, 1.0);
  const double noise_abs =
      config.noise_scale * config.agent_config().action_bound;

  SeedResult result;
  result.seed = seed;
  const int mid_epoch = config.epochs / 2;
  std::uint64_t episodes_done = 0;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();

    for (int e = 0; e < config.episodes_per_epoch; ++e) {
      auto [obs, goal] = env->reset(env_rng);
      Episode ep;
      ep.achieved_goals.push_back(env->state().object);
      for (int t = 0; t < spec.horizon; ++t) {
        std::vector<double> action;
        if (coin(action_rng) < config.random_action_prob) {
          action.resize(static_cast<std::size_t>(spec.action_dim));
          for (double& a : action) a = uniform_action(action_rng);
        } else {
          action = agent.act(obs, goal, noise_abs, action_rng);
        }
        StepResult r = env->step(action);

        Transition tr;
        tr.state = obs;
        tr.action = action;
        tr.reward = r.reward;
        tr.next_state = r.observation;
        tr.goal = goal;
        tr.done = r.done;
        ep.transitions.push_back(std::move(tr));
        ep.achieved_goals.push_back(env->state().object);
        obs = std::move(r.observation);
      }
      buffer.insert(ep);
      if (per_store)
        store_per_episode(*per_store, ep, gs, config.per_relabel_copies,
                          relabel_rng);
      ++episodes_done;

      for (int m = 0; m < config.optim_steps; ++m) {
        std::vector<Transition> batch;
        std::vector<std::size_t> slots;
        if (per_store) {
          slots = per_store->sample_slots(
              static_cast<std::size_t>(config.batch_size), sample_rng);
          batch.reserve(slots.size());
          for (std::size_t s : slots)
            batch.push_back(per_store->transition(s));
        } else {
          batch = make_batch(buffer,
                             static_cast<std::size_t>(config.batch_size),
                             config.her_ratio, gs, sample_rng);
        }

        const Eigen::VectorXd targets = agent.td_targets(batch);
        agent.critic_update(batch, targets);
        if (per_store) {
          const Eigen::VectorXd& delta = agent.last_td_errors();
          std::vector<double> raw(static_cast<std::size_t>(delta.size()));
          for (Eigen::Index i = 0; i < delta.size(); ++i)
            raw[static_cast<std::size_t>(i)] = delta(i);
          per_store->update_priorities(slots, raw);
        }
        if (episodes_done > static_cast<std::uint64_t>(config.actor_warmup_episodes))
          agent.actor_update(batch);
        agent.soft_update_targets();
      }
    }

    const auto t1 = std::chrono::steady_clock::now();

    EpochRecord rec;
    rec.epoch = epoch;
    rec.cumulative_samples = episodes_done * static_cast<std::uint64_t>(spec.horizon);
    rec.wall_clock_seconds =
        std::chrono::duration<double>(t1 - t0).count();

    std::unique_ptr<Policy> policy = agent.deterministic_policy();
    rec.success_rate =
        evaluate(*policy, *eval_env, config.eval_episodes,
                 substream(seed, 0x100ull + static_cast<std::uint64_t>(epoch)));

    if (!buffer.empty()) {
      rec.mean_buffer_energy = buffer.energy_sum() / buffer.size();
      rec.max_buffer_energy = buffer.max_energy();
    }
    rec.pearson_r = buffer_pearson(
        agent, buffer, static_cast<std::size_t>(config.pearson_window));
    if (epoch == mid_epoch)
      result.mid_training_pearson =
          buffer_pearson(agent, buffer, buffer.size());

    if (result.best_epoch < 0 || rec.success_rate > result.best_success) {
      result.best_success = rec.success_rate;
      result.best_epoch = epoch;
      if (!out_dir.empty()) {
        agent.save(out_dir + "/seed_" + std::to_string(seed) + "_best.ckpt");
      }
    }
    result.records.push_back(std::move(rec));
  }
  return result;
}

std::vector<SeedResult> train(const RunConfig& config,
                              const std::string& out_dir) {
  config.validate();
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  std::vector<SeedResult> results;
  results.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds)
    results.push_back(train_seed(config, seed, out_dir));
  return results;
}

std::optional<std::uint64_t> samples_to_threshold(
    const std::vector<EpochRecord>& records, double threshold) {
  for (const EpochRecord& r : records)
    if (r.success_rate >= threshold) return r.cumulative_samples;
  return std::nullopt;
}

double efficiency_ratio(double baseline_samples, double ebp_samples) {
  if (!(ebp_samples > 0.0)) throw ConfigError("ebp sample count must be > 0");
  return baseline_samples / ebp_samples;
}

std::string format_ratio(double ratio) { return format_double(ratio, 2); }

void write_reports(const RunConfig& config,
                   const std::vector<SeedResult>& results,
                   const std::string& out_dir) {
  if (results.empty()) throw ConfigError("no results to report");
  std::filesystem::create_directories(out_dir);

  for (const SeedResult& sr : results) {
    const std::string path =
        out_dir + "/seed_" + std::to_string(sr.seed) + ".csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,success_rate,cumulative_samples,pearson_r,wall_clock\n";
    for (const EpochRecord& r : sr.records) {
      out << r.epoch << ',' << format_double(r.success_rate, 4) << ','
          << r.cumulative_samples << ','
          << (r.pearson_r ? format_double(*r.pearson_r, 6) : std::string())
          << ',' << format_double(r.wall_clock_seconds, 3) << '\n';
    }
  }

  const std::size_t epochs = results.front().records.size();
  {
    const std::string path = out_dir + "/aggregate.csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "epoch,cumulative_samples,success_mean,success_std,"
           "pearson_mean,pearson_std\n";
    for (std::size_t e = 0; e < epochs; ++e) {
      std::vector<double> succ, pear;
      std::uint64_t samples = 0;
      for (const SeedResult& sr : results) {
        if (e >= sr.records.size()) continue;
        succ.push_back(sr.records[e].success_rate);
        samples = sr.records[e].cumulative_samples;
        if (sr.records[e].pearson_r) pear.push_back(*sr.records[e].pearson_r);
      }
      const auto mean_std = [](const std::vector<double>& v) {
        double m = std::accumulate(v.begin(), v.end(), 0.0) /
                   static_cast<double>(v.size());
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        return std::pair<double, double>(
            m, std::sqrt(var / static_cast<double>(v.size())));
      };
      const auto [sm, ss] = mean_std(succ);
      out << e << ',' << samples << ',' << format_double(sm, 4) << ','
          << format_double(ss, 4) << ',';
      if (!pear.empty()) {
        const auto [pm, ps] = mean_std(pear);
        out << format_double(pm, 6) << ',' << format_double(ps, 6);
      } else {
        out << ',';
      }
      out << '\n';
    }
  }

  {
    const std::string path = out_dir + "/samples_to_success.csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "success_level";
    for (const SeedResult& sr : results) out << ",seed_" << sr.seed;
    out << '\n';
    for (int level = 1; level <= 10; ++level) {
      const double threshold = 0.1 * level;
      out << format_double(threshold, 1);
      for (const SeedResult& sr : results) {
        const auto s = samples_to_threshold(sr.records, threshold);
        out << ',';
        if (s) out << *s;
      }
      out << '\n';
    }
  }

  write_config_json(config, out_dir + "/run.json");
}

}  // namespace ebrl
