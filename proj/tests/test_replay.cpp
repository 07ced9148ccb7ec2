#include "ebrl/replay.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "support/stats.hpp"

namespace ebrl {
namespace {

constexpr double kTol = 0.05;

GoalSpace test_goal_space() {
  GoalSpace gs;
  gs.project = [](const ObjectState& s) {
    return std::vector<double>{s.position[0], s.position[1], s.position[2]};
  };
  gs.reward = [](std::span<const double> a, std::span<const double> d) {
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      sq += (a[i] - d[i]) * (a[i] - d[i]);
    return std::sqrt(sq) <= kTol ? 0.0 : -1.0;
  };
  return gs;
}

Transition dummy_transition(int t, int horizon) {
  Transition tr;
  tr.state = {static_cast<double>(t)};
  tr.action = {0.0};
  tr.reward = -1.0;
  tr.next_state = {static_cast<double>(t + 1)};
  tr.goal = {7.0, 7.0, 7.0};  // sentinel, far from every achieved state
  tr.done = t + 1 == horizon;
  return tr;
}

// Each 0 -> 0.1 hop clips to exactly the 0.5 cap and every drop clips to 0,
// so the trajectory energy is up_steps * 0.5 exactly.
Episode lift_episode(int up_steps) {
  Episode ep;
  ep.achieved_goals.emplace_back(std::array<double, 3>{0, 0, 0},
                                 Quat{1, 0, 0, 0});
  if (up_steps == 0)  // still a valid episode: one motionless transition
    ep.achieved_goals.emplace_back(std::array<double, 3>{0, 0, 0},
                                   Quat{1, 0, 0, 0});
  for (int k = 0; k < up_steps; ++k) {
    ep.achieved_goals.emplace_back(std::array<double, 3>{0, 0, 0.1},
                                   Quat{1, 0, 0, 0});
    ep.achieved_goals.emplace_back(std::array<double, 3>{0, 0, 0},
                                   Quat{1, 0, 0, 0});
  }
  const int horizon = static_cast<int>(ep.achieved_goals.size()) - 1;
  for (int t = 0; t < horizon; ++t)
    ep.transitions.push_back(dummy_transition(t, horizon));
  return ep;
}

// T = 50 transitions with slowly drifting achieved positions.
Episode drifting_episode() {
  Episode ep;
  for (int t = 0; t <= 50; ++t)
    ep.achieved_goals.emplace_back(std::array<double, 3>{0.001 * t, 0, 0},
                                   Quat{1, 0, 0, 0});
  for (int t = 0; t < 50; ++t) ep.transitions.push_back(dummy_transition(t, 50));
  return ep;
}

ReplayBuffer energy_buffer(std::size_t capacity) {
  return ReplayBuffer(capacity, SampleStrategy::kEnergy, EnergyParams{});
}

TEST(ReplayBuffer, InsertCachesEnergyAndUpdatesSum) {
  ReplayBuffer buf = energy_buffer(4);
  EXPECT_TRUE(buf.empty());
  buf.insert(lift_episode(2));
  EXPECT_EQ(buf.size(), 1u);
  EXPECT_DOUBLE_EQ(buf.episode(0).trajectory_energy, 1.0);
  EXPECT_DOUBLE_EQ(buf.energy_sum(), 1.0);
  EXPECT_DOUBLE_EQ(buf.max_energy(), 1.0);
}

TEST(ReplayBuffer, RejectsMalformedEpisodes) {
  ReplayBuffer buf = energy_buffer(4);
  Episode ep = lift_episode(1);
  ep.transitions.pop_back();  // length mismatch
  EXPECT_THROW(buf.insert(ep), InvalidEpisodeError);

  Episode tiny;
  tiny.achieved_goals.emplace_back(std::array<double, 3>{0, 0, 0},
                                   Quat{1, 0, 0, 0});
  EXPECT_THROW(buf.insert(tiny), InvalidEpisodeError);
}

TEST(ReplayBuffer, EvictsOldestAtCapacity) {
  ReplayBuffer buf = energy_buffer(3);
  for (int i = 0; i < 5; ++i) buf.insert(lift_episode(i + 1));
  EXPECT_EQ(buf.size(), 3u);
  // insertion order is preserved oldest-first
  EXPECT_EQ(buf.episode(0).insertion_index, 2u);
  EXPECT_EQ(buf.episode(1).insertion_index, 3u);
  EXPECT_EQ(buf.episode(2).insertion_index, 4u);
  EXPECT_DOUBLE_EQ(buf.energy_sum(), 0.5 * (3 + 4 + 5));
}

TEST(ReplayBuffer, EnergySumMatchesFreshRecomputationExactly) {
  ReplayBuffer buf = energy_buffer(32);
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> ups(0, 7);
  const EnergyParams params;
  for (int i = 0; i < 1000; ++i) {
    buf.insert(lift_episode(ups(rng)));
    double fresh = 0.0;
    for (std::size_t k = 0; k < buf.size(); ++k)
      fresh += trajectory_energy(buf.episode(k).achieved_goals, params);
    ASSERT_EQ(buf.energy_sum(), fresh) << "after insert " << i;
  }
}

TEST(ReplayBuffer, NeverYieldsEvictedEpisodes) {
  ReplayBuffer buf = energy_buffer(3);
  for (int i = 0; i < 10; ++i) buf.insert(lift_episode(1 + i % 3));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Episode& ep = buf.sample_episode(rng);
    ASSERT_GE(ep.insertion_index, 7u);
    ASSERT_LE(ep.insertion_index, 9u);
  }
}

TEST(ReplayBuffer, SampleFromEmptyRejected) {
  ReplayBuffer buf = energy_buffer(4);
  std::mt19937_64 rng(1);
  EXPECT_THROW(buf.sample_index(rng), EmptyBufferError);
}

TEST(ReplayBuffer, EnergyProportionalProbabilities) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(lift_episode(2));  // energy 1
  buf.insert(lift_episode(6));  // energy 3
  const std::vector<double> probs = buf.sampling_probabilities();
  EXPECT_DOUBLE_EQ(probs[0], 0.25);
  EXPECT_DOUBLE_EQ(probs[1], 0.75);
}

TEST(ReplayBuffer, ZeroTotalEnergyFallsBackToUniform) {
  ReplayBuffer buf = energy_buffer(4);
  for (int i = 0; i < 3; ++i) buf.insert(lift_episode(0));
  EXPECT_DOUBLE_EQ(buf.energy_sum(), 0.0);
  const std::vector<double> probs = buf.sampling_probabilities();
  for (double p : probs) EXPECT_DOUBLE_EQ(p, 1.0 / 3.0);

  std::mt19937_64 rng(7);
  constexpr std::size_t kDraws = 100000;
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < kDraws; ++i) ++counts[buf.sample_index(rng)];
  EXPECT_TRUE(test::passes_chi_square(counts, probs, kDraws));
}

TEST(ReplayBuffer, EmpiricalFrequenciesMatchEnergyWeights) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(lift_episode(1));  // 0.5
  buf.insert(lift_episode(1));  // 0.5
  buf.insert(lift_episode(2));  // 1.0
  const std::vector<double> probs{0.25, 0.25, 0.5};

  std::mt19937_64 rng(11);
  constexpr std::size_t kDraws = 100000;
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < kDraws; ++i) ++counts[buf.sample_index(rng)];

  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_TRUE(test::within_three_sigma(counts[i], kDraws, probs[i]))
        << "episode " << i << " count " << counts[i];
  EXPECT_TRUE(test::passes_chi_square(counts, probs, kDraws));
}

TEST(ReplayBuffer, ZeroEnergyEpisodesNeverDrawnWhenTotalPositive) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(lift_episode(0));
  buf.insert(lift_episode(3));
  std::mt19937_64 rng(13);
  for (int i = 0; i < 2000; ++i) ASSERT_EQ(buf.sample_index(rng), 1u);
}

TEST(ReplayBuffer, ProbabilitiesScaleInvariant) {
  ReplayBuffer a = energy_buffer(4);
  a.insert(lift_episode(1));
  a.insert(lift_episode(2));
  a.insert(lift_episode(4));
  ReplayBuffer b = energy_buffer(4);  // same energies scaled by 4
  b.insert(lift_episode(4));
  b.insert(lift_episode(8));
  b.insert(lift_episode(16));

  const std::vector<double> pa = a.sampling_probabilities();
  const std::vector<double> pb = b.sampling_probabilities();
  for (std::size_t i = 0; i < pa.size(); ++i)
    EXPECT_NEAR(pa[i], pb[i], 1e-12);
}

TEST(ReplayBuffer, EnergyOverrideMakesSamplingUniform) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(lift_episode(0));
  buf.insert(lift_episode(1));
  buf.insert(lift_episode(6));
  buf.set_energy_override(1.0);

  const std::vector<double> probs = buf.sampling_probabilities();
  for (double p : probs) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);

  std::mt19937_64 rng(17);
  constexpr std::size_t kDraws = 100000;
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < kDraws; ++i) ++counts[buf.sample_index(rng)];
  EXPECT_TRUE(test::passes_chi_square(
      counts, std::vector<double>(3, 1.0 / 3.0), kDraws));
  // stored energies are untouched
  EXPECT_DOUBLE_EQ(buf.episode(2).trajectory_energy, 3.0);
}

// --- relabeling -------------------------------------------------------------

TEST(RelabelFuture, RewardZeroWhenGoalIsNextAchieved) {
  const GoalSpace gs = test_goal_space();
  Episode ep = drifting_episode();
  std::mt19937_64 rng(3);
  // all future goals within 0.049 of every achieved state -> always reward 0
  for (int i = 0; i < 200; ++i) {
    const RelabeledGoal rg = relabel_future(ep, 5, gs, rng);
    ASSERT_GE(rg.future_index, 6u);
    ASSERT_LE(rg.future_index, 49u);
    ASSERT_EQ(rg.reward, 0.0);
  }
}

TEST(RelabelFuture, RewardMinusOneBeyondTolerance) {
  const GoalSpace gs = test_goal_space();
  Episode ep = lift_episode(2);  // achieved indices 0..4, futures of t=0: 1..3
  ep.achieved_goals[2] = ObjectState({5.0, 5.0, 0.0}, Quat{1, 0, 0, 0});
  std::mt19937_64 rng(5);
  bool saw_far = false;
  for (int i = 0; i < 100; ++i) {
    const RelabeledGoal rg = relabel_future(ep, 0, gs, rng);
    if (rg.future_index == 2) {
      EXPECT_EQ(rg.reward, -1.0);  // achieved z=0.1 vs the far-away goal
      saw_far = true;
    } else {
      EXPECT_EQ(rg.reward, 0.0);  // both other futures sit at the same point
    }
  }
  EXPECT_TRUE(saw_far);
}

TEST(RelabelFuture, FinalTransitionsHaveNoFutureGoal) {
  const GoalSpace gs = test_goal_space();
  const Episode ep = drifting_episode();
  std::mt19937_64 rng(7);
  EXPECT_THROW(relabel_future(ep, 49, gs, rng), NoFutureGoalError);
  EXPECT_THROW(relabel_future(ep, 50, gs, rng), NoFutureGoalError);
  EXPECT_NO_THROW(relabel_future(ep, 48, gs, rng));
}

TEST(RelabelFuture, FutureIndexUniformOverOpenInterval) {
  const GoalSpace gs = test_goal_space();
  const Episode ep = drifting_episode();  // T = 50
  std::mt19937_64 rng(9);
  constexpr std::size_t kDraws = 10000;
  std::vector<std::size_t> counts(51, 0);
  for (std::size_t i = 0; i < kDraws; ++i)
    ++counts[relabel_future(ep, 10, gs, rng).future_index];

  for (std::size_t idx = 0; idx <= 50; ++idx) {
    const bool eligible = idx >= 11 && idx <= 49;
    if (!eligible) {
      ASSERT_EQ(counts[idx], 0u) << "index " << idx;
    } else {
      ASSERT_TRUE(test::within_three_sigma(counts[idx], kDraws, 1.0 / 39.0))
          << "index " << idx << " count " << counts[idx];
    }
  }
}

// --- batches ----------------------------------------------------------------

TEST(MakeBatch, HerRatioZeroKeepsOriginalGoals) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(drifting_episode());
  std::mt19937_64 rng(21);
  const std::vector<Transition> batch =
      make_batch(buf, 256, 0.0, test_goal_space(), rng);
  ASSERT_EQ(batch.size(), 256u);
  for (const Transition& t : batch) ASSERT_EQ(t.goal[0], 7.0);
}

TEST(MakeBatch, HerRatioOneRelabelsEveryNonFinalTransition) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(drifting_episode());
  std::mt19937_64 rng(23);
  const std::vector<Transition> batch =
      make_batch(buf, 2000, 1.0, test_goal_space(), rng);
  for (const Transition& t : batch) {
    const int timestep = static_cast<int>(t.state[0]);
    if (timestep < 49) {
      ASSERT_NE(t.goal[0], 7.0) << "timestep " << timestep;
    } else {
      ASSERT_EQ(t.goal[0], 7.0);  // no future goal for the last transition
    }
  }
}

TEST(MakeBatch, RelabeledFractionTracksHerRatio) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(drifting_episode());
  std::mt19937_64 rng(25);
  const std::vector<Transition> batch =
      make_batch(buf, 10000, 0.8, test_goal_space(), rng);
  std::size_t eligible = 0, relabeled = 0;
  for (const Transition& t : batch) {
    if (static_cast<int>(t.state[0]) >= 49) continue;
    ++eligible;
    if (t.goal[0] != 7.0) ++relabeled;
  }
  EXPECT_TRUE(test::within_three_sigma(relabeled, eligible, 0.8))
      << relabeled << "/" << eligible;
}

TEST(MakeBatch, RelabeledRewardsConsistentWithRewardFunction) {
  const GoalSpace gs = test_goal_space();
  ReplayBuffer buf = energy_buffer(4);
  Episode ep = drifting_episode();
  // spread the achieved states so some relabeled goals are out of tolerance
  for (int t = 0; t <= 50; ++t)
    ep.achieved_goals[static_cast<std::size_t>(t)] =
        ObjectState({0.004 * t, 0, 0}, Quat{1, 0, 0, 0});
  buf.insert(ep);
  std::mt19937_64 rng(27);
  const std::vector<Transition> batch = make_batch(buf, 2000, 0.7, gs, rng);
  bool saw_zero = false, saw_minus_one = false;
  for (const Transition& t : batch) {
    // Recompute the reward independently from the episode's achieved goal.
    const auto timestep = static_cast<std::size_t>(t.state[0]);
    const std::vector<double> achieved =
        gs.project(ep.achieved_goals[timestep + 1]);
    ASSERT_EQ(t.reward, gs.reward(achieved, t.goal));
    (t.reward == 0.0 ? saw_zero : saw_minus_one) = true;
  }
  EXPECT_TRUE(saw_zero);
  EXPECT_TRUE(saw_minus_one);
}

TEST(MakeBatch, RejectsBadHerRatio) {
  ReplayBuffer buf = energy_buffer(4);
  buf.insert(drifting_episode());
  std::mt19937_64 rng(29);
  EXPECT_THROW(make_batch(buf, 8, 1.5, test_goal_space(), rng),
               InvalidEpisodeError);
}

// --- episode log ------------------------------------------------------------

TEST(EpisodeLog, WritesOneJsonRecordPerEpisode) {
  ReplayBuffer buf = energy_buffer(4);
  Episode win = lift_episode(2);
  win.transitions.back().reward = 0.0;
  buf.insert(win);
  buf.insert(lift_episode(1));

  const std::string path = ::testing::TempDir() + "episodes.jsonl";
  write_episode_log(buf, path);

  std::ifstream in(path);
  std::string line;
  std::vector<nlohmann::json> records;
  while (std::getline(in, line)) records.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0]["episode_index"], 0);
  EXPECT_DOUBLE_EQ(records[0]["trajectory_energy"], 1.0);
  EXPECT_TRUE(records[0]["success"].get<bool>());
  EXPECT_DOUBLE_EQ(records[0]["return"], -3.0);  // 4 steps: -1 -1 -1 0
  EXPECT_FALSE(records[1]["success"].get<bool>());
}

}  // namespace
}  // namespace ebrl
