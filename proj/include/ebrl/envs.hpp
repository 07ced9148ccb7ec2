#pragma once

// Desk-scale multi-goal manipulation environments. Object states are
// position + quaternion, rewards are sparse {-1, 0}, and the only physics is
// what the energy analysis needs: a gripper doing work on the object raises
// its potential/kinetic/rotational energy, an untouched object keeps zero
// trajectory energy.
//
//   planar-push       object slides on the floor when the gripper runs into
//                     it; goals on the floor plane
//   planar-pick-place grasp / lift / place with ballistic drops; half the
//                     goals are in the air
//   rotate-block      torque-like actions spin the block; quaternion goals

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ebrl/energy.hpp"
#include "ebrl/policy.hpp"
#include "ebrl/replay.hpp"

namespace ebrl {

struct EnvSpec {
  std::string name;
  int obs_dim = 0;
  int action_dim = 0;
  int goal_dim = 0;
  double position_tolerance = 0.05;  // meters
  double rotation_tolerance = 0.1;   // radians
  int horizon = 50;
  double dt = 0.04;
  double transition_cap = 0.5;  // env-default E_tran^max
};

struct EnvState {
  std::array<double, 3> gripper{0.0, 0.0, 0.0};
  ObjectState object;
  std::array<double, 3> object_velocity{0.0, 0.0, 0.0};
  bool grasped = false;
  std::vector<double> goal;
};

struct StepResult {
  std::vector<double> observation;
  double reward = -1.0;
  bool done = false;
  std::vector<double> achieved_goal;
};

class Env {
 public:
  virtual ~Env() = default;

  virtual const EnvSpec& spec() const = 0;

  // Places the object and samples a goal that is not already achieved.
  // Deterministic under the rng's seed.
  virtual std::pair<std::vector<double>, std::vector<double>> reset(
      std::mt19937_64& rng) = 0;

  // Out-of-bounds action components are clipped (and counted), never an
  // error. done becomes true only at the horizon.
  virtual StepResult step(std::span<const double> action) = 0;

  // Pure sparse reward: 0 within tolerance of the desired goal, else -1.
  virtual double compute_reward(std::span<const double> achieved,
                                std::span<const double> desired) const = 0;

  // Goal-vector view of an achieved object state (position or orientation).
  virtual std::vector<double> project_goal(const ObjectState& s) const = 0;

  virtual const EnvState& state() const = 0;
  virtual int timestep() const = 0;
  virtual std::uint64_t clipped_action_count() const = 0;

  // Hindsight-relabeling hooks for the replay buffer.
  GoalSpace goal_space() const;

  // Hand-coded controller that solves the task; used for smoke data and as
  // an evaluation upper bound.
  virtual std::unique_ptr<Policy> make_oracle_policy() const = 0;

  EnergyParams energy_params() const;
};

std::unique_ptr<Env> make_env(const std::string& name);
std::vector<std::string> env_names();

// Scripted fixtures for the three canonical pick-and-place outcomes:
// never touching the object, lifting then dropping it, and carrying it to a
// point. They ignore the sampled goal and drive fixed motions.
std::unique_ptr<Policy> make_noop_policy(int action_dim);
std::unique_ptr<Policy> make_lift_drop_policy(double lift_height,
                                              int release_step);
std::unique_ptr<Policy> make_lift_carry_policy(
    const std::array<double, 3>& target);

// Episode trace export/import: one JSON record per timestep with fields
// {t, gripper, object_position, object_quaternion, action, reward,
//  achieved_goal, goal}.
class TraceWriter {
 public:
  explicit TraceWriter(const std::string& path);
  ~TraceWriter();
  void record(int t, const EnvState& state, std::span<const double> action,
              double reward, std::span<const double> achieved_goal,
              std::span<const double> goal);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Object states (position + quaternion) recovered from a trace file, in
// timestep order.
std::vector<ObjectState> read_trace_object_states(const std::string& path);

}  // namespace ebrl
