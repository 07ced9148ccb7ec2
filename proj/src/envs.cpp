#include "ebrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace ebrl {

namespace {

constexpr double kWorkspaceHalf = 0.3;   // xy extent, meters
constexpr double kMaxZ = 0.5;            // gripper/object ceiling
constexpr double kMaxStep = 0.05;        // gripper travel per step
constexpr double kContactDist = 0.06;    // push contact distance
constexpr double kGraspRadius = 0.06;
constexpr double kMaxRotStep = 0.15;     // per-axis radians per step
constexpr int kHorizon = 50;
constexpr double kDt = 0.04;
constexpr double kGravity = 9.81;

double clip(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

// Geodesic angle between two unit quaternions (sign-insensitive).
double quat_angle(const Quat& a, const Quat& b) {
  const double dot =
      std::abs(a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z);
  return 2.0 * std::acos(std::min(1.0, dot));
}

Quat quat_multiply(const Quat& a, const Quat& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quat quat_from_rotvec(const std::array<double, 3>& v) {
  const double angle = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  if (angle < 1e-12) return {1.0, 0.0, 0.0, 0.0};
  const double half = 0.5 * angle;
  const double s = std::sin(half) / angle;
  return {std::cos(half), v[0] * s, v[1] * s, v[2] * s};
}

Quat quat_conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }

std::array<double, 3> quat_to_rotvec(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w < 0.0) q = {-q.w, -q.x, -q.y, -q.z};  // shortest arc
  const double sin_half =
      std::sqrt(std::max(0.0, 1.0 - q.w * q.w));
  const double angle = 2.0 * std::atan2(sin_half, q.w);
  if (sin_half < 1e-9) return {0.0, 0.0, 0.0};
  const double k = angle / sin_half;
  return {q.x * k, q.y * k, q.z * k};
}

class EnvBase : public Env {
 public:
  const EnvSpec& spec() const override { return spec_; }
  const EnvState& state() const override { return state_; }
  int timestep() const override { return t_; }
  std::uint64_t clipped_action_count() const override { return clipped_; }

 protected:
  // Clips each action component to [-1, 1], counting violations.
  std::vector<double> sanitize_action(std::span<const double> action) {
    if (static_cast<int>(action.size()) != spec_.action_dim)
      throw ShapeError("action dimension mismatch");
    std::vector<double> a(action.begin(), action.end());
    for (double& v : a) {
      if (v < -1.0 || v > 1.0 || !std::isfinite(v)) {
        ++clipped_;
        v = std::isfinite(v) ? clip(v, -1.0, 1.0) : 0.0;
      }
    }
    return a;
  }

  EnvSpec spec_;
  EnvState state_;
  int t_ = 0;
  std::uint64_t clipped_ = 0;
};

// ---------------------------------------------------------------------------
// PlanarPush

class PlanarPushEnv final : public EnvBase {
 public:
  PlanarPushEnv() {
    spec_.name = "planar-push";
    spec_.obs_dim = 8;
    spec_.action_dim = 2;
    spec_.goal_dim = 3;
    spec_.horizon = kHorizon;
    spec_.dt = kDt;
    spec_.transition_cap = 0.5;
  }

  std::pair<std::vector<double>, std::vector<double>> reset(
      std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> grip(-0.25, 0.25);
    std::uniform_real_distribution<double> obj(-0.2, 0.2);
    std::uniform_real_distribution<double> goal(-0.25, 0.25);

    state_.gripper = {grip(rng), grip(rng), 0.0};
    state_.object =
        ObjectState({obj(rng), obj(rng), 0.0}, Quat{1.0, 0.0, 0.0, 0.0});
    state_.object_velocity = {0.0, 0.0, 0.0};
    state_.grasped = false;
    do {
      state_.goal = {goal(rng), goal(rng), 0.0};
    } while (dist3(state_.object.position,
                   {state_.goal[0], state_.goal[1], state_.goal[2]}) <=
             spec_.position_tolerance);
    t_ = 0;
    return {observation(), state_.goal};
  }

  StepResult step(std::span<const double> action) override {
    const std::vector<double> a = sanitize_action(action);
    const std::array<double, 3> prev_obj = state_.object.position;

    state_.gripper[0] =
        clip(state_.gripper[0] + a[0] * kMaxStep, -kWorkspaceHalf, kWorkspaceHalf);
    state_.gripper[1] =
        clip(state_.gripper[1] + a[1] * kMaxStep, -kWorkspaceHalf, kWorkspaceHalf);

    // The gripper displaces the object out of its contact disc.
    std::array<double, 3> obj = state_.object.position;
    const double d = dist2(obj, state_.gripper);
    if (d < kContactDist) {
      double nx = obj[0] - state_.gripper[0];
      double ny = obj[1] - state_.gripper[1];
      const double n = std::sqrt(nx * nx + ny * ny);
      if (n < 1e-12) {
        nx = 1.0;
        ny = 0.0;
      } else {
        nx /= n;
        ny /= n;
      }
      obj[0] = clip(state_.gripper[0] + nx * kContactDist, -kWorkspaceHalf,
                    kWorkspaceHalf);
      obj[1] = clip(state_.gripper[1] + ny * kContactDist, -kWorkspaceHalf,
                    kWorkspaceHalf);
    }
    state_.object = ObjectState(obj, state_.object.orientation);
    for (int i = 0; i < 3; ++i)
      state_.object_velocity[i] = (obj[i] - prev_obj[i]) / kDt;

    ++t_;
    StepResult out;
    out.observation = observation();
    out.achieved_goal = project_goal(state_.object);
    out.reward = compute_reward(out.achieved_goal, state_.goal);
    out.done = t_ >= spec_.horizon;
    return out;
  }

  double compute_reward(std::span<const double> achieved,
                        std::span<const double> desired) const override {
    if (achieved.size() != 3 || desired.size() != 3)
      throw ShapeError("goal dimension mismatch");
    const double dx = achieved[0] - desired[0];
    const double dy = achieved[1] - desired[1];
    const double dz = achieved[2] - desired[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz) <= spec_.position_tolerance
               ? 0.0
               : -1.0;
  }

  std::vector<double> project_goal(const ObjectState& s) const override {
    return {s.position[0], s.position[1], s.position[2]};
  }

  std::unique_ptr<Policy> make_oracle_policy() const override;

 private:
  std::vector<double> observation() const {
    return {state_.gripper[0],
            state_.gripper[1],
            state_.object.position[0],
            state_.object.position[1],
            state_.object.position[0] - state_.gripper[0],
            state_.object.position[1] - state_.gripper[1],
            state_.object_velocity[0],
            state_.object_velocity[1]};
  }
};

// Gets behind the object relative to the goal, then walks into it. Backs off
// once the object sits inside tolerance.
class PlanarPushOracle final : public Policy {
 public:
  std::vector<double> act(std::span<const double> obs,
                          std::span<const double> goal) override {
    const double gx = obs[0], gy = obs[1];
    const double ox = obs[2], oy = obs[3];
    const double tx = goal[0], ty = goal[1];

    const double to_goal_x = tx - ox, to_goal_y = ty - oy;
    const double goal_dist = std::hypot(to_goal_x, to_goal_y);
    if (goal_dist <= 0.5 * 0.05) {
      // Done: retreat so later steps cannot disturb the object.
      const double away_x = gx - ox, away_y = gy - oy;
      const double n = std::hypot(away_x, away_y);
      if (n < 1e-9) return {1.0, 0.0};
      return {clip(away_x / n, -1.0, 1.0), clip(away_y / n, -1.0, 1.0)};
    }

    const double dir_x = to_goal_x / goal_dist, dir_y = to_goal_y / goal_dist;
    const double behind_x = ox - dir_x * (kContactDist + 0.01);
    const double behind_y = oy - dir_y * (kContactDist + 0.01);

    const double to_behind_x = behind_x - gx, to_behind_y = behind_y - gy;
    const double behind_dist = std::hypot(to_behind_x, to_behind_y);
    if (behind_dist > 0.015) {
      // Approach the staging point; swing wide while the straight path
      // would clip the object.
      double mx = to_behind_x / behind_dist, my = to_behind_y / behind_dist;
      const double to_obj_x = ox - gx, to_obj_y = oy - gy;
      const double obj_dist = std::hypot(to_obj_x, to_obj_y);
      if (obj_dist < kContactDist + 0.02 && obj_dist > 1e-9) {
        const double cross = to_obj_x * my - to_obj_y * mx;
        const double side = cross >= 0.0 ? -1.0 : 1.0;
        mx = side * (to_obj_y / obj_dist);
        my = side * (-to_obj_x / obj_dist);
      }
      const double speed = std::min(1.0, behind_dist / kMaxStep);
      return {mx * speed, my * speed};
    }

    // Push: advance into the object, slowing on final approach.
    const double speed =
        std::min(1.0, std::max(0.15, (goal_dist - 0.015) / kMaxStep));
    return {dir_x * speed, dir_y * speed};
  }
};

std::unique_ptr<Policy> PlanarPushEnv::make_oracle_policy() const {
  return std::make_unique<PlanarPushOracle>();
}

// ---------------------------------------------------------------------------
// PlanarPickPlace

class PlanarPickPlaceEnv final : public EnvBase {
 public:
  PlanarPickPlaceEnv() {
    spec_.name = "planar-pick-place";
    spec_.obs_dim = 13;
    spec_.action_dim = 4;
    spec_.goal_dim = 3;
    spec_.horizon = kHorizon;
    spec_.dt = kDt;
    spec_.transition_cap = 0.5;
  }

  std::pair<std::vector<double>, std::vector<double>> reset(
      std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> grip(-0.25, 0.25);
    std::uniform_real_distribution<double> gz(0.05, 0.3);
    std::uniform_real_distribution<double> obj(-0.2, 0.2);
    std::uniform_real_distribution<double> goal(-0.25, 0.25);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::uniform_real_distribution<double> air(0.08, 0.25);

    state_.gripper = {grip(rng), grip(rng), gz(rng)};
    state_.object =
        ObjectState({obj(rng), obj(rng), 0.0}, Quat{1.0, 0.0, 0.0, 0.0});
    state_.object_velocity = {0.0, 0.0, 0.0};
    state_.grasped = false;
    do {
      const double z = coin(rng) < 0.5 ? air(rng) : 0.0;
      state_.goal = {goal(rng), goal(rng), z};
    } while (dist3(state_.object.position,
                   {state_.goal[0], state_.goal[1], state_.goal[2]}) <=
             spec_.position_tolerance);
    t_ = 0;
    return {observation(), state_.goal};
  }

  StepResult step(std::span<const double> action) override {
    const std::vector<double> a = sanitize_action(action);
    const std::array<double, 3> prev_obj = state_.object.position;

    state_.gripper[0] =
        clip(state_.gripper[0] + a[0] * kMaxStep, -kWorkspaceHalf, kWorkspaceHalf);
    state_.gripper[1] =
        clip(state_.gripper[1] + a[1] * kMaxStep, -kWorkspaceHalf, kWorkspaceHalf);
    state_.gripper[2] = clip(state_.gripper[2] + a[2] * kMaxStep, 0.0, kMaxZ);

    const bool engage = a[3] > 0.0;
    std::array<double, 3> obj = state_.object.position;

    if (engage && (state_.grasped ||
                   dist3(state_.gripper, obj) <= kGraspRadius)) {
      // Kinematic attachment: the object rides the gripper.
      state_.grasped = true;
      obj = state_.gripper;
      for (int i = 0; i < 3; ++i)
        state_.object_velocity[i] = (obj[i] - prev_obj[i]) / kDt;
    } else {
      state_.grasped = false;
      if (obj[2] > 0.0 || state_.object_velocity[2] > 0.0) {
        // Ballistic fall onto an inelastic, high-friction floor.
        std::array<double, 3> v = state_.object_velocity;
        v[2] -= kGravity * kDt;
        for (int i = 0; i < 3; ++i) obj[i] += v[i] * kDt;
        if (obj[2] <= 0.0) {
          obj[2] = 0.0;
          v = {0.0, 0.0, 0.0};
        }
        obj[0] = clip(obj[0], -kWorkspaceHalf, kWorkspaceHalf);
        obj[1] = clip(obj[1], -kWorkspaceHalf, kWorkspaceHalf);
        state_.object_velocity = v;
      } else {
        state_.object_velocity = {0.0, 0.0, 0.0};
      }
    }

    state_.object = ObjectState(obj, state_.object.orientation);

    ++t_;
    StepResult out;
    out.observation = observation();
    out.achieved_goal = project_goal(state_.object);
    out.reward = compute_reward(out.achieved_goal, state_.goal);
    out.done = t_ >= spec_.horizon;
    return out;
  }

  double compute_reward(std::span<const double> achieved,
                        std::span<const double> desired) const override {
    if (achieved.size() != 3 || desired.size() != 3)
      throw ShapeError("goal dimension mismatch");
    const double dx = achieved[0] - desired[0];
    const double dy = achieved[1] - desired[1];
    const double dz = achieved[2] - desired[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz) <= spec_.position_tolerance
               ? 0.0
               : -1.0;
  }

  std::vector<double> project_goal(const ObjectState& s) const override {
    return {s.position[0], s.position[1], s.position[2]};
  }

  std::unique_ptr<Policy> make_oracle_policy() const override;

 private:
  std::vector<double> observation() const {
    return {state_.gripper[0],
            state_.gripper[1],
            state_.gripper[2],
            state_.object.position[0],
            state_.object.position[1],
            state_.object.position[2],
            state_.object.position[0] - state_.gripper[0],
            state_.object.position[1] - state_.gripper[1],
            state_.object.position[2] - state_.gripper[2],
            state_.object_velocity[0],
            state_.object_velocity[1],
            state_.object_velocity[2],
            state_.grasped ? 1.0 : 0.0};
  }
};

// Reach, grasp, carry to the goal, then hold.
class PlanarPickPlaceOracle final : public Policy {
 public:
  std::vector<double> act(std::span<const double> obs,
                          std::span<const double> goal) override {
    const std::array<double, 3> gripper{obs[0], obs[1], obs[2]};
    const std::array<double, 3> object{obs[3], obs[4], obs[5]};
    const bool grasped = obs[12] > 0.5;

    if (!grasped) {
      const double d = dist3(gripper, object);
      std::vector<double> a = move_toward(gripper, object);
      a.push_back(d <= 0.8 * kGraspRadius ? 1.0 : -1.0);
      return a;
    }
    const std::array<double, 3> target{goal[0], goal[1], goal[2]};
    std::vector<double> a = move_toward(gripper, target);
    a.push_back(1.0);  // keep holding at the goal
    return a;
  }

 private:
  static std::vector<double> move_toward(const std::array<double, 3>& from,
                                         const std::array<double, 3>& to) {
    std::vector<double> a(3);
    for (int i = 0; i < 3; ++i)
      a[static_cast<std::size_t>(i)] = clip((to[i] - from[i]) / kMaxStep, -1.0, 1.0);
    return a;
  }
};

std::unique_ptr<Policy> PlanarPickPlaceEnv::make_oracle_policy() const {
  return std::make_unique<PlanarPickPlaceOracle>();
}

// ---------------------------------------------------------------------------
// RotateBlock

class RotateBlockEnv final : public EnvBase {
 public:
  RotateBlockEnv() {
    spec_.name = "rotate-block";
    spec_.obs_dim = 7;
    spec_.action_dim = 3;
    spec_.goal_dim = 4;
    spec_.horizon = kHorizon;
    spec_.dt = kDt;
    spec_.transition_cap = 2.5;
  }

  std::pair<std::vector<double>, std::vector<double>> reset(
      std::mt19937_64& rng) override {
    std::uniform_real_distribution<double> yaw(-M_PI, M_PI);

    state_.gripper = {0.0, 0.0, 0.0};
    state_.object = ObjectState({0.0, 0.0, 0.0}, yaw_quat(yaw(rng)));
    state_.object_velocity = {0.0, 0.0, 0.0};
    state_.grasped = false;
    last_rate_ = {0.0, 0.0, 0.0};
    Quat goal_q;
    do {
      goal_q = yaw_quat(yaw(rng));
    } while (quat_angle(state_.object.orientation, goal_q) <=
             spec_.rotation_tolerance);
    state_.goal = {goal_q.w, goal_q.x, goal_q.y, goal_q.z};
    t_ = 0;
    return {observation(), state_.goal};
  }

  StepResult step(std::span<const double> action) override {
    const std::vector<double> a = sanitize_action(action);
    const std::array<double, 3> rotvec{a[0] * kMaxRotStep, a[1] * kMaxRotStep,
                                       a[2] * kMaxRotStep};
    const Quat dq = quat_from_rotvec(rotvec);
    state_.object = ObjectState(
        state_.object.position,
        quat_multiply(dq, state_.object.orientation));  // world-frame spin
    for (int i = 0; i < 3; ++i) last_rate_[i] = rotvec[i] / kDt;

    ++t_;
    StepResult out;
    out.observation = observation();
    out.achieved_goal = project_goal(state_.object);
    out.reward = compute_reward(out.achieved_goal, state_.goal);
    out.done = t_ >= spec_.horizon;
    return out;
  }

  double compute_reward(std::span<const double> achieved,
                        std::span<const double> desired) const override {
    if (achieved.size() != 4 || desired.size() != 4)
      throw ShapeError("goal dimension mismatch");
    const Quat qa{achieved[0], achieved[1], achieved[2], achieved[3]};
    const Quat qd{desired[0], desired[1], desired[2], desired[3]};
    return quat_angle(qa.normalized(), qd.normalized()) <=
                   spec_.rotation_tolerance
               ? 0.0
               : -1.0;
  }

  std::vector<double> project_goal(const ObjectState& s) const override {
    return {s.orientation.w, s.orientation.x, s.orientation.y,
            s.orientation.z};
  }

  std::unique_ptr<Policy> make_oracle_policy() const override;

 private:
  static Quat yaw_quat(double yaw) {
    return {std::cos(0.5 * yaw), 0.0, 0.0, std::sin(0.5 * yaw)};
  }

  std::vector<double> observation() const {
    const Quat& q = state_.object.orientation;
    return {q.w, q.x, q.y, q.z, last_rate_[0], last_rate_[1], last_rate_[2]};
  }

  std::array<double, 3> last_rate_{0.0, 0.0, 0.0};
};

// Spins along the shortest arc to the goal orientation.
class RotateBlockOracle final : public Policy {
 public:
  std::vector<double> act(std::span<const double> obs,
                          std::span<const double> goal) override {
    const Quat q = Quat{obs[0], obs[1], obs[2], obs[3]}.normalized();
    const Quat g = Quat{goal[0], goal[1], goal[2], goal[3]}.normalized();
    const std::array<double, 3> needed =
        quat_to_rotvec(quat_multiply(g, quat_conjugate(q)));
    std::vector<double> a(3);
    for (int i = 0; i < 3; ++i)
      a[static_cast<std::size_t>(i)] =
          clip(needed[i] / kMaxRotStep, -1.0, 1.0);
    return a;
  }
};

std::unique_ptr<Policy> RotateBlockEnv::make_oracle_policy() const {
  return std::make_unique<RotateBlockOracle>();
}

// ---------------------------------------------------------------------------
// Scripted scenario fixtures

class NoopPolicy final : public Policy {
 public:
  explicit NoopPolicy(int action_dim) : action_dim_(action_dim) {}
  std::vector<double> act(std::span<const double>,
                          std::span<const double>) override {
    std::vector<double> a(static_cast<std::size_t>(action_dim_), 0.0);
    if (action_dim_ == 4) a[3] = -1.0;  // keep the gripper open
    return a;
  }

 private:
  int action_dim_;
};

// Grasps the object, lifts it to a height, releases at a fixed step and
// retreats upward.
class LiftDropPolicy final : public Policy {
 public:
  LiftDropPolicy(double lift_height, int release_step)
      : lift_height_(lift_height), release_step_(release_step) {}

  void reset() override { step_ = 0; }

  std::vector<double> act(std::span<const double> obs,
                          std::span<const double>) override {
    ++step_;
    const std::array<double, 3> gripper{obs[0], obs[1], obs[2]};
    const std::array<double, 3> object{obs[3], obs[4], obs[5]};
    const bool grasped = obs[12] > 0.5;

    if (step_ >= release_step_) {
      return {0.0, 0.0, 1.0, -1.0};  // let go and drift up
    }
    if (!grasped) {
      const double d = dist3(gripper, object);
      std::vector<double> a{clip((object[0] - gripper[0]) / kMaxStep, -1.0, 1.0),
                            clip((object[1] - gripper[1]) / kMaxStep, -1.0, 1.0),
                            clip((object[2] - gripper[2]) / kMaxStep, -1.0, 1.0)};
      a.push_back(d <= 0.8 * kGraspRadius ? 1.0 : -1.0);
      return a;
    }
    return {0.0, 0.0, clip((lift_height_ - gripper[2]) / kMaxStep, -1.0, 1.0),
            1.0};
  }

 private:
  double lift_height_;
  int release_step_;
  int step_ = 0;
};

// Grasps the object and carries it to a fixed point, ignoring the goal.
class LiftCarryPolicy final : public Policy {
 public:
  explicit LiftCarryPolicy(const std::array<double, 3>& target)
      : target_(target) {}

  std::vector<double> act(std::span<const double> obs,
                          std::span<const double>) override {
    const std::array<double, 3> gripper{obs[0], obs[1], obs[2]};
    const std::array<double, 3> object{obs[3], obs[4], obs[5]};
    const bool grasped = obs[12] > 0.5;

    if (!grasped) {
      const double d = dist3(gripper, object);
      std::vector<double> a{clip((object[0] - gripper[0]) / kMaxStep, -1.0, 1.0),
                            clip((object[1] - gripper[1]) / kMaxStep, -1.0, 1.0),
                            clip((object[2] - gripper[2]) / kMaxStep, -1.0, 1.0)};
      a.push_back(d <= 0.8 * kGraspRadius ? 1.0 : -1.0);
      return a;
    }
    std::vector<double> a{clip((target_[0] - gripper[0]) / kMaxStep, -1.0, 1.0),
                          clip((target_[1] - gripper[1]) / kMaxStep, -1.0, 1.0),
                          clip((target_[2] - gripper[2]) / kMaxStep, -1.0, 1.0)};
    a.push_back(1.0);
    return a;
  }

 private:
  std::array<double, 3> target_;
};

}  // namespace

GoalSpace Env::goal_space() const {
  GoalSpace gs;
  gs.project = [this](const ObjectState& s) { return project_goal(s); };
  gs.reward = [this](std::span<const double> achieved,
                     std::span<const double> desired) {
    return compute_reward(achieved, desired);
  };
  return gs;
}

EnergyParams Env::energy_params() const {
  EnergyParams p;
  p.dt = spec().dt;
  p.transition_cap = spec().transition_cap;
  return p;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "planar-push") return std::make_unique<PlanarPushEnv>();
  if (name == "planar-pick-place")
    return std::make_unique<PlanarPickPlaceEnv>();
  if (name == "rotate-block") return std::make_unique<RotateBlockEnv>();
  throw ConfigError("unknown environment: " + name);
}

std::vector<std::string> env_names() {
  return {"planar-push", "planar-pick-place", "rotate-block"};
}

std::unique_ptr<Policy> make_noop_policy(int action_dim) {
  return std::make_unique<NoopPolicy>(action_dim);
}

std::unique_ptr<Policy> make_lift_drop_policy(double lift_height,
                                              int release_step) {
  return std::make_unique<LiftDropPolicy>(lift_height, release_step);
}

std::unique_ptr<Policy> make_lift_carry_policy(
    const std::array<double, 3>& target) {
  return std::make_unique<LiftCarryPolicy>(target);
}

// ---------------------------------------------------------------------------
// Trace io

struct TraceWriter::Impl {
  std::ofstream out;
};

TraceWriter::TraceWriter(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path);
  if (!impl_->out) throw IoError("cannot open trace for writing: " + path);
}

TraceWriter::~TraceWriter() = default;

void TraceWriter::record(int t, const EnvState& state,
                         std::span<const double> action, double reward,
                         std::span<const double> achieved_goal,
                         std::span<const double> goal) {
  const Quat& q = state.object.orientation;
  nlohmann::json rec{
      {"t", t},
      {"gripper", {state.gripper[0], state.gripper[1], state.gripper[2]}},
      {"object_position",
       {state.object.position[0], state.object.position[1],
        state.object.position[2]}},
      {"object_quaternion", {q.w, q.x, q.y, q.z}},
      {"action", std::vector<double>(action.begin(), action.end())},
      {"reward", reward},
      {"achieved_goal",
       std::vector<double>(achieved_goal.begin(), achieved_goal.end())},
      {"goal", std::vector<double>(goal.begin(), goal.end())}};
  impl_->out << rec.dump() << '\n';
}

std::vector<ObjectState> read_trace_object_states(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace: " + path);
  std::vector<ObjectState> states;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json rec = nlohmann::json::parse(line);
    const auto& p = rec.at("object_position");
    const auto& q = rec.at("object_quaternion");
    states.emplace_back(
        std::array<double, 3>{p.at(0).get<double>(), p.at(1).get<double>(),
                              p.at(2).get<double>()},
        Quat{q.at(0).get<double>(), q.at(1).get<double>(),
             q.at(2).get<double>(), q.at(3).get<double>()});
  }
  return states;
}

}  // namespace ebrl
