#include "ebrl/energy.hpp"

#include <algorithm>
#include <cmath>

namespace ebrl {

namespace {

bool all_finite(const std::array<double, 3>& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

}  // namespace

double Quat::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

bool Quat::finite() const {
  return std::isfinite(w) && std::isfinite(x) && std::isfinite(y) &&
         std::isfinite(z);
}

Quat Quat::normalized() const {
  if (!finite()) throw InvalidStateError("quaternion has non-finite component");
  const double n = norm();
  if (n < 1e-12) throw InvalidStateError("quaternion norm too small");
  return {w / n, x / n, y / n, z / n};
}

ObjectState::ObjectState(const std::array<double, 3>& pos, const Quat& q)
    : position(pos), orientation(q.normalized()) {
  if (!all_finite(position))
    throw InvalidStateError("object position has non-finite component");
}

void EnergyParams::validate() const {
  const bool ok = mass > 0.0 && gravity > 0.0 && inertia_x > 0.0 &&
                  inertia_y > 0.0 && inertia_z > 0.0 && dt > 0.0 &&
                  transition_cap > 0.0;
  if (!ok) throw InvalidStateError("energy parameters must be strictly positive");
}

double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

EulerAngles quat_to_euler(const Quat& q_in) {
  if (!q_in.finite())
    throw InvalidStateError("quaternion has non-finite component");
  const double n = q_in.norm();
  if (std::abs(n - 1.0) > 1e-3)
    throw InvalidStateError("quaternion norm outside tolerance");
  const Quat q = q_in.normalized();

  const double sinp = std::clamp(2.0 * (q.w * q.y - q.z * q.x), -1.0, 1.0);
  EulerAngles e;
  e.roll = std::atan2(2.0 * (q.w * q.x + q.y * q.z),
                      1.0 - 2.0 * (q.x * q.x + q.y * q.y));
  e.pitch = std::asin(sinp);
  e.yaw = std::atan2(2.0 * (q.w * q.z + q.x * q.y),
                     1.0 - 2.0 * (q.y * q.y + q.z * q.z));
  return e;
}

double potential_energy(const ObjectState& s, const EnergyParams& p) {
  return p.mass * p.gravity * s.position[2];
}

double kinetic_energy(const ObjectState& prev, const ObjectState& cur,
                      const EnergyParams& p) {
  const double dx = cur.position[0] - prev.position[0];
  const double dy = cur.position[1] - prev.position[1];
  const double dz = cur.position[2] - prev.position[2];
  return p.mass * (dx * dx + dy * dy + dz * dz) / (2.0 * p.dt * p.dt);
}

double rotational_energy(const ObjectState& prev, const ObjectState& cur,
                         const EnergyParams& p) {
  const EulerAngles a = quat_to_euler(prev.orientation);
  const EulerAngles b = quat_to_euler(cur.orientation);
  const double droll = wrap_angle(b.roll - a.roll);
  const double dpitch = wrap_angle(b.pitch - a.pitch);
  const double dyaw = wrap_angle(b.yaw - a.yaw);
  return (p.inertia_x * droll * droll + p.inertia_y * dpitch * dpitch +
          p.inertia_z * dyaw * dyaw) /
         (2.0 * p.dt * p.dt);
}

double total_energy(const ObjectState& prev, const ObjectState& cur,
                    const EnergyParams& p) {
  return potential_energy(cur, p) + kinetic_energy(prev, cur, p) +
         rotational_energy(prev, cur, p);
}

double transition_energy(double prev_total, double cur_total, double cap) {
  if (cap <= 0.0) throw InvalidStateError("transition cap must be positive");
  return std::clamp(cur_total - prev_total, 0.0, cap);
}

std::vector<double> state_totals(std::span<const ObjectState> states,
                                 const EnergyParams& p) {
  std::vector<double> totals;
  totals.reserve(states.size());
  for (std::size_t t = 0; t < states.size(); ++t) {
    if (t == 0) {
      // No velocity before the first sample: potential term only.
      totals.push_back(potential_energy(states[0], p));
    } else {
      totals.push_back(total_energy(states[t - 1], states[t], p));
    }
  }
  return totals;
}

double trajectory_energy(std::span<const ObjectState> states,
                         const EnergyParams& p) {
  if (states.size() < 2)
    throw InvalidTrajectoryError("trajectory needs at least two states");
  p.validate();
  const std::vector<double> totals = state_totals(states, p);
  double sum = 0.0;
  for (std::size_t t = 1; t < totals.size(); ++t) {
    sum += transition_energy(totals[t - 1], totals[t], p.transition_cap);
  }
  return sum;
}

}  // namespace ebrl
