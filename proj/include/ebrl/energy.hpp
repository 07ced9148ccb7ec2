#pragma once

// Mechanical energy of a manipulated object, computed from its logged
// position/orientation trajectory. Per-step transition energies count only
// increases (work done on the object) and are clipped at a configurable cap;
// the trajectory energy is their sum.

#include <array>
#include <span>
#include <vector>

#include "ebrl/errors.hpp"

namespace ebrl {

// Scalar-first unit quaternion (w, x, y, z).
struct Quat {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  Quat normalized() const;  // InvalidStateError on non-finite or ~zero norm
  bool finite() const;
};

// Position + orientation of the object at one timestep. The achieved-goal
// state everything in this module operates on.
struct ObjectState {
  ObjectState() = default;
  // Normalizes the orientation; throws InvalidStateError on non-finite input.
  ObjectState(const std::array<double, 3>& position, const Quat& orientation);

  std::array<double, 3> position{0.0, 0.0, 0.0};
  Quat orientation;
};

struct EulerAngles {
  double roll = 0.0;   // about x, [-pi, pi]
  double pitch = 0.0;  // about y, [-pi/2, pi/2]
  double yaw = 0.0;    // about z, [-pi, pi]
};

struct EnergyParams {
  double mass = 1.0;
  double gravity = 9.81;
  double inertia_x = 1.0;
  double inertia_y = 1.0;
  double inertia_z = 1.0;
  double dt = 0.04;             // seconds between consecutive states
  double transition_cap = 0.5;  // per-step clip ceiling, > 0

  void validate() const;  // InvalidStateError unless all fields > 0
};

// Wraps an angle into [-pi, pi].
double wrap_angle(double a);

// ZYX Euler angles from a scalar-first quaternion. Renormalizes internally
// (accepts norm within 1e-3 of 1); the asin argument is clamped to [-1, 1] so
// gimbal-lock inputs yield pitch = +-pi/2 instead of NaN. At exact gimbal
// lock roll and yaw are not unique; the degenerate atan2 branches are
// returned as-is.
EulerAngles quat_to_euler(const Quat& q);

// m * g * z. Sign follows z.
double potential_energy(const ObjectState& s, const EnergyParams& p);

// Linear kinetic energy with velocities finite-differenced from prev -> cur.
double kinetic_energy(const ObjectState& prev, const ObjectState& cur,
                      const EnergyParams& p);

// Rotational kinetic energy from per-axis Euler angle rates. Angle
// differences are wrapped into [-pi, pi] before dividing by dt, so a roll
// from pi - eps to -pi + eps counts as 2*eps, not ~2*pi.
double rotational_energy(const ObjectState& prev, const ObjectState& cur,
                         const EnergyParams& p);

// Potential + kinetic + rotational, evaluated at cur with prev -> cur
// velocities.
double total_energy(const ObjectState& prev, const ObjectState& cur,
                    const EnergyParams& p);

// clip(cur_total - prev_total, 0, cap). Only positive energy changes count:
// an increase is work done on the object, a decrease is not.
double transition_energy(double prev_total, double cur_total, double cap);

// Per-state totals for a state sequence. totals[0] is potential-only (the
// object is taken to be at rest before the first sample); totals[t] for
// t >= 1 uses states[t-1] -> states[t] velocities.
std::vector<double> state_totals(std::span<const ObjectState> states,
                                 const EnergyParams& p);

// Sum of clipped per-step transition energies over the sequence.
// Requires at least two states (InvalidTrajectoryError otherwise).
double trajectory_energy(std::span<const ObjectState> states,
                         const EnergyParams& p);

}  // namespace ebrl
