#pragma once

#include <span>
#include <vector>

namespace ebrl {

// A goal-conditioned policy: maps (observation, goal) to an action.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<double> act(std::span<const double> observation,
                                  std::span<const double> goal) = 0;
  // Called at episode boundaries; stateful scripted policies reset phases.
  virtual void reset() {}
};

}  // namespace ebrl
