#pragma once

#include <stdexcept>
#include <string>

namespace ebrl {

// Domain error taxonomy. Everything derives from std exceptions so callers
// that don't care about the distinction can catch std::exception.

struct InvalidStateError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidTrajectoryError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidEpisodeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct EmptyBufferError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoFutureGoalError : std::logic_error {
  using std::logic_error::logic_error;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidPriorityError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct TrainingDivergedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UndefinedCorrelationError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ebrl
