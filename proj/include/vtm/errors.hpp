#pragma once

#include <stdexcept>
#include <string>

namespace vtm {

/// Inputs whose sizes do not agree with the model or with each other.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must have full rank (constraint Jacobian, saddle system,
/// partition block) was found rank deficient.
class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model, schedule or scenario. Carries the offending field when
/// one is known.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values or a failed regularity check during a run.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_size(long actual, long expected, const char* what) {
  if (actual != expected) {
    throw DimensionError(std::string(what) + ": expected size " + std::to_string(expected) +
                         ", got " + std::to_string(actual));
  }
}

}  // namespace detail
}  // namespace vtm
