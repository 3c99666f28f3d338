#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace llbar {

/// Invalid configuration or violated precondition on user-supplied input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration does not satisfy the hypotheses a diagnostic relies on.
class HypothesisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite state produced by a time step.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::uint64_t step, double t)
      : std::runtime_error("numerical blow-up at step " + std::to_string(step) +
                           " (t = " + std::to_string(t) + ")"),
        step_(step),
        t_(t) {}

  std::uint64_t step() const noexcept { return step_; }
  double time() const noexcept { return t_; }

 private:
  std::uint64_t step_;
  double t_;
};

}  // namespace llbar
