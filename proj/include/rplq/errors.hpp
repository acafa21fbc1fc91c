#pragma once

#include <stdexcept>
#include <string>

namespace rplq {

// Base class for all toolkit errors so callers can catch the family at once.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed problem files, dimension mismatches, invalid configuration.
struct ConfigError : Error {
  using Error::Error;
};

// A policy (or a candidate produced during descent) fails the mean-square
// stability test rho(F_L) < 1.
struct NotAdmissibleError : Error {
  explicit NotAdmissibleError(double rho)
      : Error("policy is not mean-square stabilizing: rho(F_L) = " +
              std::to_string(rho)),
        rho_value(rho) {}
  double rho_value;
};

// Fixed-point iterations (Riccati, etc.) hit the iteration cap before the
// tolerance was met.
struct NoConvergenceError : Error {
  using Error::Error;
};

// A descent step could not be accepted (candidate inadmissible under a
// non-adaptive rule, or backtracking exhausted).
struct StepRejectedError : Error {
  using Error::Error;
};

// A simulated trajectory blew past the overflow guard; carries the index of
// the offending rollout so the failure is reproducible.
struct DivergedRolloutError : Error {
  DivergedRolloutError(std::size_t index, int step)
      : Error("rollout " + std::to_string(index) + " diverged at step " +
              std::to_string(step)),
        rollout_index(index),
        step(step) {}
  std::size_t rollout_index;
  int step;
};

}  // namespace rplq
