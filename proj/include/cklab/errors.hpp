#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cklab {

/// Base class for all recoverable cklab errors.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A matrix that must be positive-definite (a metric) is not.
struct NonPositiveMetric : Error {
  explicit NonPositiveMetric(const std::string& what) : Error(what) {}
};

/// A field flagged metric-intent lost pointwise positivity.
struct LostPositivity : Error {
  std::size_t grid_index;
  LostPositivity(const std::string& what, std::size_t idx)
      : Error(what + " (grid index " + std::to_string(idx) + ")"),
        grid_index(idx) {}
};

struct LostConvexity : Error {
  explicit LostConvexity(const std::string& what) : Error(what) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& what) : Error(what) {}
};

struct DivisionByZero : Error {
  explicit DivisionByZero(const std::string& what) : Error(what) {}
};

struct VanishingComplexifiedVolume : Error {
  explicit VanishingComplexifiedVolume(const std::string& what) : Error(what) {}
};

struct NonPositiveChi : Error {
  explicit NonPositiveChi(const std::string& what) : Error(what) {}
};

struct PhaseOutOfRange : Error {
  explicit PhaseOutOfRange(const std::string& what) : Error(what) {}
};

struct DegeneratePhase : Error {
  explicit DegeneratePhase(const std::string& what) : Error(what) {}
};

struct VolumeMismatch : Error {
  explicit VolumeMismatch(const std::string& what) : Error(what) {}
};

struct NotDHYMSolution : Error {
  explicit NotDHYMSolution(const std::string& what) : Error(what) {}
};

struct EpsilonTooSmall : Error {
  explicit EpsilonTooSmall(const std::string& what) : Error(what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace cklab
