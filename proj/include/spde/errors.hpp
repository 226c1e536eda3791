#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spde {

/// A trajectory or path solve produced a non-finite coefficient.
/// Carries the index of the offending step; no clamping is ever applied.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Pointwise evaluation of a scalar nonlinearity returned a non-finite value.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(double grid_point, const std::string& what)
      : std::runtime_error(what), grid_point_(grid_point) {}
  double grid_point() const { return grid_point_; }

 private:
  double grid_point_;
};

/// Invalid or inconsistent run configuration (bad field, incompatible grids).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spde
