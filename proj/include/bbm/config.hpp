#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bbm {

/// Invalid simulation or experiment parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A run would store more path samples than SimConfig::max_points allows.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, double points)
      : std::runtime_error(what), points_(points) {}
  /// The estimated (pre-flight) or actual (in-flight) number of points.
  double points() const noexcept { return points_; }

 private:
  double points_;
};

/// How the continuous path is resolved when sausages are measured.
enum class PathResolution {
  /// The stored dt grid must itself satisfy sqrt(d dt) <= eta r(T).
  Grid,
  /// The stored grid is coarse; Brownian bridges are refined on demand
  /// until the local RMS step is at most eta times the query radius.
  Bridge,
};

struct SimConfig {
  int dimension = 2;
  double beta = 1.0;
  double r0 = 1.0;
  double k = 0.0;
  double dt = 0.01;
  double horizon = 1.0;
  std::uint64_t seed = 1;
  std::uint64_t max_points = 5'000'000;
  double eta = 0.25;
  PathResolution resolution = PathResolution::Grid;

  /// r(t) = r0 e^{-beta k t}.
  double radius_at(double t) const;

  /// Mean number of stored samples, (e^{beta T} - 1) / (beta dt).
  double expected_points() const;

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;
};

}  // namespace bbm
