#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bbm/config.hpp"
#include "bbm/point_cloud.hpp"

namespace bbm {

struct Particle {
  std::uint32_t id = 0;
  std::optional<std::uint32_t> parent;
  double birth_time = 0.0;
  /// Branching time, or the horizon when the particle is still alive there.
  double death_time = 0.0;
  bool censored = false;
  std::size_t first_sample = 0;
  std::size_t sample_count = 0;

  bool operator==(const Particle&) const = default;
};

/// Read-only view of one sampled trajectory.
struct PathView {
  int dim = 1;
  std::span<const double> times;
  std::span<const double> coords;

  std::size_t size() const { return times.size(); }
  std::span<const double> point(std::size_t i) const {
    return coords.subspan(i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
  }
};

/// A realised strictly dyadic BBM on [0, horizon]. Particle ids follow birth
/// order, so a parent always precedes its children. Immutable once built.
class BbmRun {
 public:
  BbmRun(SimConfig config, std::vector<Particle> particles, std::vector<double> times,
         std::vector<double> coords);

  const SimConfig& config() const { return config_; }
  int dimension() const { return config_.dimension; }
  std::span<const Particle> particles() const { return particles_; }
  const Particle& particle(std::uint32_t id) const { return particles_.at(id); }
  PathView path(std::uint32_t id) const;
  std::size_t total_points() const { return times_.size(); }
  std::span<const double> all_times() const { return times_; }
  std::span<const double> all_coords() const { return coords_; }

  /// birth <= t < death, or t == death == horizon for censored particles.
  bool is_alive(const Particle& p, double t) const;
  std::vector<std::uint32_t> alive(double t) const;

  /// The canonical stored time for t: the horizon, or k*dt for integer k.
  /// Throws ConfigError when t is neither.
  double grid_time(double t) const;
  bool on_grid(double t) const;

  bool operator==(const BbmRun&) const;

 private:
  SimConfig config_;
  std::vector<Particle> particles_;
  std::vector<double> times_;
  std::vector<double> coords_;
};

/// Relative tolerance used when matching times against the sample grid.
double time_tolerance(double t);

/// Sample times of a segment [begin, end] on the dt grid: begin, every k*dt
/// strictly inside, and end (if end > begin).
void grid_sample_times(double begin, double end, double dt, std::vector<double>& out);

/// Simulates the run described by config. Pure function of config; the
/// worker count only changes speed. Throws ConfigError or BudgetExceeded.
BbmRun simulate(const SimConfig& config, unsigned workers = 0);

/// A single Brownian trajectory sampled on the dt grid.
struct BrownianPath {
  int dim = 1;
  std::vector<double> times;
  std::vector<double> coords;

  PathView view() const { return {dim, times, coords}; }
};

BrownianPath simulate_brownian_path(std::span<const double> start, double horizon, double dt,
                                    std::uint64_t key);

std::size_t population_count(const BbmRun& run, double t);

/// Every stored sample with time in [t1, t2].
PointCloud range_skeleton(const BbmRun& run, double t1, double t2);

/// Positions of the particles alive at the stored sample time t.
PointCloud support_snapshot(const BbmRun& run, double t);

/// Largest Euclidean norm over range_skeleton(run, 0, t).
double max_displacement(const BbmRun& run, double t);

/// Number of particles alive at time t inside the closed ball B(center, radius).
std::size_t mass_in_ball(const BbmRun& run, double t, std::span<const double> center, double radius);

}  // namespace bbm
