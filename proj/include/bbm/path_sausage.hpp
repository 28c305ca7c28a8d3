#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bbm/bbm.hpp"
#include "bbm/point_cloud.hpp"
#include "bbm/spatial_hash.hpp"

namespace bbm {

/// Non-owning list of path segments between consecutive stored samples.
/// Each segment belongs to an owner (a particle or a single Brownian path)
/// whose key seeds the bridge refinement of that owner's segments.
struct PathSet {
  struct Segment {
    std::uint32_t a = 0;      // index of the first sample in times/coords
    std::uint32_t owner = 0;  // index into owner_keys
    std::uint32_t index = 0;  // position of the segment within its owner's path
    bool single = false;      // one-sample path: a point, not a segment
  };

  int dim = 1;
  std::span<const double> times;
  std::span<const double> coords;
  std::vector<Segment> segments;
  std::vector<std::uint64_t> owner_keys;

  std::span<const double> point(std::size_t i) const {
    return coords.subspan(i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
  }
  /// Bounding box of every sample referenced by a segment.
  Box bbox() const;
};

/// Segments of all stored paths over [0, t]; t must be a stored grid time.
/// The run must outlive the result.
PathSet path_set(const BbmRun& run, double t, std::uint64_t bridge_seed);

/// Segments of a single sampled path. The path must outlive the result.
PathSet path_set(const PathView& path, std::uint64_t bridge_seed);

/// Sausage of a sampled path set, answered with optional Brownian-bridge
/// refinement. With resolution > 0 every segment is split recursively at
/// Levy midpoints (drawn deterministically from the owner key, the segment
/// index and the node index) until its RMS step sqrt(d*delta) is at most the
/// resolution, so all queries see one consistent fine skeleton without it
/// ever being stored. Pieces whose chord is farther than
/// outer + k_sigma*sqrt(d*delta) from the query are skipped; the chance that
/// such a piece still reaches the ball is below 2d*exp(-2*k_sigma^2).
///
/// classify() reports 2 when some skeleton point lies within the inner
/// radius, 1 when one lies within the outer radius only, else 0.
class PathSausage {
 public:
  struct Options {
    double radius = 0.0;
    double outer_radius = 0.0;
    /// Target RMS step of the refined skeleton; 0 disables refinement.
    double resolution = 0.0;
    double k_sigma = 3.0;
  };

  PathSausage(PathSet set, Options options);

  int dimension() const { return set_.dim; }
  double radius() const { return opt_.radius; }
  double outer_radius() const { return opt_.outer_radius; }
  const PathSet& paths() const { return set_; }

  /// Sample-point bounding box inflated by outer + k_sigma * largest RMS step.
  Box sampling_box() const;

  int classify(std::span<const double> p) const;
  bool contains(std::span<const double> p) const { return classify(p) == 2; }

 private:
  int classify_segment(std::span<const double> p, const PathSet::Segment& s) const;
  int refine(std::span<const double> p, const double* x0, const double* x1, double delta,
             std::uint64_t key, std::uint64_t node) const;

  PathSet set_;
  Options opt_;
  double max_step_ = 0.0;  // largest sqrt(d*delta) over segments
  // Segments are bucketed by chord midpoint; long chords go to overflow_
  // and are checked on every query. Small sets skip the index entirely.
  bool indexed_ = false;
  double cell_size_ = 1.0;
  std::vector<CellCoord> offsets_;
  CellIndex index_;
  std::vector<std::uint32_t> overflow_;
};

/// Length of the union of [min - r, max + r] over the segment endpoints.
/// In d = 1 a continuous path covers each chord, so this is the exact
/// sausage length of the piecewise-linear interpolant, an inner bound for
/// the continuous sausage.
double chord_hull_length(const PathSet& set, double radius);

}  // namespace bbm
