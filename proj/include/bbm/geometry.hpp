#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bbm/parallel.hpp"
#include "bbm/point_cloud.hpp"
#include "bbm/rng.hpp"
#include "bbm/spatial_hash.hpp"

namespace bbm {

enum class VolumeMethod { Exact1d, Voxel, Mc, McBall };

std::string_view to_string(VolumeMethod m);
VolumeMethod parse_volume_method(std::string_view s);

struct VolumeEstimate {
  double value = 0.0;
  double std_error = 0.0;  // 0 for exact estimators, a bound proxy for voxels
  std::int64_t n_samples = 0;
  VolumeMethod method = VolumeMethod::Mc;
};

/// Raised when a deterministic estimator would need more memory than allowed.
class GeometryBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Union of closed balls of a common radius around the centers of a cloud.
/// An optional larger outer radius turns it into a nested pair of unions,
/// both answered by one scan (see classify). The cloud must outlive this.
class BallUnion {
 public:
  BallUnion(const PointCloud& cloud, double radius, std::optional<double> outer = std::nullopt);

  int dimension() const { return cloud_->dimension(); }
  double radius() const { return inner_; }
  double outer_radius() const { return outer_; }
  const PointCloud& cloud() const { return *cloud_; }

  /// Bounding box of the centers inflated by the outer radius.
  Box sampling_box() const;

  bool contains(std::span<const double> p) const { return classify(p) == 2; }

  /// 2 if p lies in the inner union, 1 if only in the outer one, else 0.
  int classify(std::span<const double> p) const;

  /// Number of centers with index < limit that lie within the inner radius.
  std::size_t multiplicity(std::span<const double> p, std::size_t limit) const;

 private:
  const PointCloud* cloud_;
  double inner_;
  double outer_;
  std::optional<SpatialHash> hash_;
};

/// Uniform point in the closed ball B(center, rho).
Point uniform_in_ball(stats::CounterRng& rng, std::span<const double> center, double rho);

inline constexpr std::int64_t kMcChunk = 4096;

/// Hit-or-miss Monte Carlo volume of any set exposing dimension(),
/// sampling_box() and contains(). Samples are drawn in fixed chunks whose
/// seeds are derived from (seed, chunk), so the value does not depend on the
/// number of workers.
template <class Set>
VolumeEstimate volume_mc(const Set& set, std::int64_t n_samples, std::uint64_t seed,
                         unsigned workers = 0) {
  if (n_samples < 1000) throw std::invalid_argument("volume_mc: n_samples must be >= 1000");
  VolumeEstimate est;
  est.method = VolumeMethod::Mc;
  est.n_samples = n_samples;
  const Box box = set.sampling_box();
  if (box.is_empty()) return est;
  const int dim = set.dimension();
  const std::size_t chunks = static_cast<std::size_t>((n_samples + kMcChunk - 1) / kMcChunk);
  std::vector<std::int64_t> hits(chunks, 0);
  parallel_for(chunks, workers, [&](std::size_t c) {
    stats::CounterRng rng(stats::derive_stream(seed, {c}));
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMcChunk;
    const std::int64_t end = std::min(n_samples, begin + kMcChunk);
    Point p{};
    std::int64_t h = 0;
    for (std::int64_t s = begin; s < end; ++s) {
      for (int i = 0; i < dim; ++i) p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
      if (set.contains(std::span<const double>(p.data(), static_cast<std::size_t>(dim)))) ++h;
    }
    hits[c] = h;
  });
  std::int64_t total = 0;
  for (auto h : hits) total += h;
  const double frac = static_cast<double>(total) / static_cast<double>(n_samples);
  const double vol = box.volume();
  est.value = frac * vol;
  est.std_error = vol * std::sqrt(frac * (1.0 - frac) / static_cast<double>(n_samples));
  return est;
}

struct BracketEstimate {
  VolumeEstimate inner;
  VolumeEstimate outer;
};

/// Same sampler as volume_mc, applied to a nested pair of sets through
/// classify(). Both estimates use the same sample points, so the inner value
/// never exceeds the outer one.
template <class Set>
BracketEstimate volume_mc_bracket(const Set& set, std::int64_t n_samples, std::uint64_t seed,
                                  unsigned workers = 0) {
  if (n_samples < 1000) throw std::invalid_argument("volume_mc: n_samples must be >= 1000");
  BracketEstimate est;
  est.inner.n_samples = est.outer.n_samples = n_samples;
  const Box box = set.sampling_box();
  if (box.is_empty()) return est;
  const int dim = set.dimension();
  const std::size_t chunks = static_cast<std::size_t>((n_samples + kMcChunk - 1) / kMcChunk);
  std::vector<std::pair<std::int64_t, std::int64_t>> hits(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    stats::CounterRng rng(stats::derive_stream(seed, {c}));
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMcChunk;
    const std::int64_t end = std::min(n_samples, begin + kMcChunk);
    Point p{};
    std::int64_t in = 0, out = 0;
    for (std::int64_t s = begin; s < end; ++s) {
      for (int i = 0; i < dim; ++i) p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * rng.uniform();
      const int level = set.classify(std::span<const double>(p.data(), static_cast<std::size_t>(dim)));
      if (level >= 1) ++out;
      if (level == 2) ++in;
    }
    hits[c] = {in, out};
  });
  std::int64_t in = 0, out = 0;
  for (auto [a, b] : hits) {
    in += a;
    out += b;
  }
  const double vol = box.volume();
  auto fill = [&](VolumeEstimate& e, std::int64_t h) {
    const double f = static_cast<double>(h) / static_cast<double>(n_samples);
    e.value = f * vol;
    e.std_error = vol * std::sqrt(f * (1.0 - f) / static_cast<double>(n_samples));
  };
  fill(est.inner, in);
  fill(est.outer, out);
  return est;
}

struct CoverageProbe {
  bool all_hit = false;
  double miss_fraction = 1.0;
  std::int64_t n_probes = 0;
};

/// Probes n uniform points of B(center, rho) for membership in the set.
template <class Set>
CoverageProbe covers_ball(const Set& set, std::span<const double> center, double rho,
                          std::int64_t n_probes, std::uint64_t seed, unsigned workers = 0) {
  if (!(rho > 0.0)) throw std::invalid_argument("covers_ball: rho must be positive");
  if (n_probes < 1) throw std::invalid_argument("covers_ball: n_probes must be >= 1");
  const std::size_t chunks = static_cast<std::size_t>((n_probes + kMcChunk - 1) / kMcChunk);
  std::vector<std::int64_t> misses(chunks, 0);
  const auto dim = static_cast<std::size_t>(set.dimension());
  parallel_for(chunks, workers, [&](std::size_t c) {
    stats::CounterRng rng(stats::derive_stream(seed, {c}));
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMcChunk;
    const std::int64_t end = std::min(n_probes, begin + kMcChunk);
    std::int64_t m = 0;
    for (std::int64_t s = begin; s < end; ++s) {
      const Point p = uniform_in_ball(rng, center, rho);
      if (!set.contains(std::span<const double>(p.data(), dim))) ++m;
    }
    misses[c] = m;
  });
  std::int64_t total = 0;
  for (auto m : misses) total += m;
  CoverageProbe probe;
  probe.n_probes = n_probes;
  probe.all_hit = total == 0;
  probe.miss_fraction = static_cast<double>(total) / static_cast<double>(n_probes);
  return probe;
}

// --- Point-cloud estimators -------------------------------------------------

/// Exact length of the union of [c - r, c + r] over the centers (d = 1).
VolumeEstimate volume_exact_1d(const PointCloud& cloud, double radius);

/// Exact length of a union of closed intervals.
double interval_union_length(std::vector<std::pair<double, double>> intervals);

/// Counts voxels whose centers fall in the union. The reported std_error is
/// half the boundary-voxel volume, a proxy for the O(surface * voxel) bound.
VolumeEstimate volume_voxel(const PointCloud& cloud, double radius, double voxel,
                            std::uint64_t max_voxels = std::uint64_t{1} << 30);

/// Hit-or-miss Monte Carlo over the bounding box inflated by the radius.
VolumeEstimate volume_mc(const PointCloud& cloud, double radius, std::int64_t n_samples,
                         std::uint64_t seed, unsigned workers = 0);

/// Multiplicity-weighted Monte Carlo: pick a ball uniformly, a point in it
/// uniformly, and average 1/(number of balls covering the point). Unbiased
/// for the union volume and far less noisy than volume_mc for thin unions
/// such as a Wiener sausage. Only the first `prefix` centers are used.
VolumeEstimate volume_mc_balls(const BallUnion& set, std::size_t prefix, std::int64_t n_samples,
                               std::uint64_t seed, unsigned workers = 0);

CoverageProbe covers_ball(const PointCloud& cloud, double radius, std::span<const double> center,
                          double rho, std::int64_t n_probes, std::uint64_t seed,
                          unsigned workers = 0);

}  // namespace bbm
