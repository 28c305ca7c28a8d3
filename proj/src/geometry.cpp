#include "bbm/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "bbm/theory.hpp"

namespace bbm {

std::string_view to_string(VolumeMethod m) {
  switch (m) {
    case VolumeMethod::Exact1d: return "exact1d";
    case VolumeMethod::Voxel: return "voxel";
    case VolumeMethod::Mc: return "mc";
    case VolumeMethod::McBall: return "mcball";
  }
  return "?";
}

VolumeMethod parse_volume_method(std::string_view s) {
  if (s == "exact1d") return VolumeMethod::Exact1d;
  if (s == "voxel") return VolumeMethod::Voxel;
  if (s == "mc") return VolumeMethod::Mc;
  if (s == "mcball") return VolumeMethod::McBall;
  throw std::invalid_argument("unknown volume estimator '" + std::string(s) + "'");
}

BallUnion::BallUnion(const PointCloud& cloud, double radius, std::optional<double> outer)
    : cloud_(&cloud), inner_(radius), outer_(outer.value_or(radius)) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("BallUnion: radius must be finite and >= 0");
  }
  if (!(outer_ >= inner_) || !std::isfinite(outer_)) {
    throw std::invalid_argument("BallUnion: outer radius must be >= inner radius");
  }
  hash_.emplace(cloud, outer_ > 0.0 ? outer_ : 1.0);
}

Box BallUnion::sampling_box() const { return cloud_->bbox().inflated(outer_); }

int BallUnion::classify(std::span<const double> p) const {
  const double in2 = inner_ * inner_;
  const double out2 = outer_ * outer_;
  int level = 0;
  hash_->scan(p, [&](std::uint32_t idx) {
    const double d2 = squared_distance(p, cloud_->point(idx));
    if (d2 <= in2) {
      level = 2;
      return true;
    }
    if (d2 <= out2) level = 1;
    return false;
  });
  return level;
}

std::size_t BallUnion::multiplicity(std::span<const double> p, std::size_t limit) const {
  const double in2 = inner_ * inner_;
  std::size_t count = 0;
  hash_->scan(p, [&](std::uint32_t idx) {
    if (idx < limit && squared_distance(p, cloud_->point(idx)) <= in2) ++count;
    return false;
  });
  return count;
}

Point uniform_in_ball(stats::CounterRng& rng, std::span<const double> center, double rho) {
  const std::size_t dim = center.size();
  Point p{};
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      p[i] = rng.normal();
      norm2 += p[i] * p[i];
    }
  } while (norm2 == 0.0);
  const double scale = rho * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim)) / std::sqrt(norm2);
  for (std::size_t i = 0; i < dim; ++i) p[i] = center[i] + scale * p[i];
  return p;
}

double interval_union_length(std::vector<std::pair<double, double>> intervals) {
  if (intervals.empty()) return 0.0;
  std::sort(intervals.begin(), intervals.end());
  double total = 0.0;
  double lo = intervals.front().first;
  double hi = intervals.front().second;
  for (const auto& [a, b] : intervals) {
    if (a > hi) {
      total += hi - lo;
      lo = a;
      hi = b;
    } else {
      hi = std::max(hi, b);
    }
  }
  return total + (hi - lo);
}

VolumeEstimate volume_exact_1d(const PointCloud& cloud, double radius) {
  if (cloud.dimension() != 1) throw std::invalid_argument("volume_exact_1d: cloud must be 1-dimensional");
  if (!(radius > 0.0)) throw std::invalid_argument("volume_exact_1d: radius must be positive");
  std::vector<std::pair<double, double>> iv;
  iv.reserve(cloud.size());
  for (double c : cloud.coords()) iv.emplace_back(c - radius, c + radius);
  VolumeEstimate est;
  est.method = VolumeMethod::Exact1d;
  est.value = interval_union_length(std::move(iv));
  est.n_samples = static_cast<std::int64_t>(cloud.size());
  return est;
}

VolumeEstimate volume_voxel(const PointCloud& cloud, double radius, double voxel,
                            std::uint64_t max_voxels) {
  if (!(radius > 0.0)) throw std::invalid_argument("volume_voxel: radius must be positive");
  if (!(voxel > 0.0) || voxel > radius / 4.0) {
    throw std::invalid_argument("volume_voxel: voxel too coarse (need voxel <= radius/4)");
  }
  VolumeEstimate est;
  est.method = VolumeMethod::Voxel;
  if (cloud.empty()) return est;

  const int dim = cloud.dimension();
  const Box box = cloud.bbox().inflated(radius);
  std::array<std::int64_t, kMaxDim> n{};
  std::array<std::int64_t, kMaxDim> stride{};
  std::uint64_t total = 1;
  for (int i = 0; i < dim; ++i) {
    n[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((box.hi[i] - box.lo[i]) / voxel)));
    stride[i] = static_cast<std::int64_t>(total);
    if (static_cast<double>(total) * static_cast<double>(n[i]) > static_cast<double>(max_voxels)) {
      throw GeometryBudgetError("volume_voxel: grid exceeds the voxel budget");
    }
    total *= static_cast<std::uint64_t>(n[i]);
  }
  std::vector<std::uint64_t> bits((total + 63) / 64, 0);
  auto set_bit = [&](std::uint64_t i) { bits[i >> 6] |= std::uint64_t{1} << (i & 63); };
  auto get_bit = [&](std::uint64_t i) { return (bits[i >> 6] >> (i & 63)) & 1u; };

  const double r2 = radius * radius;
  auto centre_of = [&](int axis, std::int64_t j) { return box.lo[axis] + (static_cast<double>(j) + 0.5) * voxel; };
  // Voxel index range along an axis whose centers lie within `reach` of c.
  auto range = [&](int axis, double c, double reach, std::int64_t& a, std::int64_t& b) {
    a = static_cast<std::int64_t>(std::ceil((c - reach - box.lo[axis]) / voxel - 0.5));
    b = static_cast<std::int64_t>(std::floor((c + reach - box.lo[axis]) / voxel - 0.5));
    a = std::max<std::int64_t>(a, 0);
    b = std::min<std::int64_t>(b, n[axis] - 1);
  };

  for (std::size_t k = 0; k < cloud.size(); ++k) {
    const auto c = cloud.point(k);
    // Odometer over axes 1..dim-1; axis 0 is filled as a contiguous run.
    std::array<std::int64_t, kMaxDim> lo{}, hi{}, j{};
    bool empty = false;
    for (int i = 1; i < dim; ++i) {
      range(i, c[i], radius, lo[i], hi[i]);
      if (lo[i] > hi[i]) empty = true;
      j[i] = lo[i];
    }
    if (empty) continue;
    for (;;) {
      double partial = 0.0;
      std::int64_t base = 0;
      for (int i = 1; i < dim; ++i) {
        const double d = centre_of(i, j[i]) - c[i];
        partial += d * d;
        base += j[i] * stride[i];
      }
      if (partial <= r2) {
        std::int64_t a = 0, b = 0;
        range(0, c[0], std::sqrt(r2 - partial), a, b);
        for (std::int64_t x = a; x <= b; ++x) {
          // Exact test guards against rounding at the run ends.
          const double d0 = centre_of(0, x) - c[0];
          if (partial + d0 * d0 <= r2) set_bit(static_cast<std::uint64_t>(base + x));
        }
      }
      int axis = 1;
      while (axis < dim) {
        if (++j[axis] <= hi[axis]) break;
        j[axis] = lo[axis];
        ++axis;
      }
      if (axis >= dim) break;
    }
  }

  std::uint64_t inside = 0, boundary = 0;
  for (std::uint64_t w = 0; w < bits.size(); ++w) {
    std::uint64_t word = bits[w];
    inside += static_cast<std::uint64_t>(std::popcount(word));
    while (word) {
      const std::uint64_t idx = (w << 6) + static_cast<std::uint64_t>(std::countr_zero(word));
      word &= word - 1;
      std::uint64_t rest = idx;
      bool edge = false;
      for (int i = 0; i < dim && !edge; ++i) {
        const auto ji = static_cast<std::int64_t>(rest % static_cast<std::uint64_t>(n[i]));
        rest /= static_cast<std::uint64_t>(n[i]);
        if (ji == 0 || ji == n[i] - 1) {
          edge = true;
        } else {
          edge = !get_bit(idx - static_cast<std::uint64_t>(stride[i])) ||
                 !get_bit(idx + static_cast<std::uint64_t>(stride[i]));
        }
      }
      if (edge) ++boundary;
    }
  }
  const double cell = std::pow(voxel, dim);
  est.value = static_cast<double>(inside) * cell;
  est.std_error = 0.5 * static_cast<double>(boundary) * cell;
  est.n_samples = static_cast<std::int64_t>(total);
  return est;
}

VolumeEstimate volume_mc(const PointCloud& cloud, double radius, std::int64_t n_samples,
                         std::uint64_t seed, unsigned workers) {
  const BallUnion set(cloud, radius);
  return volume_mc(set, n_samples, seed, workers);
}

VolumeEstimate volume_mc_balls(const BallUnion& set, std::size_t prefix, std::int64_t n_samples,
                               std::uint64_t seed, unsigned workers) {
  if (n_samples < 1000) throw std::invalid_argument("volume_mc_balls: n_samples must be >= 1000");
  if (!(set.radius() > 0.0)) throw std::invalid_argument("volume_mc_balls: radius must be positive");
  VolumeEstimate est;
  est.method = VolumeMethod::McBall;
  est.n_samples = n_samples;
  const std::size_t m = std::min(prefix, set.cloud().size());
  if (m == 0) return est;
  const double r = set.radius();
  const std::size_t chunks = static_cast<std::size_t>((n_samples + kMcChunk - 1) / kMcChunk);
  std::vector<std::pair<double, double>> sums(chunks);
  parallel_for(chunks, workers, [&](std::size_t c) {
    stats::CounterRng rng(stats::derive_stream(seed, {c}));
    const std::int64_t begin = static_cast<std::int64_t>(c) * kMcChunk;
    const std::int64_t end = std::min(n_samples, begin + kMcChunk);
    double s = 0.0, s2 = 0.0;
    for (std::int64_t k = begin; k < end; ++k) {
      const auto pick = static_cast<std::size_t>(
          (static_cast<unsigned __int128>(rng()) * m) >> 64);
      const Point p = uniform_in_ball(rng, set.cloud().point(pick), r);
      const std::size_t cover = std::max<std::size_t>(
          1, set.multiplicity(std::span<const double>(p.data(), static_cast<std::size_t>(set.dimension())), m));
      const double w = 1.0 / static_cast<double>(cover);
      s += w;
      s2 += w * w;
    }
    sums[c] = {s, s2};
  });
  double s = 0.0, s2 = 0.0;
  for (auto [a, b] : sums) {
    s += a;
    s2 += b;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = s / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  const double scale = static_cast<double>(m) * theory::unit_ball_volume(set.dimension()) *
                       std::pow(r, set.dimension());
  est.value = scale * mean;
  est.std_error = scale * std::sqrt(var / n);
  return est;
}

CoverageProbe covers_ball(const PointCloud& cloud, double radius, std::span<const double> center,
                          double rho, std::int64_t n_probes, std::uint64_t seed, unsigned workers) {
  const BallUnion set(cloud, radius);
  return covers_ball(set, center, rho, n_probes, seed, workers);
}

}  // namespace bbm
