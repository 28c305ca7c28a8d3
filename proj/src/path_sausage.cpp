#include "bbm/path_sausage.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bbm/geometry.hpp"
#include "bbm/rng.hpp"

namespace bbm {

namespace {

constexpr std::size_t kIndexThreshold = 256;
// Node indices double per level; stop well before they overflow.
constexpr std::uint64_t kMaxNode = std::uint64_t{1} << 61;

double chord_distance2(std::span<const double> p, const double* x0, const double* x1) {
  const std::size_t d = p.size();
  double len2 = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double e = x1[i] - x0[i];
    len2 += e * e;
    dot += (p[i] - x0[i]) * e;
  }
  const double u = len2 > 0.0 ? std::clamp(dot / len2, 0.0, 1.0) : 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double q = p[i] - (x0[i] + u * (x1[i] - x0[i]));
    s += q * q;
  }
  return s;
}

double point_distance2(std::span<const double> p, const double* x) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = p[i] - x[i];
    s += q * q;
  }
  return s;
}

void require_index_range(std::size_t n) {
  if (n > 0xffffffffULL) throw std::length_error("path_set: more than 2^32 samples");
}

}  // namespace

Box PathSet::bbox() const {
  Box box = Box::empty(dim);
  for (const Segment& s : segments) {
    box.expand(point(s.a));
    if (!s.single) box.expand(point(s.a + 1));
  }
  return box;
}

PathSet path_set(const BbmRun& run, double t, std::uint64_t bridge_seed) {
  const double tg = run.grid_time(t);
  const double hi = tg + time_tolerance(tg);
  require_index_range(run.total_points());
  PathSet set;
  set.dim = run.dimension();
  set.times = run.all_times();
  set.coords = run.all_coords();
  for (const Particle& p : run.particles()) {
    if (p.birth_time > hi) continue;
    const auto times = run.all_times().subspan(p.first_sample, p.sample_count);
    const auto count = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), hi) - times.begin());
    const auto owner = static_cast<std::uint32_t>(set.owner_keys.size());
    set.owner_keys.push_back(stats::derive_stream(bridge_seed, {p.id}));
    const auto first = static_cast<std::uint32_t>(p.first_sample);
    if (count == 1) {
      set.segments.push_back({first, owner, 0, true});
      continue;
    }
    for (std::uint32_t s = 0; s + 1 < count; ++s) set.segments.push_back({first + s, owner, s, false});
  }
  return set;
}

PathSet path_set(const PathView& path, std::uint64_t bridge_seed) {
  require_index_range(path.size());
  PathSet set;
  set.dim = path.dim;
  set.times = path.times;
  set.coords = path.coords;
  set.owner_keys.push_back(bridge_seed);
  if (path.size() == 1) set.segments.push_back({0, 0, 0, true});
  for (std::uint32_t s = 0; s + 1 < path.size(); ++s) set.segments.push_back({s, 0, s, false});
  return set;
}

PathSausage::PathSausage(PathSet set, Options options) : set_(std::move(set)), opt_(options) {
  if (!(opt_.radius >= 0.0) || !std::isfinite(opt_.radius)) {
    throw std::invalid_argument("PathSausage: radius must be finite and >= 0");
  }
  if (!(opt_.outer_radius >= opt_.radius) || !std::isfinite(opt_.outer_radius)) {
    throw std::invalid_argument("PathSausage: outer radius must be >= radius");
  }
  if (!(opt_.resolution >= 0.0) || !(opt_.k_sigma > 0.0)) {
    throw std::invalid_argument("PathSausage: need resolution >= 0 and k_sigma > 0");
  }
  const auto d = static_cast<double>(set_.dim);
  for (const auto& s : set_.segments) {
    if (!s.single) max_step_ = std::max(max_step_, std::sqrt(d * (set_.times[s.a + 1] - set_.times[s.a])));
  }
  if (set_.segments.size() <= kIndexThreshold) return;

  // A chord within reach of p has its midpoint within reach + half its
  // length; chords up to 2 * max_step long fit in the 3^d neighbourhood.
  const double margin = opt_.outer_radius + (opt_.resolution > 0.0 ? opt_.k_sigma * max_step_ : 0.0);
  cell_size_ = margin + 2.0 * max_step_;
  if (!(cell_size_ > 0.0)) cell_size_ = 1.0;
  indexed_ = true;
  offsets_ = neighbour_offsets(set_.dim);
  std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
  entries.reserve(set_.segments.size());
  Point mid{};
  for (std::uint32_t i = 0; i < set_.segments.size(); ++i) {
    const auto& s = set_.segments[i];
    const auto x0 = set_.point(s.a);
    const auto x1 = s.single ? x0 : set_.point(s.a + 1);
    double len2 = 0.0;
    for (int j = 0; j < set_.dim; ++j) {
      mid[j] = 0.5 * (x0[j] + x1[j]);
      len2 += (x1[j] - x0[j]) * (x1[j] - x0[j]);
    }
    if (margin + 0.5 * std::sqrt(len2) > cell_size_) {
      overflow_.push_back(i);
      continue;
    }
    const std::span<const double> m(mid.data(), static_cast<std::size_t>(set_.dim));
    entries.emplace_back(cell_key(cell_of(m, cell_size_), set_.dim), i);
  }
  index_ = CellIndex(std::move(entries));
}

Box PathSausage::sampling_box() const {
  const Box box = set_.bbox();
  if (box.is_empty()) return box;
  return box.inflated(opt_.outer_radius + (opt_.resolution > 0.0 ? opt_.k_sigma * max_step_ : 0.0));
}

int PathSausage::classify(std::span<const double> p) const {
  int level = 0;
  auto visit = [&](std::uint32_t i) {
    level = std::max(level, classify_segment(p, set_.segments[i]));
    return level == 2;
  };
  if (!indexed_) {
    for (std::uint32_t i = 0; i < set_.segments.size(); ++i)
      if (visit(i)) return 2;
    return level;
  }
  for (std::uint32_t i : overflow_)
    if (visit(i)) return 2;
  const CellCoord home = cell_of(p, cell_size_);
  for (const CellCoord& off : offsets_) {
    CellCoord c = home;
    for (int j = 0; j < set_.dim; ++j) c[j] += off[j];
    for (std::uint32_t i : index_.find(cell_key(c, set_.dim)))
      if (visit(i)) return 2;
  }
  return level;
}

int PathSausage::classify_segment(std::span<const double> p, const PathSet::Segment& s) const {
  const double r2 = opt_.radius * opt_.radius;
  const double o2 = opt_.outer_radius * opt_.outer_radius;
  const double* x0 = set_.coords.data() + static_cast<std::size_t>(s.a) * set_.dim;
  const double d0 = point_distance2(p, x0);
  if (d0 <= r2) return 2;
  int level = d0 <= o2 ? 1 : 0;
  if (s.single) return level;
  const double* x1 = x0 + set_.dim;
  const double d1 = point_distance2(p, x1);
  if (d1 <= r2) return 2;
  if (d1 <= o2) level = 1;
  const double delta = set_.times[s.a + 1] - set_.times[s.a];
  const std::uint64_t key = stats::derive_stream(set_.owner_keys[s.owner], {s.index});
  return std::max(level, refine(p, x0, x1, delta, key, 1));
}

int PathSausage::refine(std::span<const double> p, const double* x0, const double* x1, double delta,
                        std::uint64_t key, std::uint64_t node) const {
  if (opt_.resolution <= 0.0 || node >= kMaxNode) return 0;
  const double step = std::sqrt(set_.dim * delta);
  if (step <= opt_.resolution) return 0;
  const double reach = opt_.outer_radius + opt_.k_sigma * step;
  if (chord_distance2(p, x0, x1) > reach * reach) return 0;

  stats::CounterRng rng(stats::derive_stream(key, {node}));
  const double sd = 0.5 * std::sqrt(delta);
  Point mid{};
  for (int j = 0; j < set_.dim; ++j) mid[j] = 0.5 * (x0[j] + x1[j]) + sd * rng.normal();
  const double dm = point_distance2(p, mid.data());
  if (dm <= opt_.radius * opt_.radius) return 2;
  int level = dm <= opt_.outer_radius * opt_.outer_radius ? 1 : 0;
  const int left = refine(p, x0, mid.data(), 0.5 * delta, key, 2 * node);
  if (left == 2) return 2;
  const int right = refine(p, mid.data(), x1, 0.5 * delta, key, 2 * node + 1);
  return std::max({level, left, right});
}

double chord_hull_length(const PathSet& set, double radius) {
  if (set.dim != 1) throw std::invalid_argument("chord_hull_length: needs d = 1");
  if (!(radius >= 0.0)) throw std::invalid_argument("chord_hull_length: radius must be >= 0");
  std::vector<std::pair<double, double>> intervals;
  intervals.reserve(set.segments.size());
  for (const auto& s : set.segments) {
    const double a = set.coords[s.a];
    const double b = s.single ? a : set.coords[s.a + 1];
    intervals.emplace_back(std::min(a, b) - radius, std::max(a, b) + radius);
  }
  return interval_union_length(std::move(intervals));
}

}  // namespace bbm
