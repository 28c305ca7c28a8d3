#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "bbm/point_cloud.hpp"
#include "bbm/rng.hpp"

namespace bbm {

using CellCoord = std::array<std::int64_t, kMaxDim>;

inline CellCoord cell_of(std::span<const double> p, double cell_size) {
  CellCoord c{};
  for (std::size_t i = 0; i < p.size(); ++i) {
    c[i] = static_cast<std::int64_t>(std::floor(p[i] / cell_size));
  }
  return c;
}

/// 64-bit hash of integer cell coordinates. Distinct cells may collide; a
/// collision only merges two buckets, and every consumer re-checks exact
/// distances, so it costs time, never correctness.
inline std::uint64_t cell_key(const CellCoord& c, int dim) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (int i = 0; i < dim; ++i) {
    h = stats::mix64(h ^ (static_cast<std::uint64_t>(c[i]) + 0x9e3779b97f4a7c15ULL));
  }
  return h;
}

/// Immutable bucket index: key -> list of item ids, stored compressed with
/// an open-addressing directory.
class CellIndex {
 public:
  CellIndex() = default;
  explicit CellIndex(std::vector<std::pair<std::uint64_t, std::uint32_t>> entries);

  std::span<const std::uint32_t> find(std::uint64_t key) const;
  std::size_t bucket_count() const { return n_buckets_; }

 private:
  struct Slot {
    std::uint64_t key = 0;
    std::uint32_t begin = 0;
    std::uint32_t count = 0;  // 0 marks an empty slot
  };
  std::vector<Slot> slots_;
  std::vector<std::uint32_t> items_;
  std::uint64_t mask_ = 0;
  std::size_t n_buckets_ = 0;
};

/// All 3^d offsets in {-1, 0, 1}^d.
std::vector<CellCoord> neighbour_offsets(int dim);

/// Uniform grid over a point cloud with cell size equal to the query radius,
/// so a ball query only has to visit the 3^d cells around the query point.
class SpatialHash {
 public:
  SpatialHash(const PointCloud& cloud, double cell_size);

  double cell_size() const { return cell_size_; }
  int dimension() const { return dim_; }

  /// Calls fn(index) for every center in the 3^d cells around p. Returning
  /// true from fn stops the scan; the function then returns true.
  template <class Fn>
  bool scan(std::span<const double> p, Fn&& fn) const {
    const CellCoord home = cell_of(p, cell_size_);
    for (const CellCoord& off : offsets_) {
      CellCoord c = home;
      for (int i = 0; i < dim_; ++i) c[i] += off[i];
      for (std::uint32_t idx : index_.find(cell_key(c, dim_))) {
        if (fn(idx)) return true;
      }
    }
    return false;
  }

 private:
  int dim_;
  double cell_size_;
  std::vector<CellCoord> offsets_;
  CellIndex index_;
};

}  // namespace bbm
