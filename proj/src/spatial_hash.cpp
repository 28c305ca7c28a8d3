#include "bbm/spatial_hash.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>

namespace bbm {

CellIndex::CellIndex(std::vector<std::pair<std::uint64_t, std::uint32_t>> entries) {
  if (entries.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error("CellIndex: too many entries");
  }
  std::sort(entries.begin(), entries.end());
  items_.reserve(entries.size());
  for (const auto& e : entries) items_.push_back(e.second);

  std::size_t unique = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || entries[i].first != entries[i - 1].first) ++unique;
  }
  n_buckets_ = unique;
  const std::size_t table = std::bit_ceil(std::max<std::size_t>(16, 2 * unique));
  slots_.assign(table, Slot{});
  mask_ = table - 1;

  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    while (j < entries.size() && entries[j].first == entries[i].first) ++j;
    const std::uint64_t key = entries[i].first;
    std::uint64_t pos = key & mask_;
    while (slots_[pos].count != 0) pos = (pos + 1) & mask_;
    slots_[pos] = Slot{key, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j - i)};
    i = j;
  }
}

std::span<const std::uint32_t> CellIndex::find(std::uint64_t key) const {
  if (slots_.empty()) return {};
  std::uint64_t pos = key & mask_;
  for (;;) {
    const Slot& s = slots_[pos];
    if (s.count == 0) return {};
    if (s.key == key) return {items_.data() + s.begin, s.count};
    pos = (pos + 1) & mask_;
  }
}

std::vector<CellCoord> neighbour_offsets(int dim) {
  std::vector<CellCoord> out;
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= 3;
  out.reserve(total);
  for (std::size_t code = 0; code < total; ++code) {
    CellCoord c{};
    std::size_t rest = code;
    for (int i = 0; i < dim; ++i) {
      c[i] = static_cast<std::int64_t>(rest % 3) - 1;
      rest /= 3;
    }
    out.push_back(c);
  }
  // Home cell first: most hits are found there.
  std::stable_partition(out.begin(), out.end(), [dim](const CellCoord& c) {
    for (int i = 0; i < dim; ++i)
      if (c[i] != 0) return false;
    return true;
  });
  return out;
}

SpatialHash::SpatialHash(const PointCloud& cloud, double cell_size)
    : dim_(cloud.dimension()), cell_size_(cell_size), offsets_(neighbour_offsets(dim_)) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw std::invalid_argument("SpatialHash: cell size must be positive");
  }
  std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
  entries.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    entries.emplace_back(cell_key(cell_of(cloud.point(i), cell_size_), dim_),
                         static_cast<std::uint32_t>(i));
  }
  index_ = CellIndex(std::move(entries));
}

}  // namespace bbm
