#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace bbm {

/// Largest supported spatial dimension. Scratch points live in fixed arrays.
inline constexpr int kMaxDim = 8;

using Point = std::array<double, kMaxDim>;

/// Axis-aligned box. An empty box has lo > hi in every coordinate.
struct Box {
  int dim = 0;
  Point lo{};
  Point hi{};

  static Box empty(int dim);

  bool is_empty() const;
  double volume() const;
  Box inflated(double margin) const;
  bool contains(std::span<const double> p) const;
  void expand(std::span<const double> p);
};

/// Flat set of d-dimensional points with its bounding box.
class PointCloud {
 public:
  explicit PointCloud(int dim);
  PointCloud(int dim, std::vector<double> coords);

  int dimension() const { return dim_; }
  std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
  bool empty() const { return coords_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  std::span<const double> coords() const { return coords_; }
  const Box& bbox() const { return bbox_; }

  void add(std::span<const double> p);
  void reserve(std::size_t n) { coords_.reserve(n * static_cast<std::size_t>(dim_)); }

 private:
  int dim_;
  std::vector<double> coords_;
  Box bbox_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace bbm
