#include "bbm/point_cloud.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bbm {

Box Box::empty(int dim) {
  Box b;
  b.dim = dim;
  b.lo.fill(std::numeric_limits<double>::infinity());
  b.hi.fill(-std::numeric_limits<double>::infinity());
  return b;
}

bool Box::is_empty() const {
  for (int i = 0; i < dim; ++i)
    if (lo[i] > hi[i]) return true;
  return dim == 0;
}

double Box::volume() const {
  if (is_empty()) return 0.0;
  double v = 1.0;
  for (int i = 0; i < dim; ++i) v *= hi[i] - lo[i];
  return v;
}

Box Box::inflated(double margin) const {
  Box b = *this;
  if (is_empty()) return b;
  for (int i = 0; i < dim; ++i) {
    b.lo[i] -= margin;
    b.hi[i] += margin;
  }
  return b;
}

bool Box::contains(std::span<const double> p) const {
  for (int i = 0; i < dim; ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

void Box::expand(std::span<const double> p) {
  for (int i = 0; i < dim; ++i) {
    lo[i] = std::min(lo[i], p[i]);
    hi[i] = std::max(hi[i], p[i]);
  }
}

PointCloud::PointCloud(int dim) : dim_(dim), bbox_(Box::empty(dim)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("PointCloud: unsupported dimension");
}

PointCloud::PointCloud(int dim, std::vector<double> coords) : PointCloud(dim) {
  if (coords.size() % static_cast<std::size_t>(dim) != 0) {
    throw std::invalid_argument("PointCloud: coordinate count is not a multiple of the dimension");
  }
  coords_ = std::move(coords);
  for (std::size_t i = 0; i < size(); ++i) bbox_.expand(point(i));
}

void PointCloud::add(std::span<const double> p) {
  if (p.size() != static_cast<std::size_t>(dim_)) {
    throw std::invalid_argument("PointCloud::add: dimension mismatch");
  }
  coords_.insert(coords_.end(), p.begin(), p.end());
  bbox_.expand(p);
}

}  // namespace bbm
