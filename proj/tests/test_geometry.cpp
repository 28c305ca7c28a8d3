#include <cmath>
#include <numbers>

#include "doctest.h"

#include "bbm/geometry.hpp"
#include "bbm/spatial_hash.hpp"
#include "bbm/theory.hpp"
#include "support/oracles.hpp"

using namespace bbm;

namespace {

PointCloud cloud_of(int dim, std::initializer_list<double> coords) { return PointCloud(dim, std::vector<double>(coords)); }

std::span<const double> sp(const Point& p, int dim) { return {p.data(), static_cast<std::size_t>(dim)}; }

}  // namespace

TEST_CASE("point cloud bbox holds every center") {
  stats::CounterRng rng(5);
  PointCloud c(3);
  Point p{};
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 3; ++j) p[j] = rng.normal();
    c.add(sp(p, 3));
  }
  for (std::size_t i = 0; i < c.size(); ++i) CHECK(c.bbox().contains(c.point(i)));
  CHECK_THROWS(PointCloud(2, std::vector<double>{1.0, 2.0, 3.0}));
}

TEST_CASE("spatial hash membership matches brute force") {
  stats::CounterRng rng(11);
  for (int dim : {1, 2, 3}) {
    PointCloud c(dim);
    Point p{};
    for (int i = 0; i < 300; ++i) {
      for (int j = 0; j < dim; ++j) p[j] = 4.0 * rng.uniform();
      c.add(sp(p, dim));
    }
    const BallUnion u(c, 0.3);
    for (int q = 0; q < 3000; ++q) {
      for (int j = 0; j < dim; ++j) p[j] = -0.5 + 5.0 * rng.uniform();
      bool brute = false;
      for (std::size_t i = 0; i < c.size(); ++i) brute = brute || squared_distance(sp(p, dim), c.point(i)) <= 0.09;
      CHECK(u.contains(sp(p, dim)) == brute);
    }
  }
}

TEST_CASE("balls are closed") {
  const PointCloud c = cloud_of(2, {0.0, 0.0});
  const BallUnion u(c, 1.0);
  const Point edge{1.0, 0.0};
  CHECK(u.contains(sp(edge, 2)));
}

TEST_CASE("exact 1d examples") {
  CHECK(volume_exact_1d(cloud_of(1, {0.0, 0.5, 2.0}), 0.5).value == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(volume_exact_1d(cloud_of(1, {3.0}), 0.7).value == doctest::Approx(1.4).epsilon(1e-14));
  CHECK(volume_exact_1d(cloud_of(1, {0.0, 0.0, 0.5, 2.0, 2.0}), 0.5).value ==
        volume_exact_1d(cloud_of(1, {0.0, 0.5, 2.0}), 0.5).value);
  CHECK(volume_exact_1d(cloud_of(1, {0.0, 0.5, 2.0}), 0.5).std_error == 0.0);
  CHECK_THROWS(volume_exact_1d(cloud_of(2, {0.0, 0.0}), 0.5));
  CHECK_THROWS(volume_exact_1d(cloud_of(1, {0.0}), 0.0));
}

TEST_CASE("voxel examples") {
  const auto disk = volume_voxel(cloud_of(2, {0.0, 0.0}), 1.0, 0.01);
  CHECK(disk.value == doctest::Approx(std::numbers::pi).epsilon(0.02));
  const auto a = volume_voxel(cloud_of(2, {0.0, 0.0}), 1.0, 0.05);
  const auto two = volume_voxel(cloud_of(2, {0.0, 0.0, 10.0, 0.0}), 1.0, 0.05);
  CHECK(two.value == doctest::Approx(2 * a.value).epsilon(0.01));
  CHECK_THROWS_AS(volume_voxel(cloud_of(2, {0.0, 0.0}), 1.0, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(volume_voxel(cloud_of(3, {0.0, 0.0, 0.0, 100.0, 100.0, 100.0}), 1.0, 0.01), GeometryBudgetError);
}

TEST_CASE("monte carlo examples") {
  const auto ball = volume_mc(cloud_of(3, {0.0, 0.0, 0.0}), 1.0, 1'000'000, 17);
  CHECK(std::fabs(ball.value - 4.0 * std::numbers::pi / 3.0) <= 3.0 * ball.std_error);
  CHECK(ball.std_error > 0.0);
  CHECK(volume_mc(PointCloud(2), 1.0, 1000, 3).value == 0.0);
  CHECK_THROWS(volume_mc(cloud_of(1, {0.0}), 1.0, 999, 3));
  // Seed determinism, and worker count independence.
  const PointCloud c = oracle::triangle_cloud(4, 99);
  const auto a = volume_mc(c, 0.5, 50'000, 8, 1);
  const auto b = volume_mc(c, 0.5, 50'000, 8, 4);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  CHECK(volume_mc(c, 0.5, 50'000, 9).value != a.value);
}

TEST_CASE("degenerate box gives zero volume") {
  const PointCloud c = cloud_of(2, {1.0, 1.0});
  CHECK(volume_mc(c, 0.0, 1000, 1).value == 0.0);
}

TEST_CASE("multiplicity-weighted estimator") {
  const PointCloud one = cloud_of(2, {0.0, 0.0});
  const BallUnion u1(one, 1.0);
  const auto e = volume_mc_balls(u1, 1, 10'000, 3);
  CHECK(e.value == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  const PointCloud c = oracle::triangle_cloud(5, 7);
  const BallUnion u(c, 0.5);
  const auto weighted = volume_mc_balls(u, c.size(), 400'000, 4);
  const auto voxel = volume_voxel(c, 0.5, 0.5 / 16);
  CHECK(oracle::agree(weighted, voxel));
}

TEST_CASE("estimator oracle triangle") {
  int good = 0;
  for (int i = 0; i < 20; ++i) {
    const auto c = oracle::triangle_check(i, 2024);
    CHECK_MESSAGE(c.ok, "cloud " << i << " d=" << c.dim << " mc=" << c.mc.value << "+-" << c.mc.std_error
                                 << " voxel=" << c.voxel.value << "+-" << c.voxel.std_error);
    good += c.ok;
  }
  CHECK(good == 20);
}

TEST_CASE("monotonicity and bounds") {
  for (int dim : {1, 2, 3}) {
    const PointCloud full = oracle::triangle_cloud(dim - 1 + 3, 31);
    PointCloud half(dim);
    for (std::size_t i = 0; i < full.size() / 2; ++i) half.add(full.point(i));
    const double wd = theory::unit_ball_volume(dim);
    const double r = 0.4, edge = r / 8;
    const auto vh = volume_voxel(half, r, edge);
    const auto vf = volume_voxel(full, r, edge);
    CHECK(vf.value >= vh.value);
    CHECK(volume_voxel(full, 1.2 * r, edge).value >= vf.value);
    CHECK(vf.value <= static_cast<double>(full.size()) * wd * std::pow(r, dim) + 3 * vf.std_error);
    CHECK(vf.value >= wd * std::pow(r, dim) - 3 * vf.std_error);
    const auto mh = volume_mc(half, r, 200'000, 5);
    const auto mf = volume_mc(full, r, 200'000, 5);
    CHECK(mf.value >= mh.value - 3 * std::hypot(mf.std_error, mh.std_error));
    if (dim == 1) {
      CHECK(volume_exact_1d(full, r).value >= volume_exact_1d(half, r).value);
      CHECK(volume_exact_1d(full, 1.2 * r).value > volume_exact_1d(full, r).value);
    }
  }
}

TEST_CASE("bracket estimate is nested") {
  const PointCloud c = oracle::triangle_cloud(7, 3);
  const BallUnion u(c, 0.3, 0.45);
  const auto b = volume_mc_bracket(u, 100'000, 12);
  CHECK(b.inner.value <= b.outer.value);
  const auto inner_only = volume_mc(BallUnion(c, 0.3), 100'000, 12);
  CHECK(oracle::agree(b.inner, volume_voxel(c, 0.3, 0.3 / 8)));
  CHECK(inner_only.value > 0.0);
  CHECK_THROWS(BallUnion(c, 0.5, 0.4));
}

TEST_CASE("coverage probe") {
  const Point origin{};
  const PointCloud one = cloud_of(2, {0.0, 0.0});
  const auto hit = covers_ball(one, 2.0, sp(origin, 2), 1.0, 5000, 1);
  CHECK(hit.all_hit);
  CHECK(hit.miss_fraction == 0.0);
  const auto empty = covers_ball(PointCloud(2), 2.0, sp(origin, 2), 1.0, 5000, 1);
  CHECK_FALSE(empty.all_hit);
  CHECK(empty.miss_fraction == 1.0);
  // Disk of radius 1 inside a probe ball of radius 2 misses 3/4 of it.
  const auto part = covers_ball(one, 1.0, sp(origin, 2), 2.0, 100'000, 2);
  CHECK(part.miss_fraction == doctest::Approx(0.75).epsilon(0.01));
  CHECK_THROWS(covers_ball(one, 1.0, sp(origin, 2), 0.0, 10, 2));
}
