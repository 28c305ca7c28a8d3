#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "bbm/bbm.hpp"
#include "bbm/run_io.hpp"
#include "bbm/stats.hpp"

using namespace bbm;

namespace {

SimConfig base(int dim, double horizon, double dt, std::uint64_t seed) {
  SimConfig c;
  c.dimension = dim;
  c.horizon = horizon;
  c.dt = dt;
  c.seed = seed;
  c.resolution = PathResolution::Bridge;
  c.max_points = 100'000'000;
  return c;
}

std::string bytes_of(const BbmRun& run) {
  std::ostringstream out;
  write_run(out, run);
  return out.str();
}

}  // namespace

TEST_CASE("config validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = [](auto mutate) {
    SimConfig c = base(2, 1.0, 0.01, 1);
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  bad([](SimConfig& c) { c.dimension = 0; });
  bad([](SimConfig& c) { c.dimension = 9; });
  bad([](SimConfig& c) { c.beta = 0.0; });
  bad([](SimConfig& c) { c.r0 = -1.0; });
  bad([](SimConfig& c) { c.k = -0.1; });
  bad([](SimConfig& c) { c.dt = 0.0; });
  bad([](SimConfig& c) { c.dt = 2.0; });
  bad([](SimConfig& c) { c.eta = 0.0; });
  // Grid resolution: sqrt(2 * 0.01) = 0.141 > 0.25 * r(1) once r(1) < 0.566.
  SimConfig g = base(2, 1.0, 0.01, 1);
  g.resolution = PathResolution::Grid;
  g.r0 = 0.6;
  CHECK_NOTHROW(g.validate());
  g.r0 = 0.5;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.resolution = PathResolution::Bridge;
  CHECK_NOTHROW(g.validate());
  CHECK(base(2, 1.0, 0.01, 1).radius_at(0.0) == 1.0);
  SimConfig s = base(2, 1.0, 0.01, 1);
  s.k = 0.5;
  CHECK(s.radius_at(2.0) == doctest::Approx(std::exp(-1.0)));
  CHECK(s.radius_at(3.0) < s.radius_at(2.0));
}

TEST_CASE("zero horizon") {
  const BbmRun run = simulate(base(3, 0.0, 0.1, 4));
  REQUIRE(run.particles().size() == 1);
  const Particle& p = run.particles()[0];
  CHECK_FALSE(p.parent.has_value());
  CHECK(p.censored);
  CHECK(p.death_time == 0.0);
  REQUIRE(p.sample_count == 1);
  for (double x : run.path(0).point(0)) CHECK(x == 0.0);
  CHECK(population_count(run, 0.0) == 1);
  CHECK(max_displacement(run, 0.0) == 0.0);
}

TEST_CASE("budget") {
  SimConfig c = base(1, 10.0, 0.01, 1);
  c.max_points = 1'000'000;
  try {
    simulate(c);
    FAIL("expected BudgetExceeded");
  } catch (const BudgetExceeded& e) {
    CHECK(e.points() == doctest::Approx(std::expm1(10.0) / 0.01));
  }
  // Passes the pre-flight estimate, but some seeds overshoot in flight.
  c.horizon = 6.0;
  c.dt = 0.05;
  c.max_points = static_cast<std::uint64_t>(1.2 * c.expected_points());
  int overshoot = 0;
  for (std::uint64_t s = 1; s <= 30; ++s) {
    c.seed = s;
    try {
      const BbmRun run = simulate(c, 1);
      CHECK(run.total_points() <= c.max_points);
    } catch (const BudgetExceeded& e) {
      CHECK(e.points() > static_cast<double>(c.max_points));
      ++overshoot;
    }
  }
  CHECK(overshoot > 0);
  CHECK(overshoot < 30);
}

TEST_CASE("population mean at T = 10") {
  std::vector<double> n;
  for (std::uint64_t s = 1; s <= 200; ++s) {
    const BbmRun run = simulate(base(1, 10.0, 1.0, s), 1);
    n.push_back(static_cast<double>(population_count(run, 10.0)));
  }
  const auto ci = stats::mean_ci(n);
  MESSAGE("mean N_10 = " << ci.mean << " +- " << ci.std_error);
  CHECK(std::fabs(ci.mean - std::exp(10.0)) <= 3.0 * ci.std_error);
}

TEST_CASE("population counts") {
  std::vector<double> n5;
  for (std::uint64_t s = 1; s <= 500; ++s) {
    const BbmRun run = simulate(base(2, 5.0, 0.5, s), 1);
    CHECK(population_count(run, 0.0) == 1);
    std::size_t prev = 0;
    for (double t = 0.0; t <= 5.0; t += 0.25) {
      const std::size_t now = population_count(run, t);
      CHECK(now >= prev);
      prev = now;
    }
    n5.push_back(static_cast<double>(population_count(run, 5.0)));
  }
  const auto ci = stats::mean_ci(n5);
  CHECK(std::fabs(ci.mean - std::exp(5.0)) <= 3.0 * ci.std_error);
  const BbmRun run = simulate(base(2, 1.0, 0.5, 1), 1);
  CHECK_THROWS_AS(population_count(run, 1.5), ConfigError);
  CHECK_THROWS_AS(population_count(run, -0.1), ConfigError);
}

TEST_CASE("determinism across worker counts") {
  for (int dim : {1, 3}) {
    const SimConfig c = base(dim, 6.0, 0.05, 77);
    const BbmRun a = simulate(c, 1);
    const BbmRun b = simulate(c, 4);
    CHECK(a == b);
    CHECK(bytes_of(a) == bytes_of(b));
    SimConfig other = c;
    other.seed = 78;
    CHECK_FALSE(simulate(other, 1) == a);
  }
}

TEST_CASE("tree structure and path invariants") {
  const SimConfig c = base(2, 5.0, 0.1, 9);
  const BbmRun run = simulate(c);
  const auto parts = run.particles();
  std::map<std::uint32_t, int> children;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Particle& p = parts[i];
    CHECK(p.id == i);
    const PathView path = run.path(p.id);
    REQUIRE(path.size() >= 1);
    CHECK(path.times.front() == p.birth_time);
    CHECK(path.times.back() == doctest::Approx(std::min(p.death_time, c.horizon)));
    for (std::size_t s = 1; s < path.size(); ++s) {
      CHECK(path.times[s] > path.times[s - 1]);
      CHECK(path.times[s] - path.times[s - 1] <= c.dt * (1 + 1e-9));
    }
    if (p.censored) CHECK(p.death_time == c.horizon);
    if (!p.parent) {
      CHECK(p.id == 0);
      CHECK(p.birth_time == 0.0);
      for (double x : path.point(0)) CHECK(x == 0.0);
      continue;
    }
    const Particle& parent = run.particle(*p.parent);
    CHECK(parent.id < p.id);
    CHECK(parent.death_time == p.birth_time);
    CHECK_FALSE(parent.censored);
    const PathView pp = run.path(parent.id);
    const auto a = pp.point(pp.size() - 1);
    const auto b = path.point(0);
    CHECK(std::equal(a.begin(), a.end(), b.begin()));
    ++children[parent.id];
  }
  for (const Particle& p : parts) {
    if (p.censored) {
      CHECK(children.count(p.id) == 0);
    } else {
      CHECK(children[p.id] == 2);
    }
  }
}

TEST_CASE("increments are standard Gaussian after scaling") {
  // Pool (x(s') - x(s)) / sqrt(s' - s) over every segment of a few runs.
  std::vector<double> z;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    const BbmRun run = simulate(base(2, 5.0, 0.1, s));
    for (const Particle& p : run.particles()) {
      const PathView path = run.path(p.id);
      for (std::size_t i = 1; i < path.size(); ++i) {
        const double h = std::sqrt(path.times[i] - path.times[i - 1]);
        for (int j = 0; j < 2; ++j) z.push_back((path.point(i)[j] - path.point(i - 1)[j]) / h);
      }
    }
  }
  REQUIRE(z.size() > 20'000);
  double m1 = 0, m2 = 0, m4 = 0;
  for (double v : z) {
    m1 += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  const double n = static_cast<double>(z.size());
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::fabs(m1) < 4.0 / std::sqrt(n));
  CHECK(std::fabs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::fabs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}

TEST_CASE("root lifetime is exponential") {
  // Over [0, 1] with beta = 2: P(root branches) = 1 - e^{-2}, E[min(L, 1)] = (1 - e^{-2}) / 2.
  const int n = 4000;
  int branched = 0;
  double sum = 0.0;
  for (int s = 1; s <= n; ++s) {
    SimConfig c = base(1, 1.0, 1.0, static_cast<std::uint64_t>(s));
    c.beta = 2.0;
    const BbmRun run = simulate(c, 1);
    const Particle& root = run.particles()[0];
    branched += !root.censored;
    sum += root.death_time;
  }
  const double p = -std::expm1(-2.0);
  CHECK(std::fabs(branched / double(n) - p) < 4.0 * std::sqrt(p * (1 - p) / n));
  CHECK(sum / n == doctest::Approx(p / 2).epsilon(0.03));
}

TEST_CASE("range skeleton and snapshots") {
  const SimConfig c = base(2, 3.0, 0.1, 21);
  const BbmRun run = simulate(c);
  CHECK(range_skeleton(run, 0.0, 3.0).size() == run.total_points());
  CHECK_THROWS_AS(range_skeleton(run, 2.0, 1.0), ConfigError);

  const PointCloud s0 = support_snapshot(run, 0.0);
  REQUIRE(s0.size() == 1);
  CHECK(s0.point(0)[0] == 0.0);
  CHECK(s0.point(0)[1] == 0.0);

  for (double t : {0.5, 1.0, 2.2, 3.0}) {
    const PointCloud snap = support_snapshot(run, t);
    CHECK(snap.size() == population_count(run, t));
    CHECK(snap.size() == run.alive(t).size());
    const PointCloud window = range_skeleton(run, t, t);
    const PointCloud past = range_skeleton(run, 0.0, t);
    auto as_set = [](const PointCloud& pc) {
      std::vector<std::vector<double>> v;
      for (std::size_t i = 0; i < pc.size(); ++i) v.emplace_back(pc.point(i).begin(), pc.point(i).end());
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      return v;
    };
    const auto a = as_set(snap), w = as_set(window), p = as_set(past);
    CHECK(a == w);
    CHECK(std::includes(p.begin(), p.end(), a.begin(), a.end()));
  }
  CHECK_THROWS_AS(support_snapshot(run, 0.123), ConfigError);
  CHECK(run.on_grid(2.2));
  CHECK_FALSE(run.on_grid(2.25));
}

TEST_CASE("range skeleton point count") {
  // E[#samples in [0, 1]] ~ (e^1 - 1) / dt; birth and end samples add O(N).
  std::vector<double> counts;
  const double dt = 0.001;
  for (std::uint64_t s = 1; s <= 50; ++s) {
    const BbmRun run = simulate(base(1, 1.0, dt, s), 1);
    counts.push_back(static_cast<double>(range_skeleton(run, 0.0, 1.0).size()));
  }
  const double expected = std::expm1(1.0) / dt;
  const double mean = stats::mean_ci(counts).mean;
  MESSAGE("mean count " << mean << " vs " << expected);
  CHECK(std::fabs(mean / expected - 1.0) < 0.10);
}

TEST_CASE("max displacement") {
  const BbmRun run = simulate(base(2, 4.0, 0.1, 5));
  CHECK(max_displacement(run, 0.0) == 0.0);
  double prev = 0.0;
  for (double t = 0.1; t <= 4.0 + 1e-9; t += 0.1) {
    const double m = max_displacement(run, std::round(t * 10) / 10);
    CHECK(m >= prev);
    prev = m;
  }
}

TEST_CASE("max displacement speed band") {
  int inside = 0;
  for (std::uint64_t s = 1; s <= 20; ++s) {
    const BbmRun run = simulate(base(1, 10.0, 0.01, s));
    const double v = max_displacement(run, 10.0) / 10.0;
    MESSAGE("seed " << s << ": M_10 / 10 = " << v);
    inside += v >= 1.0 && v <= 1.45;
  }
  CHECK(inside >= 18);
}

TEST_CASE("mass in ball") {
  const BbmRun run = simulate(base(2, 3.0, 0.1, 13));
  const std::vector<double> origin{0.0, 0.0};
  CHECK(mass_in_ball(run, 0.0, origin, 1.0) == 1);
  const std::vector<double> far{100.0, 100.0};
  CHECK(mass_in_ball(run, 3.0, far, 0.0) == 0);
  CHECK(mass_in_ball(run, 3.0, origin, 1e6) == population_count(run, 3.0));
  // Singletons at the distinct particle positions partition the mass.
  const PointCloud snap = support_snapshot(run, 3.0);
  std::vector<std::vector<double>> pos;
  for (std::size_t i = 0; i < snap.size(); ++i) pos.emplace_back(snap.point(i).begin(), snap.point(i).end());
  std::sort(pos.begin(), pos.end());
  pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
  std::size_t total = 0;
  for (const auto& p : pos) total += mass_in_ball(run, 3.0, p, 0.0);
  CHECK(total == population_count(run, 3.0));
  CHECK_THROWS_AS(mass_in_ball(run, 3.0, origin, -1.0), ConfigError);
}

TEST_CASE("brownian path") {
  const std::vector<double> start{1.0, -2.0, 0.5};
  const BrownianPath a = simulate_brownian_path(start, 2.0, 0.01, 42);
  const BrownianPath b = simulate_brownian_path(start, 2.0, 0.01, 42);
  CHECK(a.times == b.times);
  CHECK(a.coords == b.coords);
  CHECK(a.times.front() == 0.0);
  CHECK(a.times.back() == doctest::Approx(2.0));
  CHECK(a.view().point(0)[0] == 1.0);
  // X(1) - X(0) over many keys is N(0, 1) per coordinate.
  std::vector<double> x;
  for (std::uint64_t key = 0; key < 4000; ++key) {
    const BrownianPath p = simulate_brownian_path(start, 1.0, 0.25, key);
    x.push_back(p.view().point(p.times.size() - 1)[0] - 1.0);
  }
  double m = 0, v = 0;
  for (double xi : x) m += xi;
  m /= x.size();
  for (double xi : x) v += (xi - m) * (xi - m);
  v /= x.size() - 1;
  CHECK(std::fabs(m) < 4.0 / std::sqrt(4000.0));
  CHECK(std::fabs(v - 1.0) < 4.0 * std::sqrt(2.0 / 4000.0));
}

TEST_CASE("run serialization round trip") {
  const BbmRun run = simulate(base(3, 2.5, 0.1, 8));
  std::stringstream io;
  write_run(io, run);
  const BbmRun back = read_run(io);
  CHECK(back == run);
  CHECK(bytes_of(back) == bytes_of(run));

  std::string corrupt = bytes_of(run);
  corrupt[0] = 'X';
  std::istringstream bad(corrupt);
  CHECK_THROWS(read_run(bad));
  std::istringstream truncated(bytes_of(run).substr(0, 100));
  CHECK_THROWS(read_run(truncated));
}
