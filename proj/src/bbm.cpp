#include "bbm/bbm.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include "bbm/parallel.hpp"
#include "bbm/rng.hpp"

namespace bbm {

namespace {

constexpr std::uint64_t kLifetimeStream = stats::hash_label("lifetime");
constexpr std::uint64_t kPathStream = stats::hash_label("path");

// Path generation is scheduled in blocks to amortise dispatch cost.
constexpr std::size_t kParticlesPerTask = 64;

std::size_t find_time(std::span<const double> times, double t) {
  const double tol = time_tolerance(t);
  auto it = std::lower_bound(times.begin(), times.end(), t - tol);
  if (it == times.end() || std::fabs(*it - t) > tol) return times.size();
  return static_cast<std::size_t>(it - times.begin());
}

}  // namespace

double time_tolerance(double t) { return 1e-9 * std::max(1.0, std::fabs(t)); }

void grid_sample_times(double begin, double end, double dt, std::vector<double>& out) {
  out.push_back(begin);
  if (!(end > begin)) return;
  const double tb = time_tolerance(begin);
  const double te = time_tolerance(end);
  for (auto k = static_cast<std::int64_t>(std::floor(begin / dt)) + 1;; ++k) {
    const double g = static_cast<double>(k) * dt;
    if (g >= end - te) break;
    if (g > begin + tb) out.push_back(g);
  }
  out.push_back(end);
}

BbmRun::BbmRun(SimConfig config, std::vector<Particle> particles, std::vector<double> times,
               std::vector<double> coords)
    : config_(config), particles_(std::move(particles)), times_(std::move(times)), coords_(std::move(coords)) {
  if (coords_.size() != times_.size() * static_cast<std::size_t>(config_.dimension)) {
    throw std::invalid_argument("BbmRun: coordinate array does not match the sample count");
  }
  for (const Particle& p : particles_) {
    if (p.first_sample + p.sample_count > times_.size()) {
      throw std::invalid_argument("BbmRun: particle samples out of range");
    }
  }
}

PathView BbmRun::path(std::uint32_t id) const {
  const Particle& p = particles_.at(id);
  const auto d = static_cast<std::size_t>(config_.dimension);
  return {config_.dimension, std::span<const double>(times_).subspan(p.first_sample, p.sample_count),
          std::span<const double>(coords_).subspan(p.first_sample * d, p.sample_count * d)};
}

bool BbmRun::is_alive(const Particle& p, double t) const {
  const double tol = time_tolerance(t);
  if (p.birth_time > t + tol) return false;
  if (t < p.death_time - tol) return true;
  return p.censored && t <= p.death_time + tol;
}

std::vector<std::uint32_t> BbmRun::alive(double t) const {
  std::vector<std::uint32_t> ids;
  for (const Particle& p : particles_)
    if (is_alive(p, t)) ids.push_back(p.id);
  return ids;
}

double BbmRun::grid_time(double t) const {
  const double tol = time_tolerance(t);
  if (std::fabs(t - config_.horizon) <= tol) return config_.horizon;
  if (t >= -tol && t <= config_.horizon + tol) {
    const double k = std::round(t / config_.dt);
    const double g = k * config_.dt;
    if (std::fabs(g - t) <= tol) return g;
  }
  std::ostringstream msg;
  msg << "time " << t << " is not on the sample grid (dt = " << config_.dt
      << ", horizon = " << config_.horizon << ")";
  throw ConfigError(msg.str());
}

bool BbmRun::on_grid(double t) const {
  try {
    grid_time(t);
    return true;
  } catch (const ConfigError&) {
    return false;
  }
}

bool BbmRun::operator==(const BbmRun& o) const {
  const SimConfig& a = config_;
  const SimConfig& b = o.config_;
  const bool same_config = a.dimension == b.dimension && a.beta == b.beta && a.r0 == b.r0 && a.k == b.k &&
                           a.dt == b.dt && a.horizon == b.horizon && a.seed == b.seed &&
                           a.max_points == b.max_points && a.eta == b.eta && a.resolution == b.resolution;
  return same_config && particles_ == o.particles_ && times_ == o.times_ && coords_ == o.coords_;
}

BbmRun simulate(const SimConfig& config, unsigned workers) {
  config.validate();
  const double estimate = config.expected_points();
  if (estimate > static_cast<double>(config.max_points)) {
    std::ostringstream msg;
    msg << "expected " << estimate << " path points exceeds max_points = " << config.max_points
        << "; shrink the horizon or raise dt";
    throw BudgetExceeded(msg.str(), estimate);
  }
  const double horizon = config.horizon;
  auto lifetime = [&](std::uint32_t id) {
    stats::CounterRng rng(stats::derive_stream(config.seed, {kLifetimeStream, id}));
    return rng.exponential(config.beta);
  };

  // Genealogy: process branch events in time order so ids follow birth order.
  std::vector<Particle> particles;
  using Event = std::pair<double, std::uint32_t>;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  particles.push_back(Particle{0, std::nullopt, 0.0, lifetime(0), false, 0, 0});
  events.emplace(particles[0].death_time, 0);
  while (!events.empty() && events.top().first < horizon) {
    const auto [when, id] = events.top();
    events.pop();
    if (particles.size() + 2 > config.max_points) {
      throw BudgetExceeded("particle count exceeds max_points during branching",
                           static_cast<double>(particles.size() + 2));
    }
    for (int c = 0; c < 2; ++c) {
      const auto child = static_cast<std::uint32_t>(particles.size());
      particles.push_back(Particle{child, id, when, when + lifetime(child), false, 0, 0});
      events.emplace(particles.back().death_time, child);
    }
  }
  for (Particle& p : particles) {
    if (p.death_time >= horizon) {
      p.death_time = horizon;
      p.censored = true;
    }
  }

  // Sample times, with the hard budget check.
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(std::min(estimate * 1.1 + 16.0, static_cast<double>(config.max_points))));
  for (Particle& p : particles) {
    p.first_sample = times.size();
    grid_sample_times(p.birth_time, p.death_time, config.dt, times);
    p.sample_count = times.size() - p.first_sample;
    if (times.size() > config.max_points) {
      throw BudgetExceeded("stored path points exceed max_points during sampling",
                           static_cast<double>(times.size()));
    }
  }

  // Increments per particle from its own stream, relative to its start.
  const auto d = static_cast<std::size_t>(config.dimension);
  std::vector<double> coords(times.size() * d, 0.0);
  const std::size_t tasks = (particles.size() + kParticlesPerTask - 1) / kParticlesPerTask;
  parallel_for(tasks, workers, [&](std::size_t task) {
    const std::size_t end = std::min(particles.size(), (task + 1) * kParticlesPerTask);
    for (std::size_t i = task * kParticlesPerTask; i < end; ++i) {
      const Particle& p = particles[i];
      stats::CounterRng rng(stats::derive_stream(config.seed, {kPathStream, p.id}));
      for (std::size_t s = 1; s < p.sample_count; ++s) {
        const std::size_t cur = p.first_sample + s;
        const double sd = std::sqrt(times[cur] - times[cur - 1]);
        for (std::size_t j = 0; j < d; ++j) coords[cur * d + j] = coords[(cur - 1) * d + j] + sd * rng.normal();
      }
    }
  });

  // Shift each path to start where its parent died; parents precede children.
  for (const Particle& p : particles) {
    if (!p.parent) continue;
    const Particle& parent = particles[*p.parent];
    const std::size_t from = (parent.first_sample + parent.sample_count - 1) * d;
    for (std::size_t s = 0; s < p.sample_count; ++s) {
      const std::size_t at = (p.first_sample + s) * d;
      for (std::size_t j = 0; j < d; ++j) coords[at + j] += coords[from + j];
    }
  }
  return BbmRun(config, std::move(particles), std::move(times), std::move(coords));
}

BrownianPath simulate_brownian_path(std::span<const double> start, double horizon, double dt,
                                    std::uint64_t key) {
  if (start.empty() || start.size() > static_cast<std::size_t>(kMaxDim)) {
    throw ConfigError("simulate_brownian_path: unsupported dimension");
  }
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw ConfigError("simulate_brownian_path: need dt > 0, horizon >= 0");
  BrownianPath path;
  path.dim = static_cast<int>(start.size());
  grid_sample_times(0.0, horizon, dt, path.times);
  const std::size_t d = start.size();
  path.coords.resize(path.times.size() * d);
  std::copy(start.begin(), start.end(), path.coords.begin());
  stats::CounterRng rng(key);
  for (std::size_t s = 1; s < path.times.size(); ++s) {
    const double sd = std::sqrt(path.times[s] - path.times[s - 1]);
    for (std::size_t j = 0; j < d; ++j) path.coords[s * d + j] = path.coords[(s - 1) * d + j] + sd * rng.normal();
  }
  return path;
}

std::size_t population_count(const BbmRun& run, double t) {
  if (!(t >= 0.0) || t > run.config().horizon + time_tolerance(t)) {
    throw ConfigError("population_count: t must lie in [0, horizon]");
  }
  std::size_t n = 0;
  for (const Particle& p : run.particles())
    if (run.is_alive(p, t)) ++n;
  return n;
}

PointCloud range_skeleton(const BbmRun& run, double t1, double t2) {
  if (t1 > t2) throw ConfigError("range_skeleton: empty window (t1 > t2)");
  PointCloud cloud(run.dimension());
  const double lo = t1 - time_tolerance(t1);
  const double hi = t2 + time_tolerance(t2);
  for (const Particle& p : run.particles()) {
    if (p.birth_time > hi || p.death_time < lo) continue;
    const PathView path = run.path(p.id);
    auto first = std::lower_bound(path.times.begin(), path.times.end(), lo);
    for (auto it = first; it != path.times.end() && *it <= hi; ++it) {
      cloud.add(path.point(static_cast<std::size_t>(it - path.times.begin())));
    }
  }
  return cloud;
}

PointCloud support_snapshot(const BbmRun& run, double t) {
  const double tg = run.grid_time(t);
  PointCloud cloud(run.dimension());
  for (const Particle& p : run.particles()) {
    if (!run.is_alive(p, tg)) continue;
    const PathView path = run.path(p.id);
    const std::size_t at = find_time(path.times, tg);
    if (at == path.size()) throw std::logic_error("support_snapshot: alive particle has no sample at t");
    cloud.add(path.point(at));
  }
  return cloud;
}

double max_displacement(const BbmRun& run, double t) {
  const double tg = run.grid_time(t);
  const double hi = tg + time_tolerance(tg);
  const auto d = static_cast<std::size_t>(run.dimension());
  double best = 0.0;
  for (const Particle& p : run.particles()) {
    if (p.birth_time > hi) continue;
    const PathView path = run.path(p.id);
    for (std::size_t s = 0; s < path.size() && path.times[s] <= hi; ++s) {
      double n2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) n2 += path.coords[s * d + j] * path.coords[s * d + j];
      best = std::max(best, n2);
    }
  }
  return std::sqrt(best);
}

std::size_t mass_in_ball(const BbmRun& run, double t, std::span<const double> center, double radius) {
  if (!(radius >= 0.0)) throw ConfigError("mass_in_ball: radius must be >= 0");
  if (center.size() != static_cast<std::size_t>(run.dimension())) {
    throw ConfigError("mass_in_ball: center dimension mismatch");
  }
  const PointCloud snap = support_snapshot(run, t);
  std::size_t n = 0;
  for (std::size_t i = 0; i < snap.size(); ++i)
    if (squared_distance(snap.point(i), center) <= radius * radius) ++n;
  return n;
}

}  // namespace bbm
