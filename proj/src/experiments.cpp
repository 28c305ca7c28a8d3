#include "bbm/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "bbm/bbm.hpp"
#include "bbm/parallel.hpp"
#include "bbm/path_sausage.hpp"
#include "bbm/rng.hpp"
#include "bbm/stats.hpp"
#include "bbm/theory.hpp"

namespace bbm {

namespace {

constexpr std::string_view kNames[] = {"sausage_scaling", "enlargement_scaling", "d1_law",
                                       "wiener_sausage",  "hitting",             "coverage",
                                       "trap_survival",   "population_growth"};

// Runs larger than this are processed one seed at a time to bound memory.
constexpr double kParallelSeedPoints = 1e6;

using Rows = std::vector<ResultRow>;

struct Context {
  const ExperimentSpec& spec;
  std::string name;
  int dim;
  double t_max;

  std::uint64_t mc_seed(double t, std::int64_t index, std::string_view tag) const {
    return stats::derive_stream(spec.config.seed,
                                {stats::hash_label("mc"), stats::hash_label(name), stats::label_of(t),
                                 static_cast<std::uint64_t>(index), stats::hash_label(tag)});
  }

  ResultRow row(double t, std::int64_t seed, std::string method, double value, double se,
                std::optional<double> theory) const {
    ResultRow r{name, t, seed, std::move(method), value, se, theory, std::nullopt};
    if (theory && *theory != 0.0) r.ratio = value / *theory;
    return r;
  }

  ResultRow budget_row(double t, std::int64_t seed, double points) const {
    return {name, t, seed, std::string(kBudgetExceededMethod), points, 0.0, std::nullopt, std::nullopt};
  }

  SimConfig run_config(std::int64_t seed_index, PathResolution res) const {
    SimConfig c = spec.config;
    c.horizon = t_max;
    c.seed = run_seed(spec.config.seed, seed_index);
    c.resolution = res;
    return c;
  }

  bool rule_holds(double radius) const {
    return std::sqrt(dim * spec.config.dt) <= spec.config.eta * radius * (1.0 + 1e-12);
  }

  /// Whether sausages of the given smallest radius need bridge refinement.
  bool use_bridge(double radius) const {
    switch (spec.path_model) {
      case PathModel::Bridge: return true;
      case PathModel::Skeleton:
        if (!rule_holds(radius)) {
          throw ConfigError("skeleton path model violates the resolution rule sqrt(d*dt) <= eta*r; "
                            "lower dt or use --path-model bridge");
        }
        return false;
      case PathModel::Auto: break;
    }
    return !rule_holds(radius);
  }

  VolumeMethod method_or(VolumeMethod fallback) const { return spec.estimator.value_or(fallback); }
};

/// Runs fn(seed_index, inner_workers) for every seed and concatenates the
/// rows in seed order.
template <class Fn>
Rows over_seeds(const Context& ctx, double points_per_run, Fn&& fn) {
  const auto n = static_cast<std::size_t>(ctx.spec.n_seeds);
  const unsigned workers = resolve_workers(ctx.spec.workers);
  unsigned outer = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (points_per_run > kParallelSeedPoints) outer = 1;
  const unsigned inner = std::max(1u, workers / outer);
  std::vector<Rows> slots(n);
  parallel_for(n, outer, [&](std::size_t i) { slots[i] = fn(static_cast<std::int64_t>(i), inner); });
  Rows rows;
  for (auto& s : slots) rows.insert(rows.end(), s.begin(), s.end());
  return rows;
}

/// Simulates the run for a seed, or fills budget rows for every t.
std::optional<BbmRun> simulate_or_flag(const Context& ctx, const SimConfig& cfg, unsigned workers,
                                       std::int64_t seed, Rows& rows) {
  try {
    return simulate(cfg, workers);
  } catch (const BudgetExceeded& e) {
    for (double t : ctx.spec.t_grid) rows.push_back(ctx.budget_row(t, seed, e.points()));
    return std::nullopt;
  }
}

/// Appends "<method>_mean" rows over the per-seed rows of each (t, method).
void append_means(const Context& ctx, Rows& rows) {
  std::vector<std::pair<double, std::string>> keys;
  std::map<std::pair<double, std::string>, std::vector<double>> values;
  std::map<std::pair<double, std::string>, std::optional<double>> theories;
  for (const ResultRow& r : rows) {
    if (r.seed < 0 || r.method == kBudgetExceededMethod) continue;
    const auto key = std::make_pair(r.t, r.method);
    if (!values.contains(key)) keys.push_back(key);
    values[key].push_back(r.value);
    theories[key] = r.theory;
  }
  for (const auto& key : keys) {
    const auto& v = values[key];
    double mean = v.front(), se = 0.0;
    if (v.size() >= 2) {
      const auto ci = stats::mean_ci(v, ctx.spec.confidence);
      mean = ci.mean;
      se = ci.std_error;
    }
    rows.push_back(ctx.row(key.first, -1, key.second + "_mean", mean, se, theories[key]));
  }
}

/// Appends a least-squares slope of y(mean rows of `method`) against t.
void append_slope(const Context& ctx, Rows& rows, const std::string& method, const std::string& label,
                  bool log_scale, std::optional<double> theory) {
  std::vector<double> x, y;
  for (const ResultRow& r : rows) {
    if (r.seed != -1 || r.method != method) continue;
    if (log_scale && !(r.value > 0.0)) return;
    x.push_back(r.t);
    y.push_back(log_scale ? std::log(r.value) : r.value);
  }
  if (x.size() < 2) return;
  const auto fit = stats::linear_fit(x, y);
  rows.push_back(ctx.row(ctx.t_max, -1, label, fit.slope, fit.slope_std_error, theory));
}

void sort_rows(Rows& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    if (a.t != b.t) return a.t < b.t;
    return a.seed < b.seed;
  });
}

double voxel_for(const ExperimentSpec& spec, double radius) { return spec.voxel > 0.0 ? spec.voxel : radius / 4.0; }

double binomial_se(double p, std::int64_t n) { return std::sqrt(p * (1.0 - p) / static_cast<double>(n)); }

Rows run_sausage_scaling(const Context& ctx) {
  const auto& spec = ctx.spec;
  const double beta = spec.config.beta;
  const bool bridge = ctx.dim >= 2 && ctx.use_bridge(spec.config.radius_at(ctx.t_max));
  const auto theory = theory::limit_sausage(ctx.dim, beta, spec.config.k).value;
  Rows rows = over_seeds(ctx, ctx.run_config(0, PathResolution::Bridge).expected_points(),
                         [&](std::int64_t i, unsigned workers) {
    Rows out;
    const SimConfig cfg = ctx.run_config(i, bridge || ctx.dim == 1 ? PathResolution::Bridge : PathResolution::Grid);
    const auto run = simulate_or_flag(ctx, cfg, workers, i, out);
    if (!run) return out;
    const std::uint64_t bridge_seed = stats::derive_stream(cfg.seed, "bridge");
    for (double t : spec.t_grid) {
      const double r = cfg.radius_at(t);
      const double scale = std::pow(t, ctx.dim);
      auto emit = [&](const std::string& tag, const VolumeEstimate& in, const VolumeEstimate& outer) {
        out.push_back(ctx.row(t, i, tag + "_inner", in.value / scale, in.std_error / scale, theory));
        out.push_back(ctx.row(t, i, tag + "_outer", outer.value / scale, outer.std_error / scale, theory));
      };
      if (ctx.dim == 1) {
        const PathSet set = path_set(*run, t, bridge_seed);
        VolumeEstimate in, outer;
        in.method = outer.method = VolumeMethod::Exact1d;
        in.value = chord_hull_length(set, r);
        outer.value = chord_hull_length(set, r + 3.0 * std::sqrt(cfg.dt));
        emit("exact1d", in, outer);
        continue;
      }
      const std::uint64_t seed = ctx.mc_seed(t, i, "volume");
      if (bridge) {
        const PathSausage sausage(path_set(*run, t, bridge_seed),
                                  {r, r * (1.0 + 3.0 * cfg.eta), cfg.eta * r});
        const auto br = volume_mc_bracket(sausage, spec.samples, seed, workers);
        emit("mc", br.inner, br.outer);
        continue;
      }
      const PointCloud cloud = range_skeleton(*run, 0.0, t);
      const double r_out = r + 3.0 * std::sqrt(ctx.dim * cfg.dt);
      if (ctx.method_or(VolumeMethod::Mc) == VolumeMethod::Voxel) {
        try {
          const double v = voxel_for(spec, r);
          emit("voxel", volume_voxel(cloud, r, v), volume_voxel(cloud, r_out, v));
        } catch (const GeometryBudgetError&) {
          out.push_back(ctx.budget_row(t, i, 0.0));
        }
        continue;
      }
      const BallUnion balls(cloud, r, r_out);
      const auto br = volume_mc_bracket(balls, spec.samples, seed, workers);
      emit("mc", br.inner, br.outer);
    }
    return out;
  });
  append_means(ctx, rows);
  return rows;
}

Rows run_enlargement_scaling(const Context& ctx) {
  const auto& spec = ctx.spec;
  const auto theory = theory::limit_enlargement(ctx.dim, spec.config.beta, spec.config.k).value;
  const VolumeMethod method = ctx.method_or(ctx.dim == 1 ? VolumeMethod::Exact1d : VolumeMethod::Mc);
  Rows rows = over_seeds(ctx, ctx.run_config(0, PathResolution::Bridge).expected_points(),
                         [&](std::int64_t i, unsigned workers) {
    Rows out;
    // Snapshots are exact particle positions; no resolution rule applies.
    const SimConfig cfg = ctx.run_config(i, PathResolution::Bridge);
    const auto run = simulate_or_flag(ctx, cfg, workers, i, out);
    if (!run) return out;
    for (double t : spec.t_grid) {
      const double r = cfg.radius_at(t);
      const double scale = std::pow(t, ctx.dim);
      const PointCloud snap = support_snapshot(*run, t);
      VolumeEstimate est;
      try {
        switch (method) {
          case VolumeMethod::Exact1d: est = volume_exact_1d(snap, r); break;
          case VolumeMethod::Voxel: est = volume_voxel(snap, r, voxel_for(spec, r)); break;
          default: est = volume_mc(snap, r, spec.samples, ctx.mc_seed(t, i, "volume"), workers); break;
        }
      } catch (const GeometryBudgetError&) {
        out.push_back(ctx.budget_row(t, i, 0.0));
        continue;
      }
      out.push_back(ctx.row(t, i, std::string(to_string(method)), est.value / scale, est.std_error / scale, theory));
    }
    return out;
  });
  append_means(ctx, rows);
  return rows;
}

Rows run_d1_law(const Context& ctx) {
  const auto& spec = ctx.spec;
  const double beta = spec.config.beta;
  const double k = spec.config.k;
  const double sausage_limit = theory::limit_sausage(1, beta, k).value;
  const double enlargement_limit = theory::limit_enlargement(1, beta, k).value;
  Rows rows = over_seeds(ctx, ctx.run_config(0, PathResolution::Bridge).expected_points(),
                         [&](std::int64_t i, unsigned workers) {
    Rows out;
    const SimConfig cfg = ctx.run_config(i, PathResolution::Bridge);
    const auto run = simulate_or_flag(ctx, cfg, workers, i, out);
    if (!run) return out;
    const std::uint64_t bridge_seed = stats::derive_stream(cfg.seed, "bridge");
    for (double t : spec.t_grid) {
      const double r = cfg.radius_at(t);
      const PathSet set = path_set(*run, t, bridge_seed);
      out.push_back(ctx.row(t, i, "exact1d", chord_hull_length(set, r) / t, 0.0, sausage_limit));
      out.push_back(ctx.row(t, i, "exact1d_outer", chord_hull_length(set, r + 3.0 * std::sqrt(cfg.dt)) / t, 0.0,
                            sausage_limit));
      const auto snap = volume_exact_1d(support_snapshot(*run, t), r);
      out.push_back(ctx.row(t, i, "exact1d_enlargement", snap.value / t, 0.0, enlargement_limit));
    }
    return out;
  });
  append_means(ctx, rows);
  return rows;
}

Rows run_wiener_sausage(const Context& ctx) {
  const auto& spec = ctx.spec;
  const SimConfig& c = spec.config;
  const bool fixed = c.k == 0.0;
  const double r_min = c.radius_at(ctx.t_max);
  const bool bridge = ctx.dim >= 2 && ctx.use_bridge(r_min);
  const double points = ctx.t_max / c.dt + 1.0;
  auto theory_at = [&](double t) -> std::optional<double> {
    if (fixed) {
      if (ctx.dim == 2 && t <= 1.0) return std::nullopt;
      return theory::expected_wiener_sausage(ctx.dim, c.r0, t).value;
    }
    return theory::expected_shrinking_sausage(ctx.dim, c.beta, c.k, c.r0, t).value;
  };
  const VolumeMethod method =
      ctx.dim == 1 ? VolumeMethod::Exact1d : ctx.method_or(bridge ? VolumeMethod::Mc : VolumeMethod::McBall);
  if (bridge && method != VolumeMethod::Mc) {
    throw ConfigError("wiener_sausage: bridge refinement supports only the mc estimator");
  }

  Rows rows = over_seeds(ctx, points, [&](std::int64_t i, unsigned workers) {
    Rows out;
    if (points > static_cast<double>(c.max_points)) {
      for (double t : spec.t_grid) out.push_back(ctx.budget_row(t, i, points));
      return out;
    }
    const std::uint64_t key = stats::derive_stream(c.seed, {stats::hash_label("wiener"), static_cast<std::uint64_t>(i)});
    const Point origin{};
    const BrownianPath path = simulate_brownian_path(
        std::span<const double>(origin.data(), static_cast<std::size_t>(ctx.dim)), ctx.t_max, c.dt, key);
    const PointCloud cloud(ctx.dim, path.coords);
    const double step = 3.0 * std::sqrt(ctx.dim * c.dt);
    for (double t : spec.t_grid) {
      const double r = fixed ? c.r0 : c.radius_at(t);
      const auto m = static_cast<std::size_t>(
          std::upper_bound(path.times.begin(), path.times.end(), t + time_tolerance(t)) - path.times.begin());
      PathView prefix = path.view();
      prefix.times = prefix.times.first(m);
      prefix.coords = prefix.coords.first(m * static_cast<std::size_t>(ctx.dim));
      const std::uint64_t seed = ctx.mc_seed(t, i, "volume");
      const auto th = theory_at(t);
      if (ctx.dim == 1) {
        const PathSet set = path_set(prefix, key);
        out.push_back(ctx.row(t, i, "exact1d", chord_hull_length(set, r), 0.0, th));
        continue;
      }
      if (bridge) {
        const PathSausage sausage(path_set(prefix, stats::derive_stream(key, "bridge")),
                                  {r, r * (1.0 + 3.0 * c.eta), c.eta * r});
        const auto br = volume_mc_bracket(sausage, spec.samples, seed, workers);
        out.push_back(ctx.row(t, i, "mc_inner", br.inner.value, br.inner.std_error, th));
        out.push_back(ctx.row(t, i, "mc_outer", br.outer.value, br.outer.std_error, th));
        continue;
      }
      if (method == VolumeMethod::McBall) {
        const BallUnion balls(cloud, r);
        const auto est = volume_mc_balls(balls, m, spec.samples, seed, workers);
        out.push_back(ctx.row(t, i, "mcball", est.value, est.std_error, th));
        continue;
      }
      const PointCloud sub(ctx.dim, std::vector<double>(prefix.coords.begin(), prefix.coords.end()));
      if (method == VolumeMethod::Voxel) {
        try {
          const auto est = volume_voxel(sub, r, voxel_for(spec, r));
          out.push_back(ctx.row(t, i, "voxel", est.value, est.std_error, th));
        } catch (const GeometryBudgetError&) {
          out.push_back(ctx.budget_row(t, i, 0.0));
        }
        continue;
      }
      const BallUnion balls(sub, r, r + step);
      const auto br = volume_mc_bracket(balls, spec.samples, seed, workers);
      out.push_back(ctx.row(t, i, "mc_inner", br.inner.value, br.inner.std_error, th));
      out.push_back(ctx.row(t, i, "mc_outer", br.outer.value, br.outer.std_error, th));
    }
    return out;
  });
  append_means(ctx, rows);
  if (fixed && ctx.dim >= 3) {
    const std::string primary = ctx.dim >= 2 && !bridge && method == VolumeMethod::McBall ? "mcball"
                                : method == VolumeMethod::Voxel                          ? "voxel"
                                                                                         : "mc_inner";
    append_slope(ctx, rows, primary + "_mean", "slope", false, theory::newtonian_capacity(ctx.dim, c.r0).value);
  }
  return rows;
}

Rows run_hitting(const Context& ctx) {
  const auto& spec = ctx.spec;
  const SimConfig& c = spec.config;
  const double R = spec.start_radius;
  Point start{};
  start[0] = R;
  const Point origin{};
  const auto d = static_cast<std::size_t>(ctx.dim);
  const std::span<const double> target(origin.data(), d);
  const std::size_t nt = spec.t_grid.size();

  std::vector<PathSausage::Options> options;
  for (double t : spec.t_grid) {
    const double r = c.radius_at(t);
    options.push_back({r, r * (1.0 + 3.0 * c.eta), c.eta * r});
  }
  const auto n = spec.paths;
  const std::size_t chunks = static_cast<std::size_t>((n + kMcChunk - 1) / kMcChunk);
  // counts[chunk][t] = {inner hits, outer hits}
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> counts(chunks);
  parallel_for(chunks, spec.workers, [&](std::size_t ch) {
    auto& local = counts[ch];
    local.assign(nt, {0, 0});
    const std::int64_t begin = static_cast<std::int64_t>(ch) * kMcChunk;
    const std::int64_t end = std::min<std::int64_t>(n, begin + kMcChunk);
    for (std::int64_t p = begin; p < end; ++p) {
      const std::uint64_t key =
          stats::derive_stream(c.seed, {stats::hash_label("hitting"), static_cast<std::uint64_t>(p)});
      const BrownianPath path = simulate_brownian_path(std::span<const double>(start.data(), d), 1.0, c.dt, key);
      const PathSet set = path_set(path.view(), stats::derive_stream(key, "bridge"));
      for (std::size_t j = 0; j < nt; ++j) {
        const int level = PathSausage(set, options[j]).classify(target);
        if (level == 2) ++local[j].first;
        if (level >= 1) ++local[j].second;
      }
    }
  });
  Rows rows;
  for (std::size_t j = 0; j < nt; ++j) {
    const double t = spec.t_grid[j];
    std::int64_t in = 0, out = 0;
    for (const auto& local : counts) {
      in += local[j].first;
      out += local[j].second;
    }
    std::optional<double> th;
    try {
      th = theory::hitting_prob_shrinking(ctx.dim, R, c.r0, c.beta, c.k, t).value;
    } catch (const std::invalid_argument&) {
      th = std::nullopt;
    }
    const auto ci_in = stats::proportion_ci(in, n, spec.confidence);
    const auto ci_out = stats::proportion_ci(out, n, spec.confidence);
    rows.push_back(ctx.row(t, -1, "inner", ci_in.mean, ci_in.std_error, th));
    rows.push_back(ctx.row(t, -1, "outer", ci_out.mean, ci_out.std_error, th));
  }
  return rows;
}

Rows run_coverage(const Context& ctx) {
  const auto& spec = ctx.spec;
  const bool bridge = ctx.use_bridge(spec.config.radius_at(ctx.t_max));
  const Point origin{};
  const std::span<const double> center(origin.data(), static_cast<std::size_t>(ctx.dim));
  Rows rows = over_seeds(ctx, ctx.run_config(0, PathResolution::Bridge).expected_points(),
                         [&](std::int64_t i, unsigned workers) {
    Rows out;
    const SimConfig cfg = ctx.run_config(i, bridge ? PathResolution::Bridge : PathResolution::Grid);
    const auto run = simulate_or_flag(ctx, cfg, workers, i, out);
    if (!run) return out;
    const std::uint64_t bridge_seed = stats::derive_stream(cfg.seed, "bridge");
    for (double t : spec.t_grid) {
      const double r = cfg.radius_at(t);
      const double rho = spec.theta * std::sqrt(2.0 * cfg.beta) * t;
      auto emit = [&](const std::string& method, const CoverageProbe& probe) {
        out.push_back(ctx.row(t, i, method, probe.miss_fraction, binomial_se(probe.miss_fraction, probe.n_probes),
                              std::nullopt));
      };
      if (!(rho > 0.0)) {
        emit("sausage_miss", {true, 0.0, spec.samples});
        emit("enlargement_miss", {true, 0.0, spec.samples});
        continue;
      }
      const std::uint64_t seed = ctx.mc_seed(t, i, "probe");
      if (bridge) {
        const PathSausage sausage(path_set(*run, t, bridge_seed), {r, r, cfg.eta * r});
        emit("sausage_miss", covers_ball(sausage, center, rho, spec.samples, seed, workers));
      } else {
        const PointCloud cloud = range_skeleton(*run, 0.0, t);
        emit("sausage_miss", covers_ball(cloud, r, center, rho, spec.samples, seed, workers));
      }
      const PointCloud snap = support_snapshot(*run, t);
      emit("enlargement_miss",
           covers_ball(snap, r, center, rho, spec.samples, ctx.mc_seed(t, i, "probe_enlargement"), workers));
    }
    return out;
  });
  append_means(ctx, rows);
  return rows;
}

Rows run_trap_survival(const Context& ctx) {
  const auto& spec = ctx.spec;
  const double r = spec.trap_radius;
  const double lambda = spec.lambda;
  const bool bridge = ctx.use_bridge(r);
  Rows rows = over_seeds(ctx, ctx.run_config(0, PathResolution::Bridge).expected_points(),
                         [&](std::int64_t i, unsigned workers) {
    Rows out;
    const SimConfig cfg = ctx.run_config(i, PathResolution::Bridge);
    const auto run = simulate_or_flag(ctx, cfg, workers, i, out);
    if (!run) return out;
    const std::uint64_t bridge_seed = stats::derive_stream(cfg.seed, "bridge");
    for (double t : spec.t_grid) {
      auto measure = [&](const auto& set) {
        const auto vol = volume_mc(set, spec.samples, ctx.mc_seed(t, i, "volume"), workers);
        const double fubini = std::exp(-lambda * vol.value);
        out.push_back(ctx.row(t, i, "fubini", fubini, lambda * fubini * vol.std_error, std::nullopt));

        const Box box = set.sampling_box();
        const double mean_traps = box.is_empty() ? 0.0 : lambda * box.volume();
        std::vector<std::uint8_t> survived(static_cast<std::size_t>(spec.trap_fields), 0);
        const std::uint64_t trap_seed = ctx.mc_seed(t, i, "traps");
        parallel_for(survived.size(), workers, [&](std::size_t f) {
          stats::CounterRng rng(stats::derive_stream(trap_seed, {f}));
          const std::uint64_t traps = stats::poisson(rng, mean_traps);
          Point p{};
          for (std::uint64_t q = 0; q < traps; ++q) {
            for (int j = 0; j < ctx.dim; ++j) p[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * rng.uniform();
            if (set.contains(std::span<const double>(p.data(), static_cast<std::size_t>(ctx.dim)))) return;
          }
          survived[f] = 1;
        });
        const auto alive = std::count(survived.begin(), survived.end(), std::uint8_t{1});
        const double frac = static_cast<double>(alive) / static_cast<double>(spec.trap_fields);
        out.push_back(ctx.row(t, i, "direct", frac, binomial_se(frac, spec.trap_fields), std::nullopt));
      };
      if (bridge) {
        measure(PathSausage(path_set(*run, t, bridge_seed), {r, r, cfg.eta * r}));
      } else {
        const PointCloud cloud = range_skeleton(*run, 0.0, t);
        measure(BallUnion(cloud, r));
      }
    }
    return out;
  });
  append_means(ctx, rows);
  return rows;
}

Rows run_population_growth(const Context& ctx) {
  const auto& spec = ctx.spec;
  const double beta = spec.config.beta;
  Rows rows = over_seeds(ctx, ctx.run_config(0, PathResolution::Bridge).expected_points(),
                         [&](std::int64_t i, unsigned workers) {
    Rows out;
    const SimConfig cfg = ctx.run_config(i, PathResolution::Bridge);
    const auto run = simulate_or_flag(ctx, cfg, workers, i, out);
    if (!run) return out;
    for (double t : spec.t_grid) {
      out.push_back(ctx.row(t, i, "count", static_cast<double>(population_count(*run, t)), 0.0, std::exp(beta * t)));
    }
    return out;
  });
  append_means(ctx, rows);
  append_slope(ctx, rows, "count_mean", "log_slope", true, beta);
  return rows;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const char* column) {
  // strtod, not stod: subnormals set ERANGE but still parse exactly.
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  const bool overflow = errno == ERANGE && std::isinf(v);
  if (s.empty() || std::isspace(static_cast<unsigned char>(s.front())) || end != s.c_str() + s.size() || overflow) {
    throw std::runtime_error(std::string("read_csv: bad ") + column + " '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string_view to_string(Experiment e) { return kNames[static_cast<int>(e)]; }

Experiment parse_experiment(std::string_view s) {
  for (std::size_t i = 0; i < std::size(kNames); ++i)
    if (kNames[i] == s) return static_cast<Experiment>(i);
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (std::size_t i = 0; i < std::size(kNames); ++i) v.push_back(static_cast<Experiment>(i));
    return v;
  }();
  return all;
}

std::string_view to_string(PathModel m) {
  switch (m) {
    case PathModel::Auto: return "auto";
    case PathModel::Skeleton: return "skeleton";
    case PathModel::Bridge: return "bridge";
  }
  return "?";
}

PathModel parse_path_model(std::string_view s) {
  if (s == "auto") return PathModel::Auto;
  if (s == "skeleton") return PathModel::Skeleton;
  if (s == "bridge") return PathModel::Bridge;
  throw ConfigError("unknown path model '" + std::string(s) + "'");
}

void ExperimentSpec::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  const SimConfig& c = config;
  const int d = c.dimension;
  if (d < 1 || d > kMaxDim) fail("dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  if (!(c.beta > 0.0) || !(c.r0 > 0.0) || !(c.k >= 0.0) || !(c.dt > 0.0) || !(c.eta > 0.0)) {
    fail("need beta > 0, r0 > 0, k >= 0, dt > 0, eta > 0");
  }
  if (t_grid.empty()) fail("t grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!std::isfinite(t_grid[i]) || t_grid[i] < 0.0) fail("t grid values must be finite and >= 0");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) fail("t grid must be strictly increasing");
  }
  if (name != Experiment::PopulationGrowth && !(t_grid.front() > 0.0)) fail("t grid values must be > 0");
  if (n_seeds < 1) fail("need at least one seed");
  if (!(confidence > 0.0 && confidence < 1.0)) fail("confidence must lie in (0, 1)");
  if (estimator == VolumeMethod::Exact1d && d != 1) fail("the exact1d estimator needs d = 1");
  if (estimator == VolumeMethod::McBall && name != Experiment::WienerSausage) {
    fail("the mcball estimator is only available for wiener_sausage");
  }
  if (voxel < 0.0) fail("voxel must be >= 0");

  const bool uses_mc = name != Experiment::D1Law && name != Experiment::PopulationGrowth &&
                       name != Experiment::Hitting && d >= 2;
  if (uses_mc && name != Experiment::Coverage && samples < 1000) fail("samples must be >= 1000");
  if (name == Experiment::Coverage && samples < 1) fail("samples (probes) must be >= 1");

  const double t_max = t_grid.back();
  if (name == Experiment::Hitting) {
    if (d < 2) fail("hitting needs d >= 2");
    if (!(c.k > 0.0)) fail("hitting needs k > 0");
    if (!(start_radius > 0.0)) fail("hitting needs R > 0");
    if (paths < 1) fail("hitting needs at least one path");
    if (c.dt > 1.0) fail("hitting needs dt <= 1 (unit time window)");
    for (double t : t_grid) {
      if (!(c.radius_at(t) < start_radius)) fail("hitting needs r(t) < R for every t (start outside the ball)");
    }
    return;
  }
  if (t_max > 0.0 && c.dt > t_max) fail("dt must not exceed the largest grid time");
  if (name == Experiment::D1Law && d != 1) fail("d1_law needs d = 1");
  if (name == Experiment::Coverage && !(theta >= 0.0)) fail("theta must be >= 0");
  if (name == Experiment::TrapSurvival) {
    if (!(lambda >= 0.0)) fail("lambda must be >= 0");
    if (!(trap_radius > 0.0)) fail("trap radius must be positive");
    if (trap_fields < 1) fail("need at least one trap field per seed");
  }
  if (name != Experiment::WienerSausage) {
    // Snapshots and windows are taken at stored grid times.
    for (double t : t_grid) {
      const double g = std::round(t / c.dt) * c.dt;
      if (std::fabs(g - t) > time_tolerance(t) && t != t_max) fail("every t must be a multiple of dt");
    }
  }
}

ExperimentSpec default_spec(Experiment name) {
  ExperimentSpec s;
  s.name = name;
  SimConfig& c = s.config;
  switch (name) {
    case Experiment::SausageScaling:
      c.dimension = 2;
      c.k = 0.5;
      c.dt = 0.05;  // coarse grid; bridges refine to the resolution rule
      s.samples = 20'000;
      break;
    case Experiment::EnlargementScaling:
      c.dimension = 2;
      c.k = 0.25;
      c.dt = 0.05;
      break;
    case Experiment::D1Law:
      c.dimension = 1;
      c.k = 0.5;
      c.dt = 0.02;
      s.n_seeds = 20;
      break;
    case Experiment::WienerSausage:
      c.dimension = 3;
      c.r0 = 0.5;
      c.dt = 0.001;  // coarser skeletons bias the slope low by several percent
      s.t_grid = {50.0, 100.0, 150.0, 200.0};
      s.n_seeds = 2000;
      s.samples = 1000;
      break;
    case Experiment::Hitting:
      c.dimension = 2;
      c.k = 1.0;
      s.start_radius = std::numbers::sqrt2;
      s.t_grid = {6.0};
      s.paths = 1'000'000;
      break;
    case Experiment::Coverage:
      c.dimension = 2;
      c.k = 0.5;
      c.dt = 0.05;
      s.t_grid = {10.0};
      s.samples = 10'000;
      break;
    case Experiment::TrapSurvival:
      c.dimension = 2;
      c.dt = 0.005;
      s.t_grid = {4.0};
      s.n_seeds = 200;
      s.samples = 20'000;
      break;
    case Experiment::PopulationGrowth:
      c.dimension = 1;
      c.dt = 0.1;
      s.t_grid = {2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
      s.n_seeds = 500;
      break;
  }
  return s;
}

std::uint64_t run_seed(std::uint64_t root, std::int64_t seed_index) {
  return stats::derive_stream(root, "run", static_cast<std::uint64_t>(seed_index));
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const Context ctx{spec, std::string(to_string(spec.name)), spec.config.dimension, spec.t_grid.back()};
  Rows rows;
  switch (spec.name) {
    case Experiment::SausageScaling: rows = run_sausage_scaling(ctx); break;
    case Experiment::EnlargementScaling: rows = run_enlargement_scaling(ctx); break;
    case Experiment::D1Law: rows = run_d1_law(ctx); break;
    case Experiment::WienerSausage: rows = run_wiener_sausage(ctx); break;
    case Experiment::Hitting: rows = run_hitting(ctx); break;
    case Experiment::Coverage: rows = run_coverage(ctx); break;
    case Experiment::TrapSurvival: rows = run_trap_survival(ctx); break;
    case Experiment::PopulationGrowth: rows = run_population_growth(ctx); break;
  }
  sort_rows(rows);
  return rows;
}

bool has_budget_error(const std::vector<ResultRow>& rows) {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.method == kBudgetExceededMethod; });
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "experiment,t,seed,method,value,stderr,theory,ratio\n";
  for (const ResultRow& r : rows) {
    out << r.experiment << ',' << format_double(r.t) << ',' << r.seed << ',' << r.method << ','
        << format_double(r.value) << ',' << format_double(r.std_error) << ','
        << (r.theory ? format_double(*r.theory) : "") << ',' << (r.ratio ? format_double(*r.ratio) : "") << '\n';
  }
}

std::vector<ResultRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "experiment,t,seed,method,value,stderr,theory,ratio") {
    throw std::runtime_error("read_csv: missing or unexpected header");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != 8) throw std::runtime_error("read_csv: expected 8 columns in '" + line + "'");
    ResultRow r;
    r.experiment = cells[0];
    r.t = parse_double(cells[1], "t");
    const auto [ptr, ec] = std::from_chars(cells[2].data(), cells[2].data() + cells[2].size(), r.seed);
    if (ec != std::errc() || ptr != cells[2].data() + cells[2].size()) {
      throw std::runtime_error("read_csv: bad seed '" + cells[2] + "'");
    }
    r.method = cells[3];
    r.value = parse_double(cells[4], "value");
    r.std_error = parse_double(cells[5], "stderr");
    if (!cells[6].empty()) r.theory = parse_double(cells[6], "theory");
    if (!cells[7].empty()) r.ratio = parse_double(cells[7], "ratio");
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_json(std::ostream& out, const std::vector<ResultRow>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const ResultRow& r : rows) {
    nlohmann::json j{{"experiment", r.experiment}, {"t", r.t},           {"seed", r.seed},
                     {"method", r.method},         {"value", r.value},   {"stderr", r.std_error},
                     {"theory", nullptr},          {"ratio", nullptr}};
    if (r.theory) j["theory"] = *r.theory;
    if (r.ratio) j["ratio"] = *r.ratio;
    doc.push_back(std::move(j));
  }
  out << doc.dump(2) << '\n';
}

std::string gnuplot_script(const std::vector<ResultRow>& rows, const std::string& data_file) {
  std::vector<std::string> methods;
  bool any_theory = false;
  std::string experiment = rows.empty() ? "experiment" : rows.front().experiment;
  for (const ResultRow& r : rows) {
    if (r.seed != -1 || r.method == kBudgetExceededMethod) continue;
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    any_theory = any_theory || r.theory.has_value();
  }
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set key left top\n"
     << "set xlabel 't'\n"
     << "set ylabel 'value'\n"
     << "set title '" << experiment << "'\n"
     << "set terminal pngcairo size 900,600\n"
     << "set output '" << experiment << ".png'\n";
  if (methods.empty()) {
    gp << "plot '" << data_file << "' skip 1 using 2:5 with points title 'value'\n";
    return gp.str();
  }
  gp << "plot ";
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) gp << ", \\\n     ";
    gp << "'" << data_file << "' skip 1 using 2:(strcol(4) eq '" << methods[i]
       << "' ? $5 : 1/0):(strcol(4) eq '" << methods[i] << "' ? $6 : 1/0) with yerrorlines title '" << methods[i]
       << "'";
  }
  if (any_theory) {
    gp << ", \\\n     '" << data_file << "' skip 1 using 2:(strcol(4) eq '" << methods.front()
       << "' ? $7 : 1/0) with lines dashtype 2 title 'theory'";
  }
  gp << '\n';
  return gp.str();
}

}  // namespace bbm
