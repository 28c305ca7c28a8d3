// Command-line driver: one subcommand per experiment, plus `simulate` which
// dumps a single run in the binary run format.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bbm/bbm.hpp"
#include "bbm/experiments.hpp"
#include "bbm/run_io.hpp"

namespace {

enum ExitCode { kOk = 0, kInvalidConfig = 1, kBudgetExceeded = 2 };

struct Flags {
  int dim = 2;
  double beta = 1.0, k = 0.0, r0 = 1.0, dt = 0.01, eta = 0.25;
  std::vector<double> t_grid;
  int seeds = 1;
  std::uint64_t seed = 1;
  std::int64_t samples = 0;
  std::string estimator = "mc";
  std::string out = ".";
  std::string format = "csv";
  double theta = 0.7, lambda = 0.1, trap_radius = 0.5, R = 1.0, voxel = 0.0, confidence = 0.95;
  int trap_fields = 100;
  std::int64_t paths = 0;
  unsigned workers = 0;
  std::string path_model = "auto";
  std::uint64_t max_points = 5'000'000;
  double horizon = 1.0;
};

struct Options {
  CLI::Option *dim, *beta, *k, *r0, *dt, *eta, *t_grid, *seeds, *seed, *samples, *estimator, *theta,
      *lambda, *trap_radius, *trap_fields, *R, *paths, *workers, *path_model, *max_points, *voxel,
      *confidence;
};

template <class T>
void override(CLI::Option* opt, T& target, const T& value) {
  if (opt->count() > 0) target = value;
}

bbm::ExperimentSpec build_spec(bbm::Experiment name, const Flags& f, const Options& o) {
  bbm::ExperimentSpec s = bbm::default_spec(name);
  bbm::SimConfig& c = s.config;
  override(o.dim, c.dimension, f.dim);
  override(o.beta, c.beta, f.beta);
  override(o.k, c.k, f.k);
  override(o.r0, c.r0, f.r0);
  override(o.dt, c.dt, f.dt);
  override(o.eta, c.eta, f.eta);
  override(o.seed, c.seed, f.seed);
  override(o.max_points, c.max_points, f.max_points);
  override(o.t_grid, s.t_grid, f.t_grid);
  override(o.seeds, s.n_seeds, f.seeds);
  override(o.samples, s.samples, f.samples);
  override(o.theta, s.theta, f.theta);
  override(o.lambda, s.lambda, f.lambda);
  override(o.trap_radius, s.trap_radius, f.trap_radius);
  override(o.trap_fields, s.trap_fields, f.trap_fields);
  override(o.R, s.start_radius, f.R);
  override(o.paths, s.paths, f.paths);
  override(o.workers, s.workers, f.workers);
  override(o.voxel, s.voxel, f.voxel);
  override(o.confidence, s.confidence, f.confidence);
  if (o.estimator->count() > 0) s.estimator = bbm::parse_volume_method(f.estimator);
  if (o.path_model->count() > 0) s.path_model = bbm::parse_path_model(f.path_model);
  return s;
}

int run_experiment_command(bbm::Experiment name, const Flags& f, const Options& o) {
  const bbm::ExperimentSpec spec = build_spec(name, f, o);
  const auto rows = bbm::run_experiment(spec);
  const std::filesystem::path dir(f.out);
  std::filesystem::create_directories(dir);
  const std::string stem(bbm::to_string(name));
  const std::string data_name = stem + (f.format == "json" ? ".json" : ".csv");
  {
    std::ofstream data(dir / data_name);
    if (!data) throw std::runtime_error("cannot write " + (dir / data_name).string());
    if (f.format == "json") {
      bbm::write_json(data, rows);
    } else {
      bbm::write_csv(data, rows);
    }
  }
  if (f.format == "csv") {
    std::ofstream gp(dir / (stem + ".gp"));
    gp << bbm::gnuplot_script(rows, data_name);
  }
  std::cout << "wrote " << rows.size() << " rows to " << (dir / data_name).string() << '\n';
  if (bbm::has_budget_error(rows)) {
    std::cerr << "error: some runs exceeded the point budget (rows tagged " << bbm::kBudgetExceededMethod
              << "); shrink the horizon, raise dt or raise --max-points\n";
    return kBudgetExceeded;
  }
  return kOk;
}

int run_simulate_command(const Flags& f, const Options& o) {
  bbm::SimConfig c;
  c.dimension = f.dim;
  c.beta = f.beta;
  c.k = f.k;
  c.r0 = f.r0;
  c.dt = f.dt;
  c.eta = f.eta;
  c.seed = f.seed;
  c.max_points = f.max_points;
  c.horizon = f.horizon;
  c.resolution = f.path_model == "skeleton" ? bbm::PathResolution::Grid : bbm::PathResolution::Bridge;
  const bbm::BbmRun run = bbm::simulate(c, o.workers->count() ? f.workers : 0);
  const std::filesystem::path dir(f.out);
  std::filesystem::create_directories(dir);
  bbm::save_run(dir / "run.bin", run);
  std::cout << "simulated " << run.particles().size() << " particles, " << run.total_points()
            << " path points -> " << (dir / "run.bin").string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Branching Brownian motion sausage experiments"};
  app.set_config("--config", "", "key=value configuration file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  Options o{};
  o.dim = app.add_option("--dim", f.dim, "spatial dimension d")->check(CLI::Range(1, 8));
  o.beta = app.add_option("--beta", f.beta, "branching rate");
  o.k = app.add_option("--k", f.k, "radius decay exponent, r(t) = r0 exp(-beta k t)");
  o.r0 = app.add_option("--r0", f.r0, "initial radius");
  o.dt = app.add_option("--dt", f.dt, "path sampling step");
  o.eta = app.add_option("--eta", f.eta, "resolution factor in sqrt(d dt) <= eta r");
  o.t_grid = app.add_option("--t-grid", f.t_grid, "comma-separated times")->delimiter(',');
  o.seeds = app.add_option("--seeds", f.seeds, "number of seeds (replicates)");
  o.seed = app.add_option("--seed", f.seed, "root seed");
  o.samples = app.add_option("--samples", f.samples, "Monte Carlo samples per estimate");
  o.estimator = app.add_option("--estimator", f.estimator, "volume estimator")
                    ->check(CLI::IsMember({"mc", "voxel", "exact1d", "mcball"}));
  app.add_option("--out", f.out, "output directory");
  app.add_option("--format", f.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  o.theta = app.add_option("--theta", f.theta, "coverage radius factor");
  o.lambda = app.add_option("--lambda", f.lambda, "trap intensity");
  o.trap_radius = app.add_option("--trap-radius", f.trap_radius, "trap radius");
  o.trap_fields = app.add_option("--trap-fields", f.trap_fields, "Poisson trap fields per seed");
  o.R = app.add_option("--R", f.R, "hitting: distance of the start point from the origin");
  o.paths = app.add_option("--paths", f.paths, "hitting: number of Brownian paths");
  o.workers = app.add_option("--workers", f.workers, "worker threads (0 = all cores)");
  o.path_model = app.add_option("--path-model", f.path_model, "path resolution model")
                     ->check(CLI::IsMember({"auto", "skeleton", "bridge"}));
  o.max_points = app.add_option("--max-points", f.max_points, "budget on stored path points");
  o.voxel = app.add_option("--voxel", f.voxel, "voxel edge (default radius/4)");
  o.confidence = app.add_option("--confidence", f.confidence, "confidence level of intervals");

  std::vector<std::pair<CLI::App*, bbm::Experiment>> commands;
  for (bbm::Experiment e : bbm::all_experiments()) {
    commands.emplace_back(app.add_subcommand(std::string(bbm::to_string(e)), "run the experiment"), e);
  }
  CLI::App* simulate_cmd = app.add_subcommand("simulate", "simulate one run and write run.bin");
  simulate_cmd->add_option("--horizon", f.horizon, "time horizon T");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidConfig;
  }

  try {
    if (*simulate_cmd) return run_simulate_command(f, o);
    for (const auto& [cmd, e] : commands) {
      if (*cmd) return run_experiment_command(e, f, o);
    }
  } catch (const bbm::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return kInvalidConfig;
  } catch (const bbm::BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << '\n';
    return kBudgetExceeded;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidConfig;
  }
  return kOk;
}
