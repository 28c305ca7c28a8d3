#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bbm/config.hpp"
#include "bbm/geometry.hpp"

namespace bbm {

enum class Experiment {
  SausageScaling,
  EnlargementScaling,
  D1Law,
  WienerSausage,
  Hitting,
  Coverage,
  TrapSurvival,
  PopulationGrowth,
};

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view s);
const std::vector<Experiment>& all_experiments();

/// How sampled paths are turned into sausages.
enum class PathModel {
  Auto,      // skeleton when the dt grid meets the resolution rule, else bridge
  Skeleton,  // balls on the stored samples only; requires the resolution rule
  Bridge,    // on-demand Brownian-bridge refinement down to eta * r
};

std::string_view to_string(PathModel m);
PathModel parse_path_model(std::string_view s);

struct ExperimentSpec {
  Experiment name = Experiment::SausageScaling;
  /// Model parameters. config.seed is the root seed; config.horizon is
  /// ignored (each run is simulated to the largest grid time).
  SimConfig config;
  std::vector<double> t_grid{6.0, 8.0, 10.0};
  int n_seeds = 10;
  /// Monte Carlo samples per volume estimate (or probes per coverage test).
  std::int64_t samples = 200'000;
  std::optional<VolumeMethod> estimator;
  /// Voxel edge for the voxel estimator; 0 means radius / 4.
  double voxel = 0.0;
  PathModel path_model = PathModel::Auto;
  unsigned workers = 0;
  double confidence = 0.95;

  double theta = 0.7;           // coverage: rho = theta * sqrt(2 beta) * t
  double lambda = 0.1;          // trap intensity
  double trap_radius = 0.5;
  int trap_fields = 100;        // Poisson trap fields per seed
  double start_radius = 1.0;    // hitting: |start| = R
  std::int64_t paths = 100'000; // hitting: Brownian paths per t

  /// Throws ConfigError.
  void validate() const;
};

/// Spec with the reference parameters of an experiment (dimension, rates,
/// time grid, seed and sample counts) filled in.
ExperimentSpec default_spec(Experiment name);

struct ResultRow {
  std::string experiment;
  double t = 0.0;
  std::int64_t seed = -1;  // -1 marks rows aggregated over seeds
  std::string method;
  double value = 0.0;
  double std_error = 0.0;
  std::optional<double> theory;
  std::optional<double> ratio;  // value / theory, only when theory != 0

  bool operator==(const ResultRow&) const = default;
};

/// Method tag of the row emitted in place of a measurement when a run would
/// exceed its point budget; the value column holds the offending estimate.
inline constexpr std::string_view kBudgetExceededMethod = "budget_exceeded";

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

bool has_budget_error(const std::vector<ResultRow>& rows);

/// Seed of the BBM run for a seed index. Independent of the experiment, so
/// experiments sharing a root seed and model parameters share their runs.
std::uint64_t run_seed(std::uint64_t root, std::int64_t seed_index);

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_csv(std::istream& in);
void write_json(std::ostream& out, const std::vector<ResultRow>& rows);

/// Gnuplot script plotting the aggregate rows of data_file against t.
std::string gnuplot_script(const std::vector<ResultRow>& rows, const std::string& data_file);

}  // namespace bbm
