#pragma once

// Experiment configuration and the commands behind the dynlaw CLI.

#include "dynlaw/als.hpp"
#include "dynlaw/io.hpp"
#include "dynlaw/systems.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dynlaw {

/// Exit codes of every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// "planted" draws the ground truth from the model class itself.
struct ExperimentConfig {
  Json raw;
  std::string system;  // fput, dipole, lj, planted
  std::size_t d = 0;
  SystemSpec spec;     // unused for planted
  std::optional<std::vector<Interval>> intervals;
  std::string dictionary = "legendre";
  int degree = 3;
  int lambda = 3;
  std::size_t rho = 2;
  int L = 1;
  TrainOptions train;
  std::vector<std::size_t> M;
  std::vector<double> sigma;
  std::uint64_t seed = 0;
  std::size_t residuum_samples = kDefaultResiduumSamples;
  std::filesystem::path out_dir = "out";

  void validate() const;
};

/// Throws ConfigError on unknown fields values, empty grids or bad shapes.
ExperimentConfig parse_config(const Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Per-purpose seeds derived from the master seed.
struct SeedPlan {
  std::uint64_t data;
  std::uint64_t init;
  std::uint64_t eval;
  std::uint64_t truth;
  static SeedPlan from(std::uint64_t master);
};

/// Everything a config implies: sampler, dictionary, truth law and the
/// initial model.
class Experiment {
public:
  explicit Experiment(ExperimentConfig config);

  const ExperimentConfig& config() const noexcept { return cfg_; }
  const SeedPlan& seeds() const noexcept { return seeds_; }
  SamplerSpec sampler(double sigma) const;
  Dictionary dictionary() const;
  SelectionTable table() const;
  /// Ground truth on a batch of states (transformed targets for
  /// Lennard-Jones chains).
  Matrix truth(const Matrix& states) const;
  TrainingSet dataset(std::size_t M, double sigma) const;
  /// Restart 0 draws from the init seed; later restarts redraw from its
  /// substreams.
  ModelEnsemble initial_model(int restart) const;
  std::uint64_t restart_seed(int restart) const;
  /// Residuum of the model on fresh evaluation samples.
  double residuum(const ModelEnsemble& model) const;
  /// sigma * sqrt(M' d) / ||f|| on the evaluation samples.
  double relative_noise_level(double sigma) const;
  /// The planted ensemble; empty unless system == "planted".
  const std::optional<ModelEnsemble>& planted() const noexcept { return planted_; }

private:
  ExperimentConfig cfg_;
  SeedPlan seeds_;
  std::optional<ModelEnsemble> planted_;
};

struct CellSpec {
  std::size_t M = 0;
  double sigma = 0.0;
  int restart = 0;
};

struct CellResult {
  ResultRow row;
  TrainHistory history;
  std::optional<ModelEnsemble> model;
};

/// Hash of the config (without output paths) and the cell coordinates.
std::string cell_hash(const ExperimentConfig& cfg, const CellSpec& cell);

/// Generates, trains one restart and evaluates one cell. NumericalError
/// becomes status "numerical_error".
CellResult run_cell(const Experiment& exp, const CellSpec& cell);

struct CommandArgs {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::size_t threads = 1;
  std::filesystem::path dataset;
  std::filesystem::path model;
  bool quiet = false;
  bool csv = false;
};

int cmd_generate(const CommandArgs& args);
int cmd_train(const CommandArgs& args);
int cmd_evaluate(const CommandArgs& args);
int cmd_sweep(const CommandArgs& args);
int cmd_exact(const CommandArgs& args);
int cmd_diagnose(const CommandArgs& args);

/// Witness report for fput or dipole systems: per-component ranks, the
/// worst relative error at random states, labelled-train ranks against
/// their bounds.
Json exact_report(const ExperimentConfig& cfg, std::size_t samples = 1000);

/// Interface spectra of every component of a model.
Json diagnose_report(const ModelEnsemble& model, double rel_tol = 1e-10);

} // namespace dynlaw
