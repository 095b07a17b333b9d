#pragma once

// Block-sparse alternating least squares over a shared-core ensemble, with
// block-diagonal gauge fixing of left neighbours that were fit in a
// different gauge.

#include "dynlaw/selection.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dynlaw {

struct TrainingSet {
  Matrix X;  // M x d states
  Matrix Y;  // M x d targets
  std::vector<Interval> domains;

  std::size_t samples() const noexcept { return static_cast<std::size_t>(X.rows()); }
  std::size_t modes() const noexcept { return static_cast<std::size_t>(X.cols()); }

  /// Throws InputError on empty, mis-shaped or non-finite data.
  void validate() const;
};

struct TrainOptions {
  int max_sweeps = 10;
  double loss_rel_tol = 1e-8;
  /// Proximal weight pulling each solve toward the incoming core, relative to
  /// each design column's squared norm.
  double ridge = 1e-10;
  std::uint64_t seed = 0;
  int restarts = 1;
  /// Rows per factorisation chunk when stacking samples.
  std::size_t chunk_rows = 8192;
  /// Keep the incoming core when a step would raise its own loss.
  bool revert_on_increase = true;
  /// Local steps with at least this many free parameters solve ridge-regularised
  /// normal equations (with one refinement step) instead of a QR factorisation.
  std::size_t normal_equations_from = 1024;

  void validate() const;
};

struct StepRecord {
  int sweep = 0;
  int step = 0;
  std::size_t ell = 0;
  int type = 0;
  std::string kind;      // "als" or "gauge"
  int left_type = 0;     // gauge steps: type of the re-gauged left core
  double loss_before = 0.0;
  double restricted_loss = 0.0;
  double full_loss = 0.0;  // full loss at the end of the step's sweep
  double proposed_loss = 0.0;  // restricted loss of the solve, kept or reverted
  double target_energy = 0.0;  // sum over E of squared targets
  double millis = 0.0;
  std::string flags;     // ';'-separated: min_norm, ridge_fallback, reverted, empty_set
};

struct TrainHistory {
  std::vector<StepRecord> steps;
  std::vector<double> sweep_loss;  // full empirical loss after each sweep
  std::vector<double> sweep_seconds;
  bool converged = false;
  int restart = 0;
  std::uint64_t seed = 0;
  std::vector<double> restart_losses;
  double seconds = 0.0;
};

struct StepOutcome {
  double loss_before = 0.0;
  double loss_after = 0.0;
  double proposed_loss = 0.0;
  double target_energy = 0.0;
  std::string flags;
};

struct GaugeOutcome : StepOutcome {
  /// One s x s matrix per label of the interface between l-1 and l.
  std::vector<Matrix> blocks;
};

struct TrainResult {
  ModelEnsemble model;
  TrainHistory history;
};

/// True when `after` exceeds `before` by more than the rounding scale of a
/// residual sum of squares with the given target energy.
bool loss_increased(double before, double after, double target_energy) noexcept;

/// Sum over samples and components e in E (1-based) of squared residuals.
double restricted_loss(const ModelEnsemble& ens, const TrainingSet& data, std::span<const std::size_t> E,
                       bool* empty_set = nullptr);

double full_loss(const ModelEnsemble& ens, const TrainingSet& data);

/// Refits core (l, j) on components E with every other core fixed.
StepOutcome als_local_step(ModelEnsemble& ens, std::size_t l, int j, const TrainingSet& data,
                           std::span<const std::size_t> E, const TrainOptions& options = {});

/// Finds the block-diagonal U minimising the loss over E_a when core
/// (l-1, a) is replaced by C U, and applies it. All e in E_a must share the
/// same type at mode l and type a at mode l-1.
GaugeOutcome gauge_fix_step(ModelEnsemble& ens, std::size_t l, int a, const TrainingSet& data,
                            std::span<const std::size_t> Ea, const TrainOptions& options = {});

/// Sweeps until converged or max_sweeps; restarts beyond the first redraw
/// every core from a substream of options.seed and the best final loss wins.
TrainResult train(const ModelEnsemble& init, const TrainingSet& data, const TrainOptions& options);

/// Redraws all cores of an ensemble with the same patterns.
ModelEnsemble reinitialize(const ModelEnsemble& ens, std::uint64_t seed);

} // namespace dynlaw
