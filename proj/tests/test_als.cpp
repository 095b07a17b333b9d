#include "support.hpp"

#include "dynlaw/als.hpp"
#include "dynlaw/errors.hpp"

#include <gtest/gtest.h>

#include <Eigen/QR>

using namespace dynlaw;
using namespace dynlaw::testing;

namespace {

std::vector<Interval> unit_domains(std::size_t d) { return std::vector<Interval>(d, Interval{-1.0, 1.0}); }

ModelEnsemble planted(std::size_t d, int L, int lambda, std::size_t rho, std::uint64_t seed, int degree = 2) {
  return make_ensemble(make_dictionary("monomial", degree, unit_domains(d)), local_selection_table(d, L), lambda, rho,
                       seed);
}

Matrix uniform_states(CounterRng& rng, std::size_t M, std::size_t d) {
  Matrix X(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.uniform(-1.0, 1.0);
  return X;
}

TrainingSet data_from(const ModelEnsemble& truth, const Matrix& X) {
  return TrainingSet{X, truth.evaluate_batch(X), truth.dictionary().domains()};
}

std::vector<std::size_t> all_components(std::size_t d) {
  std::vector<std::size_t> E(d);
  for (std::size_t k = 0; k < d; ++k) E[k] = k + 1;
  return E;
}

void perturb(BlockSparseCore& core, CounterRng& rng, double scale) {
  core.set_parameters(core.parameters() + scale * random_vector(rng, Eigen::Index(core.pattern().free_count())));
}

bool mask_holds(const ModelEnsemble& ens) {
  for (std::size_t l = 1; l <= ens.order(); ++l)
    for (int j = 1; j <= ens.alpha(); ++j) {
      const Core dense = ens.core(l, j).to_core();
      const auto mask = ens.pattern(l).dense_mask();
      for (std::size_t k = 0; k < mask.size(); ++k)
        if (!mask[k] && dense.data()[k] != 0.0) return false;
    }
  return true;
}

} // namespace

TEST(Als, PerfectModelHasZeroLoss) {
  CounterRng rng(1);
  const ModelEnsemble truth = planted(5, 1, 2, 2, 11);
  const TrainingSet data = data_from(truth, uniform_states(rng, 50, 5));
  const auto E = all_components(5);
  EXPECT_LE(restricted_loss(truth, data, E), 1e-18 * 50);
}

TEST(Als, FullComponentSetIsFullLoss) {
  CounterRng rng(2);
  const ModelEnsemble truth = planted(4, 1, 2, 2, 12);
  const ModelEnsemble other = planted(4, 1, 2, 2, 13);
  const TrainingSet data = data_from(truth, uniform_states(rng, 40, 4));
  const auto E = all_components(4);
  const Matrix diff = data.Y - other.evaluate_batch(data.X);
  EXPECT_NEAR(restricted_loss(other, data, E), diff.squaredNorm(), 1e-12 * diff.squaredNorm());
  EXPECT_NEAR(full_loss(other, data), diff.squaredNorm(), 1e-12 * diff.squaredNorm());
}

TEST(Als, HandArithmeticLoss) {
  // One mode, constant-only dictionary, core value 1: f_hat = 1.
  ModelEnsemble ens = make_ensemble(make_dictionary("monomial", 0, unit_domains(1)), local_selection_table(1, 0), 0, 1, 3);
  ens.core(1, 2).set_parameters(Vector::Ones(1));
  TrainingSet data{Matrix::Constant(1, 1, 0.2), Matrix::Constant(1, 1, 3.0), unit_domains(1)};
  const std::vector<std::size_t> E{1};
  EXPECT_DOUBLE_EQ(restricted_loss(ens, data, E), 4.0);
}

TEST(Als, EmptyComponentSetIsFlagged) {
  CounterRng rng(3);
  const ModelEnsemble truth = planted(3, 1, 2, 2, 14);
  const TrainingSet data = data_from(truth, uniform_states(rng, 10, 3));
  bool empty = false;
  EXPECT_EQ(restricted_loss(truth, data, std::span<const std::size_t>{}, &empty), 0.0);
  EXPECT_TRUE(empty);
}

TEST(Als, LocalStepRecoversGeneratorCore) {
  // Window wider than the chain: every core belongs to one component.
  CounterRng rng(4);
  const std::size_t d = 4;
  const ModelEnsemble truth = planted(d, 4, 2, 2, 15);
  const TrainingSet data = data_from(truth, uniform_states(rng, 400, d));
  for (double ridge : {0.0, 1e-10}) {
    ModelEnsemble ens = truth;
    const std::size_t l = 2;
    const int j = ens.table().at(3, l);
    perturb(ens.core(l, j), rng, 0.5);
    const auto usage = activation_usage(ens.table(), l, j);
    ASSERT_EQ(usage.components.size(), 1u);
    TrainOptions opts;
    opts.ridge = ridge;
    const StepOutcome out = als_local_step(ens, l, j, data, usage.components, opts);
    const double scale = data.Y.col(Eigen::Index(usage.components[0] - 1)).squaredNorm();
    EXPECT_GT(out.loss_before, 1e-3 * scale);
    EXPECT_LE(out.loss_after, 1e-16 * scale) << "ridge " << ridge;
    EXPECT_NEAR(restricted_loss(ens, data, usage.components), out.loss_after, 1e-12 * scale);
  }
}

TEST(Als, ZeroTargetsShrinkCore) {
  CounterRng rng(5);
  const std::size_t d = 3;
  ModelEnsemble ens = planted(d, 3, 2, 2, 16);
  TrainingSet data{uniform_states(rng, 300, d), Matrix::Zero(300, d), unit_domains(d)};
  const int j = ens.table().at(2, 2);
  const auto usage = activation_usage(ens.table(), 2, j);
  const double before = ens.core(2, j).parameters().norm();
  TrainOptions opts;
  opts.ridge = 1e-10;
  als_local_step(ens, 2, j, data, usage.components, opts);
  EXPECT_LE(ens.core(2, j).parameters().norm(), 1e-6 * before);
}

TEST(Als, UnderdeterminedFlagsMinimumNorm) {
  CounterRng rng(6);
  const std::size_t d = 3;
  const ModelEnsemble truth = planted(d, 3, 4, 3, 17, 4);
  ModelEnsemble ens = truth;
  const int j = ens.table().at(2, 2);
  ASSERT_GT(ens.pattern(2).free_count(), 3u);
  const TrainingSet data = data_from(truth, uniform_states(rng, 3, d));
  const auto usage = activation_usage(ens.table(), 2, j);
  TrainOptions opts;
  opts.ridge = 0.0;
  const StepOutcome out = als_local_step(ens, 2, j, data, usage.components, opts);
  EXPECT_NE(out.flags.find("min_norm"), std::string::npos);
}

TEST(Als, NormalEquationsMatchQr) {
  CounterRng rng(7);
  const std::size_t d = 4;
  const ModelEnsemble truth = planted(d, 4, 3, 3, 18, 3);
  Matrix X = uniform_states(rng, 600, d);
  TrainingSet data = data_from(truth, X);
  data.Y += 1e-3 * random_matrix(rng, data.Y.rows(), data.Y.cols());
  ModelEnsemble start = truth;
  const int j = start.table().at(2, 2);
  perturb(start.core(2, j), rng, 0.3);
  const auto usage = activation_usage(start.table(), 2, j);
  TrainOptions qr, ne;
  qr.normal_equations_from = std::numeric_limits<std::size_t>::max();
  ne.normal_equations_from = 1;
  ModelEnsemble a = start, b = start;
  const StepOutcome oa = als_local_step(a, 2, j, data, usage.components, qr);
  const StepOutcome ob = als_local_step(b, 2, j, data, usage.components, ne);
  EXPECT_NEAR(oa.loss_before, ob.loss_before, 1e-12 * oa.loss_before);
  EXPECT_NEAR(oa.loss_after, ob.loss_after, 1e-9 * oa.loss_after);
  const Vector pa = a.core(2, j).parameters(), pb = b.core(2, j).parameters();
  EXPECT_LE((pa - pb).norm(), 1e-6 * pa.norm());
}

TEST(Als, GaugeStepOnConsistentCores) {
  CounterRng rng(8);
  const std::size_t d = 4;
  ModelEnsemble ens = planted(d, 4, 2, 2, 19);
  const TrainingSet data = data_from(ens, uniform_states(rng, 200, d));
  const std::size_t l = 3;
  const int j = ens.table().at(2, l);
  const int a = ens.table().at(2, l - 1);
  const std::vector<std::size_t> Ea{2};
  const GaugeOutcome out = gauge_fix_step(ens, l, a, data, Ea);
  EXPECT_LE(out.loss_after, out.loss_before + 1e-12);
  EXPECT_LE(restricted_loss(ens, data, Ea), 1e-12 * data.Y.col(1).squaredNorm());
  (void)j;
}

TEST(Als, GaugeStepUndoesRotation) {
  CounterRng rng(9);
  const std::size_t d = 5;
  const ModelEnsemble truth = planted(d, 5, 3, 3, 20);
  const TrainingSet data = data_from(truth, uniform_states(rng, 400, d));
  ModelEnsemble ens = truth;
  const std::size_t k = 3, l = 3;
  const int a = ens.table().at(k, l - 1);
  BlockSparseCore& left = ens.core(l - 1, a);
  const InterfaceLabels& iface = left.pattern().right();
  std::vector<Matrix> Q;
  for (std::size_t s : iface.sizes) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, Eigen::Index(s), Eigen::Index(s)));
    Q.push_back(qr.householderQ() * Matrix::Identity(Eigen::Index(s), Eigen::Index(s)));
  }
  const auto& specs = left.pattern().blocks();
  for (std::size_t b = 0; b < specs.size(); ++b) left.blocks()[b] = left.blocks()[b] * Q[specs[b].col];
  const std::vector<std::size_t> Ea{k};
  const double scale = data.Y.col(Eigen::Index(k - 1)).squaredNorm();
  ASSERT_GT(restricted_loss(ens, data, Ea), 1e-6 * scale);
  const GaugeOutcome out = gauge_fix_step(ens, l, a, data, Ea);
  EXPECT_LE(out.loss_after, 1e-12 * scale);
  EXPECT_LE(restricted_loss(ens, data, Ea), 1e-12 * scale);
  for (std::size_t g = 0; g < Q.size(); ++g)
    EXPECT_LE((out.blocks[g] - Q[g].transpose()).norm(), 1e-6) << "label block " << g;
}

TEST(Als, GaugeStepKeepsZeroLoss) {
  CounterRng rng(10);
  ModelEnsemble ens = planted(4, 4, 2, 2, 21);
  const TrainingSet data = data_from(ens, uniform_states(rng, 100, 4));
  const std::vector<std::size_t> Ea{1};
  const GaugeOutcome out = gauge_fix_step(ens, 2, ens.table().at(1, 1), data, Ea);
  EXPECT_LE(out.loss_after, 1e-20 * data.Y.col(0).squaredNorm());
}

TEST(Als, GaugeStepRejectsBadArguments) {
  CounterRng rng(11);
  ModelEnsemble ens = planted(4, 1, 2, 2, 22);
  const TrainingSet data = data_from(ens, uniform_states(rng, 20, 4));
  const std::vector<std::size_t> Ea{1};
  EXPECT_THROW(gauge_fix_step(ens, 1, 1, data, Ea), IndexError);
  EXPECT_THROW(gauge_fix_step(ens, 2, 1, data, std::span<const std::size_t>{}), InputError);
  EXPECT_THROW(gauge_fix_step(ens, 2, 1, data, Ea), InputError);
}

TEST(Als, TrainRecoversSmallPlantedModel) {
  CounterRng rng(12);
  const ModelEnsemble truth = planted(4, 1, 2, 2, 23);
  const TrainingSet data = data_from(truth, uniform_states(rng, 300, 4));
  TrainOptions opts;
  opts.max_sweeps = 200;
  opts.loss_rel_tol = 0.0;
  opts.seed = 99;
  opts.restarts = 2;
  const ModelEnsemble init = reinitialize(truth, 1234);
  const TrainResult result = train(init, data, opts);
  EXPECT_LE(result.history.sweep_loss.back(), 1e-12 * data.Y.squaredNorm());
  EXPECT_EQ(result.history.restart_losses.size(), 2u);
  EXPECT_TRUE(mask_holds(result.model));
}

TEST(Als, TrainRejectsZeroSweeps) {
  CounterRng rng(13);
  const ModelEnsemble truth = planted(3, 1, 2, 2, 24);
  const TrainingSet data = data_from(truth, uniform_states(rng, 20, 3));
  TrainOptions opts;
  opts.max_sweeps = 0;
  EXPECT_THROW(train(truth, data, opts), ConfigError);
}

TEST(Als, TrainRejectsMismatchedData) {
  CounterRng rng(14);
  const ModelEnsemble truth = planted(3, 1, 2, 2, 25);
  TrainingSet data{uniform_states(rng, 20, 4), Matrix::Zero(20, 4), unit_domains(4)};
  EXPECT_THROW(train(truth, data, TrainOptions{}), DimensionError);
  data.Y(0, 0) = NAN;
  EXPECT_THROW(train(truth, data, TrainOptions{}), InputError);
}

TEST(Als, NoisyTargetsStayAboveNoiseFloor) {
  CounterRng rng(15);
  const ModelEnsemble truth = planted(5, 1, 2, 2, 26);
  TrainingSet data = data_from(truth, uniform_states(rng, 1000, 5));
  const Matrix noise = 0.05 * random_matrix(rng, 1000, 5);
  data.Y += noise;
  TrainOptions opts;
  opts.max_sweeps = 30;
  const TrainResult result = train(reinitialize(truth, 77), data, opts);
  for (double loss : result.history.sweep_loss) EXPECT_TRUE(std::isfinite(loss));
  EXPECT_GE(result.history.sweep_loss.back(), 0.5 * noise.squaredNorm());
}

TEST(Als, HistoryShape) {
  CounterRng rng(16);
  const ModelEnsemble truth = planted(5, 1, 2, 2, 27);
  const TrainingSet data = data_from(truth, uniform_states(rng, 200, 5));
  TrainOptions opts;
  opts.max_sweeps = 3;
  opts.loss_rel_tol = 0.0;
  const TrainResult result = train(reinitialize(truth, 5), data, opts);
  const auto& h = result.history;
  ASSERT_EQ(h.sweep_loss.size(), 3u);
  ASSERT_EQ(h.sweep_seconds.size(), 3u);
  for (const StepRecord& r : h.steps) {
    EXPECT_EQ(r.full_loss, h.sweep_loss[std::size_t(r.sweep - 1)]);
    EXPECT_TRUE(r.kind == "als" || r.kind == "gauge");
    if (r.kind == "gauge") EXPECT_GE(r.ell, 2u);
  }
  EXPECT_NEAR(h.sweep_loss.back(), full_loss(result.model, data), 1e-12 * (1.0 + h.sweep_loss.back()));
}

// Properties.

TEST(AlsProperty, LocalMonotonicityWithoutSafeguard) {
  CounterRng rng(100);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t d = random_int(rng, 3, 7);
    const int L = static_cast<int>(random_int(rng, 0, 2));
    const ModelEnsemble truth = planted(d, L, 2, 2, rng());
    TrainingSet data = data_from(truth, uniform_states(rng, 150, d));
    if (trial % 2) data.Y += 0.01 * random_matrix(rng, data.Y.rows(), data.Y.cols());
    TrainOptions opts;
    opts.max_sweeps = 5;
    opts.revert_on_increase = false;
    const TrainResult result = train(reinitialize(truth, rng()), data, opts);
    for (const StepRecord& r : result.history.steps) {
      EXPECT_LE(r.restricted_loss, r.loss_before * (1.0 + 1e-9) + 1e-300)
          << "trial " << trial << " sweep " << r.sweep << " step " << r.step << " " << r.kind;
      EXPECT_EQ(r.flags.find("reverted"), std::string::npos);
    }
    EXPECT_TRUE(mask_holds(result.model));
  }
}

TEST(AlsProperty, Determinism) {
  CounterRng rng(101);
  const ModelEnsemble truth = planted(6, 1, 2, 2, 31);
  const TrainingSet data = data_from(truth, uniform_states(rng, 200, 6));
  TrainOptions opts;
  opts.max_sweeps = 4;
  opts.restarts = 2;
  opts.seed = 5;
  const TrainResult a = train(reinitialize(truth, 3), data, opts);
  const TrainResult b = train(reinitialize(truth, 3), data, opts);
  ASSERT_EQ(a.history.steps.size(), b.history.steps.size());
  for (std::size_t k = 0; k < a.history.steps.size(); ++k) {
    EXPECT_EQ(a.history.steps[k].loss_before, b.history.steps[k].loss_before);
    EXPECT_EQ(a.history.steps[k].restricted_loss, b.history.steps[k].restricted_loss);
  }
  EXPECT_EQ(a.history.restart_losses, b.history.restart_losses);
}

TEST(AlsProperty, ReinitializeKeepsPatterns) {
  CounterRng rng(102);
  for (int trial = 0; trial < 10; ++trial) {
    const ModelEnsemble ens = planted(random_int(rng, 2, 6), 1, 2, 2, rng());
    const ModelEnsemble re = reinitialize(ens, rng());
    for (std::size_t l = 1; l <= ens.order(); ++l) EXPECT_EQ(ens.pattern_ptr(l), re.pattern_ptr(l));
    EXPECT_TRUE(mask_holds(re));
  }
}
