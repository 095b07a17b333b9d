#include "dynlaw/als.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>

namespace dynlaw {

void TrainingSet::validate() const {
  if (X.rows() == 0) throw InputError("training set: no samples");
  if (X.rows() != Y.rows() || X.cols() != Y.cols())
    throw InputError("training set: X is " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) + " but Y is " +
                     std::to_string(Y.rows()) + "x" + std::to_string(Y.cols()));
  if (!X.allFinite() || !Y.allFinite()) throw InputError("training set: non-finite entries");
  if (!domains.empty() && domains.size() != modes())
    throw InputError("training set: " + std::to_string(domains.size()) + " domains for " + std::to_string(modes()) +
                     " modes");
}

void TrainOptions::validate() const {
  if (max_sweeps < 1) throw ConfigError("train options: max_sweeps must be at least 1");
  if (!(ridge >= 0.0) || !std::isfinite(ridge)) throw ConfigError("train options: ridge must be finite and >= 0");
  if (!(loss_rel_tol >= 0.0)) throw ConfigError("train options: loss_rel_tol must be >= 0");
  if (restarts < 1) throw ConfigError("train options: restarts must be at least 1");
  if (chunk_rows < 1) throw ConfigError("train options: chunk_rows must be at least 1");
}

namespace {

constexpr double kMonotoneTolerance = 1e-9;
constexpr double kRoundingTolerance = 1e-12;
constexpr double kGaugeFallbackRidge = 1e-10;

double target_energy(const TrainingSet& data, std::span<const std::size_t> E) {
  double sum = 0.0;
  for (std::size_t e : E) sum += data.Y.col(static_cast<Eigen::Index>(e - 1)).squaredNorm();
  return sum;
}

void append_flag(std::string& flags, const char* flag) {
  if (!flags.empty()) flags += ';';
  flags += flag;
}

// Least squares over row chunks: keeps the triangular factor of [A | y].
class StackedLeastSquares {
public:
  explicit StackedLeastSquares(Eigen::Index n) : n_(n), r_(0, n + 1) {}

  void add(const Matrix& chunk) {
    Matrix stacked(r_.rows() + chunk.rows(), n_ + 1);
    stacked << r_, chunk;
    design_sq_ += chunk.leftCols(n_).squaredNorm();
    rows_ += chunk.rows();
    Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(stacked);
    const Eigen::Index k = std::min(stacked.rows(), n_ + 1);
    r_ = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  }

  /// ||A x - y||^2
  double loss(const Vector& x) const {
    if (r_.rows() == 0) return 0.0;
    return (r_.leftCols(n_) * x - r_.col(n_)).squaredNorm();
  }

  struct Solution {
    Vector x;
    std::string flags;
  };

  /// Minimises ||A x - y||^2 + ridge sum_i ||a_i||^2 (x_i - ref_i)^2.
  /// With ridge == 0 a rank-deficient system gets the minimum-norm solution,
  /// or that ridge when fallback_ridge > 0.
  Solution solve(double ridge, const Vector& ref, double fallback_ridge = 0.0) const {
    Solution s;
    if (rows_ == 0) {
      s.x = ref;
      append_flag(s.flags, "empty_set");
      return s;
    }
    if (ridge > 0.0) return solve_ridge(ridge, ref);
    Eigen::ColPivHouseholderQR<Matrix> cp(r_.leftCols(n_));
    if (cp.rank() == n_) {
      s.x = cp.solve(r_.col(n_));
      return s;
    }
    if (fallback_ridge > 0.0) {
      s = solve_ridge(fallback_ridge, ref);
      append_flag(s.flags, "ridge_fallback");
      return s;
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(r_.leftCols(n_));
    s.x = cod.solve(r_.col(n_));
    append_flag(s.flags, "min_norm");
    return s;
  }

private:
  Solution solve_ridge(double ridge, const Vector& ref) const {
    // Each column gets ridge times its own squared norm; zero columns get
    // ridge times the mean.
    Vector weight = r_.leftCols(n_).colwise().squaredNorm().transpose();
    const double mean = design_sq_ / static_cast<double>(n_);
    for (Eigen::Index i = 0; i < n_; ++i)
      if (!(weight[i] > 0.0)) weight[i] = mean > 0.0 ? mean : 1.0;
    const Vector root = (ridge * weight).cwiseSqrt();
    Matrix aug = Matrix::Zero(r_.rows() + n_, n_ + 1);
    aug.topRows(r_.rows()) = r_;
    aug.bottomLeftCorner(n_, n_).diagonal() = root;
    aug.bottomRightCorner(n_, 1) = root.cwiseProduct(ref);
    Eigen::HouseholderQR<Eigen::Ref<Matrix>> qr(aug);
    const auto tri = qr.matrixQR().topLeftCorner(n_, n_).triangularView<Eigen::Upper>();
    Solution s;
    s.x = tri.solve(qr.matrixQR().topRightCorner(n_, 1));
    return s;
  }

  Eigen::Index n_;
  Matrix r_;
  double design_sq_ = 0.0;
  Eigen::Index rows_ = 0;
};

// Per-sample partial contractions keyed by the type sequence they contract.
class StackCache {
public:
  StackCache(const ModelEnsemble& ens, const std::vector<Matrix>& features)
      : ens_(ens), features_(features), left_(ens.order() + 1), right_(ens.order() + 1) {}

  const Matrix& left(std::size_t k, std::size_t q) {
    std::vector<int> key = prefix(k, q);
    auto it = left_[q].find(key);
    if (it != left_[q].end()) return it->second;
    Matrix value;
    if (q == 0) {
      value = Matrix::Ones(samples(), 1);
    } else {
      const Matrix& prev = left(k, q - 1);
      value = advance_left(prev, ens_.core(q, key.back()), features_[q - 1]);
    }
    return left_[q].emplace(std::move(key), std::move(value)).first->second;
  }

  const Matrix& right(std::size_t k, std::size_t q) {
    std::vector<int> key = suffix(k, q);
    auto it = right_[q].find(key);
    if (it != right_[q].end()) return it->second;
    Matrix value;
    const std::size_t d = ens_.order();
    if (q == d) {
      value = Matrix::Ones(samples(), static_cast<Eigen::Index>(ens_.pattern(d).right().rank));
    } else {
      const Matrix& next = right(k, q + 1);
      value = advance_right(next, ens_.core(q + 1, key.front()), features_[q]);
    }
    return right_[q].emplace(std::move(key), std::move(value)).first->second;
  }

  /// Drops every stack that contracted core (l, j).
  void invalidate(std::size_t l, int j) {
    for (std::size_t q = l; q < left_.size(); ++q)
      std::erase_if(left_[q], [&](const auto& kv) { return kv.first[l - 1] == j; });
    for (std::size_t q = 0; q < l; ++q)
      std::erase_if(right_[q], [&](const auto& kv) { return kv.first[l - q - 1] == j; });
  }

  void evict_left_below(std::size_t q) {
    for (std::size_t s = 0; s < q && s < left_.size(); ++s) left_[s].clear();
  }

  void evict_right_below(std::size_t q) {
    for (std::size_t s = 0; s < q && s < right_.size(); ++s) right_[s].clear();
  }

  void clear() {
    for (auto& m : left_) m.clear();
    for (auto& m : right_) m.clear();
  }

  Eigen::Index samples() const { return features_.front().rows(); }

private:
  std::vector<int> prefix(std::size_t k, std::size_t q) const {
    std::vector<int> key(q);
    for (std::size_t s = 1; s <= q; ++s) key[s - 1] = ens_.table().at(k, s);
    return key;
  }
  std::vector<int> suffix(std::size_t k, std::size_t q) const {
    std::vector<int> key(ens_.order() - q);
    for (std::size_t s = q + 1; s <= ens_.order(); ++s) key[s - q - 1] = ens_.table().at(k, s);
    return key;
  }

  const ModelEnsemble& ens_;
  const std::vector<Matrix>& features_;
  std::vector<std::map<std::vector<int>, Matrix>> left_;
  std::vector<std::map<std::vector<int>, Matrix>> right_;
};

std::vector<Matrix> mode_features(const ModelEnsemble& ens, const TrainingSet& data) {
  std::vector<Matrix> out;
  out.reserve(ens.order());
  for (std::size_t l = 1; l <= ens.order(); ++l) out.push_back(featurize_mode(ens.dictionary(), l, data.X));
  return out;
}

void check_consistent(const ModelEnsemble& ens, const TrainingSet& data) {
  data.validate();
  if (data.modes() != ens.order())
    throw DimensionError("training set has " + std::to_string(data.modes()) + " modes, model has " +
                         std::to_string(ens.order()));
}

void check_components(const ModelEnsemble& ens, std::span<const std::size_t> E) {
  for (std::size_t e : E)
    if (e < 1 || e > ens.order()) throw IndexError("component " + std::to_string(e) + " out of range");
}

// Minimises ||A x - y||^2 + ridge sum_i ||a_i||^2 (x_i - ref_i)^2 through
// Jacobi-scaled normal equations, one refinement step, and losses taken from
// explicit residuals. `pass` streams the [A | y] chunks to its callback.
template <class Pass>
StackedLeastSquares::Solution normal_equations_solve(Eigen::Index n, double ridge, const Vector& ref, Pass&& pass,
                                                     double& loss_before, double& loss_after) {
  Matrix G = Matrix::Zero(n, n);
  Vector g = Vector::Zero(n);
  loss_before = 0.0;
  pass([&](const Matrix& A) {
    const Vector r = A.col(n) - A.leftCols(n) * ref;
    G.selfadjointView<Eigen::Lower>().rankUpdate(A.leftCols(n).transpose());
    g.noalias() += A.leftCols(n).transpose() * r;
    loss_before += r.squaredNorm();
  });

  StackedLeastSquares::Solution s;
  Vector weight = G.diagonal();
  const double mean = weight.sum() / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(weight[i] > 0.0)) weight[i] = mean > 0.0 ? mean : 1.0;
  const Vector penalty = ridge * weight;
  const Vector scale = weight.cwiseSqrt().cwiseInverse();
  Matrix H = G.selfadjointView<Eigen::Lower>();
  H = scale.asDiagonal() * H * scale.asDiagonal();
  H.diagonal() += ridge * weight.cwiseProduct(scale.cwiseAbs2());
  const Eigen::LLT<Matrix> llt(H);
  if (llt.info() != Eigen::Success) throw NumericalError("normal equations are not positive definite");
  auto apply = [&](const Vector& rhs) -> Vector { return scale.cwiseProduct(llt.solve(scale.cwiseProduct(rhs))); };

  Vector delta = apply(g);
  Vector correction = Vector::Zero(n);
  pass([&](const Matrix& A) {
    const Vector r = A.col(n) - A.leftCols(n) * (ref + delta);
    correction.noalias() += A.leftCols(n).transpose() * r;
  });
  correction -= penalty.cwiseProduct(delta);
  delta += apply(correction);
  s.x = ref + delta;

  loss_after = 0.0;
  pass([&](const Matrix& A) { loss_after += (A.col(n) - A.leftCols(n) * s.x).squaredNorm(); });
  return s;
}

StepOutcome local_step(ModelEnsemble& ens, std::size_t l, int j, const TrainingSet& data,
                       std::span<const std::size_t> E, const TrainOptions& options, StackCache& cache,
                       const std::vector<Matrix>& features) {
  BlockSparseCore& core = ens.core(l, j);
  const BlockPattern& pat = core.pattern();
  const auto n = static_cast<Eigen::Index>(pat.free_count());
  const Matrix& psi = features[l - 1];
  const Eigen::Index M = cache.samples();
  const auto chunk = static_cast<Eigen::Index>(options.chunk_rows);

  auto pass = [&](auto&& consume) {
    for (std::size_t e : E) {
      const Matrix& left = cache.left(e, l - 1);
      const Matrix& right = cache.right(e, l);
      for (Eigen::Index m0 = 0; m0 < M; m0 += chunk) {
        const Eigen::Index c = std::min(chunk, M - m0);
        Matrix A(c, n + 1);
        Vector scaled(c);
        for (const BlockSpec& b : pat.blocks()) {
          const auto r0 = static_cast<Eigen::Index>(pat.left().offsets[b.row]);
          const auto c0 = static_cast<Eigen::Index>(pat.right().offsets[b.col]);
          const auto cols = static_cast<Eigen::Index>(b.cols);
          for (Eigen::Index x = 0; x < static_cast<Eigen::Index>(b.rows); ++x) {
            scaled =
                left.col(r0 + x).segment(m0, c).cwiseProduct(psi.col(static_cast<Eigen::Index>(b.phys)).segment(m0, c));
            for (Eigen::Index y = 0; y < cols; ++y)
              A.col(static_cast<Eigen::Index>(b.offset) + x * cols + y) =
                  scaled.cwiseProduct(right.col(c0 + y).segment(m0, c));
          }
        }
        A.col(n) = data.Y.col(static_cast<Eigen::Index>(e - 1)).segment(m0, c);
        consume(A);
      }
    }
  };

  const Vector old = core.parameters();
  StepOutcome out;
  StackedLeastSquares::Solution solution;
  if (options.ridge > 0.0 && static_cast<std::size_t>(n) >= options.normal_equations_from) {
    solution = normal_equations_solve(n, options.ridge, old, pass, out.loss_before, out.loss_after);
  } else {
    StackedLeastSquares ls(n);
    pass([&](const Matrix& A) { ls.add(A); });
    out.loss_before = ls.loss(old);
    solution = ls.solve(options.ridge, old);
    out.loss_after = ls.loss(solution.x);
  }
  out.flags = solution.flags;
  if (!std::isfinite(out.loss_after) || !solution.x.allFinite())
    throw NumericalError("local step at core (" + std::to_string(l) + ", " + std::to_string(j) +
                         ") produced a non-finite solution");
  out.proposed_loss = out.loss_after;
  out.target_energy = target_energy(data, E);
  if (options.revert_on_increase && loss_increased(out.loss_before, out.loss_after, out.target_energy)) {
    append_flag(out.flags, "reverted");
    out.loss_after = out.loss_before;
    return out;
  }
  core.set_parameters(solution.x);
  cache.invalidate(l, j);
  return out;
}

GaugeOutcome gauge_step(ModelEnsemble& ens, std::size_t l, int a, const TrainingSet& data,
                        std::span<const std::size_t> Ea, const TrainOptions& options, StackCache& cache,
                        const std::vector<Matrix>& features) {
  if (l < 2 || l > ens.order()) throw IndexError("gauge_fix_step: mode " + std::to_string(l) + " has no left neighbour");
  if (Ea.empty()) throw InputError("gauge_fix_step: empty component set");
  const int j = ens.table().at(Ea.front(), l);
  for (std::size_t e : Ea)
    if (ens.table().at(e, l) != j || ens.table().at(e, l - 1) != a)
      throw InputError("gauge_fix_step: component " + std::to_string(e) + " does not use cores (" +
                       std::to_string(l - 1) + ", " + std::to_string(a) + ") and (" + std::to_string(l) + ", " +
                       std::to_string(j) + ")");

  const InterfaceLabels& iface = ens.pattern(l).left();
  std::vector<Eigen::Index> offsets;
  Eigen::Index n = 0;
  for (std::size_t s : iface.sizes) {
    offsets.push_back(n);
    n += static_cast<Eigen::Index>(s * s);
  }
  const Eigen::Index M = cache.samples();
  const auto chunk = static_cast<Eigen::Index>(options.chunk_rows);

  StackedLeastSquares ls(n);
  for (std::size_t e : Ea) {
    const Matrix& u = cache.left(e, l - 1);
    const Matrix v = advance_right(cache.right(e, l), ens.core(l, j), features[l - 1]);
    for (Eigen::Index m0 = 0; m0 < M; m0 += chunk) {
      const Eigen::Index c = std::min(chunk, M - m0);
      Matrix A(c, n + 1);
      for (std::size_t g = 0; g < iface.sizes.size(); ++g) {
        const auto s = static_cast<Eigen::Index>(iface.sizes[g]);
        const auto off = static_cast<Eigen::Index>(iface.offsets[g]);
        for (Eigen::Index x = 0; x < s; ++x)
          for (Eigen::Index y = 0; y < s; ++y)
            A.col(offsets[g] + x * s + y) = u.col(off + x).segment(m0, c).cwiseProduct(v.col(off + y).segment(m0, c));
      }
      A.col(n) = data.Y.col(static_cast<Eigen::Index>(e - 1)).segment(m0, c);
      ls.add(A);
    }
  }

  Vector identity = Vector::Zero(n);
  for (std::size_t g = 0; g < iface.sizes.size(); ++g) {
    const auto s = static_cast<Eigen::Index>(iface.sizes[g]);
    for (Eigen::Index x = 0; x < s; ++x) identity[offsets[g] + x * s + x] = 1.0;
  }

  GaugeOutcome out;
  out.loss_before = ls.loss(identity);
  auto solution = ls.solve(options.ridge, identity, kGaugeFallbackRidge);
  out.flags = solution.flags;
  out.loss_after = ls.loss(solution.x);
  if (!std::isfinite(out.loss_after) || !solution.x.allFinite())
    throw NumericalError("gauge step at mode " + std::to_string(l) + " produced a non-finite solution");
  out.proposed_loss = out.loss_after;
  out.target_energy = target_energy(data, Ea);
  const Vector& chosen =
      (options.revert_on_increase && loss_increased(out.loss_before, out.loss_after, out.target_energy))
          ? identity
          : solution.x;
  if (&chosen == &identity) {
    append_flag(out.flags, "reverted");
    out.loss_after = out.loss_before;
  }
  for (std::size_t g = 0; g < iface.sizes.size(); ++g) {
    const auto s = static_cast<Eigen::Index>(iface.sizes[g]);
    Matrix U(s, s);
    for (Eigen::Index x = 0; x < s; ++x)
      for (Eigen::Index y = 0; y < s; ++y) U(x, y) = chosen[offsets[g] + x * s + y];
    out.blocks.push_back(std::move(U));
  }
  if (&chosen == &identity) return out;

  BlockSparseCore& left_core = ens.core(l - 1, a);
  const auto& specs = left_core.pattern().blocks();
  for (std::size_t k = 0; k < specs.size(); ++k) left_core.blocks()[k] = left_core.blocks()[k] * out.blocks[specs[k].col];
  cache.invalidate(l - 1, a);
  return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

void run_sweeps(ModelEnsemble& ens, const TrainingSet& data, const TrainOptions& options, TrainHistory& history) {
  const auto features = mode_features(ens, data);
  StackCache cache(ens, features);
  const std::size_t d = ens.order();
  double previous = std::numeric_limits<double>::quiet_NaN();
  const auto start = std::chrono::steady_clock::now();

  for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
    const auto sweep_start = std::chrono::steady_clock::now();
    const std::size_t first_row = history.steps.size();
    cache.clear();
    int step = 0;
    auto record = [&](std::size_t l, int j, const char* kind, int left_type, const StepOutcome& o,
                      std::chrono::steady_clock::time_point t0) {
      if (!std::isfinite(o.loss_after) || !std::isfinite(o.loss_before))
        throw NumericalError("non-finite restricted loss at sweep " + std::to_string(sweep) + ", core (" +
                             std::to_string(l) + ", " + std::to_string(j) + ")");
      StepRecord r;
      r.sweep = sweep;
      r.step = ++step;
      r.ell = l;
      r.type = j;
      r.kind = kind;
      r.left_type = left_type;
      r.loss_before = o.loss_before;
      r.restricted_loss = o.loss_after;
      r.proposed_loss = o.proposed_loss;
      r.target_energy = o.target_energy;
      r.millis = elapsed_ms(t0);
      r.flags = o.flags;
      history.steps.push_back(std::move(r));
    };

    for (std::size_t l = 1; l <= d; ++l) {
      if (l >= 3) cache.evict_left_below(l - 2);
      cache.evict_right_below(l);
      for (int j = 1; j <= ens.alpha(); ++j) {
        const ActivationUsage usage = activation_usage(ens.table(), l, j);
        if (usage.components.empty()) continue;
        if (l == 1 || usage.components.size() == 1) {
          const auto t0 = std::chrono::steady_clock::now();
          const StepOutcome o = local_step(ens, l, j, data, usage.components, options, cache, features);
          record(l, j, "als", 0, o, t0);
          continue;
        }
        const int best = dominant_left_type(usage);
        auto t0 = std::chrono::steady_clock::now();
        const StepOutcome o = local_step(ens, l, j, data, usage.by_left_type.at(best), options, cache, features);
        record(l, j, "als", best, o, t0);
        for (const auto& [a, members] : usage.by_left_type) {
          if (a == best || members.empty()) continue;
          t0 = std::chrono::steady_clock::now();
          const GaugeOutcome g = gauge_step(ens, l, a, data, members, options, cache, features);
          record(l, j, "gauge", a, g, t0);
        }
      }
    }

    const double loss = full_loss(ens, data);
    if (!std::isfinite(loss) || !ens.all_finite())
      throw NumericalError("non-finite full loss after sweep " + std::to_string(sweep));
    for (std::size_t r = first_row; r < history.steps.size(); ++r) history.steps[r].full_loss = loss;
    history.sweep_loss.push_back(loss);
    history.sweep_seconds.push_back(elapsed_ms(sweep_start) / 1000.0);
    if (sweep > 1) {
      const double change = std::abs(previous - loss);
      if (loss == 0.0 || change <= options.loss_rel_tol * std::max(previous, loss)) {
        history.converged = true;
        break;
      }
    }
    previous = loss;
  }
  history.seconds = elapsed_ms(start) / 1000.0;
}

} // namespace

bool loss_increased(double before, double after, double target_energy) noexcept {
  const double slack = kMonotoneTolerance * before + kRoundingTolerance * std::sqrt(before * target_energy);
  return after > before + slack;
}

double restricted_loss(const ModelEnsemble& ens, const TrainingSet& data, std::span<const std::size_t> E,
                       bool* empty_set) {
  check_consistent(ens, data);
  check_components(ens, E);
  if (empty_set) *empty_set = E.empty();
  if (E.empty()) return 0.0;
  const Matrix predicted = ens.evaluate_batch(data.X);
  double total = 0.0;
  for (std::size_t e : E) {
    const auto c = static_cast<Eigen::Index>(e - 1);
    total += (data.Y.col(c) - predicted.col(c)).squaredNorm();
  }
  return total;
}

double full_loss(const ModelEnsemble& ens, const TrainingSet& data) {
  check_consistent(ens, data);
  return (data.Y - ens.evaluate_batch(data.X)).squaredNorm();
}

StepOutcome als_local_step(ModelEnsemble& ens, std::size_t l, int j, const TrainingSet& data,
                           std::span<const std::size_t> E, const TrainOptions& options) {
  check_consistent(ens, data);
  check_components(ens, E);
  if (E.empty()) throw InputError("als_local_step: empty component set");
  ens.core(l, j);
  const auto features = mode_features(ens, data);
  StackCache cache(ens, features);
  return local_step(ens, l, j, data, E, options, cache, features);
}

GaugeOutcome gauge_fix_step(ModelEnsemble& ens, std::size_t l, int a, const TrainingSet& data,
                            std::span<const std::size_t> Ea, const TrainOptions& options) {
  check_consistent(ens, data);
  check_components(ens, Ea);
  const auto features = mode_features(ens, data);
  StackCache cache(ens, features);
  return gauge_step(ens, l, a, data, Ea, options, cache, features);
}

ModelEnsemble reinitialize(const ModelEnsemble& ens, std::uint64_t seed) {
  const std::size_t d = ens.order();
  std::vector<std::shared_ptr<const BlockPattern>> patterns;
  for (std::size_t l = 1; l <= d; ++l) patterns.push_back(ens.pattern_ptr(l));
  std::vector<std::vector<BlockSparseCore>> cores(d);
  for (int j = 1; j <= ens.alpha(); ++j) {
    auto chain = init_block_sparse_cores(patterns, derive_key(seed, static_cast<std::uint64_t>(j)));
    for (std::size_t l = 0; l < d; ++l) cores[l].push_back(std::move(chain[l]));
  }
  return ModelEnsemble(ens.dictionary(), ens.table(), ens.lambda(), ens.rho(), std::move(patterns), std::move(cores));
}

TrainResult train(const ModelEnsemble& init, const TrainingSet& data, const TrainOptions& options) {
  options.validate();
  check_consistent(init, data);
  std::optional<TrainResult> best;
  std::vector<double> finals;
  for (int r = 0; r < options.restarts; ++r) {
    const std::uint64_t seed = derive_key(options.seed, static_cast<std::uint64_t>(r));
    ModelEnsemble ens = r == 0 ? init : reinitialize(init, seed);
    TrainHistory history;
    history.restart = r;
    history.seed = r == 0 ? options.seed : seed;
    run_sweeps(ens, data, options, history);
    finals.push_back(history.sweep_loss.back());
    if (!best || history.sweep_loss.back() < best->history.sweep_loss.back())
      best.emplace(TrainResult{std::move(ens), std::move(history)});
  }
  best->history.restart_losses = std::move(finals);
  return std::move(*best);
}

} // namespace dynlaw
