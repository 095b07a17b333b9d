#include "dynlaw/block_pattern.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dynlaw {

namespace {

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  const std::uint64_t s = a + b;
  return s < a ? std::numeric_limits<std::uint64_t>::max() : s;
}

// counts[t] = number of n-tuples with weight sum t, for t in [0, max_target].
std::vector<std::uint64_t> solution_counts(const DegreeMap& w, int max_target, int n_modes) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_target) + 1, 0);
  if (max_target < 0) return counts;
  counts[0] = 1;
  for (int k = 0; k < n_modes; ++k) {
    std::vector<std::uint64_t> next(counts.size(), 0);
    for (std::size_t t = 0; t < counts.size(); ++t) {
      if (counts[t] == 0) continue;
      for (int wi : w.weights()) {
        const std::size_t u = t + static_cast<std::size_t>(wi);
        if (u < next.size()) next[u] = saturating_add(next[u], counts[t]);
      }
    }
    counts = std::move(next);
  }
  return counts;
}

} // namespace

std::uint64_t count_block_solutions(const DegreeMap& w, int target, int n_modes) {
  if (target < 0 || n_modes < 0) return 0;
  return solution_counts(w, target, n_modes)[static_cast<std::size_t>(target)];
}

std::optional<std::size_t> InterfaceLabels::find(int label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

InterfaceLabels interface_labels(const DegreeMap& w, int lambda, std::size_t d, std::size_t q, std::size_t rho,
                                 DegreeMode mode) {
  if (q > d) throw IndexError("interface_labels: interface " + std::to_string(q) + " beyond order " + std::to_string(d));
  InterfaceLabels out;
  if (lambda < 0) return out;
  const auto left_counts = solution_counts(w, lambda, static_cast<int>(q));
  const auto right_counts = solution_counts(w, lambda, static_cast<int>(d - q));
  for (int a = 0; a <= lambda; ++a) {
    const std::uint64_t lc = left_counts[static_cast<std::size_t>(a)];
    std::uint64_t rc = 0;
    if (mode == DegreeMode::Fixed) {
      rc = right_counts[static_cast<std::size_t>(lambda - a)];
    } else {
      for (int t = 0; t <= lambda - a; ++t) rc = saturating_add(rc, right_counts[static_cast<std::size_t>(t)]);
    }
    if (lc == 0 || rc == 0) continue;
    // Terminal labels carry one realisation each: the (empty) remainder.
    const std::uint64_t cap = std::min<std::uint64_t>({static_cast<std::uint64_t>(rho), lc, rc});
    out.labels.push_back(a);
    out.sizes.push_back(static_cast<std::size_t>(cap));
    out.offsets.push_back(out.rank);
    out.rank += static_cast<std::size_t>(cap);
  }
  return out;
}

// --------------------------------------------------------------- BlockPattern

BlockPattern::BlockPattern(DegreeMap w, int lambda, std::size_t d, std::size_t mode_index, std::size_t rho,
                           DegreeMode mode, InterfaceLabels left, InterfaceLabels right)
    : w_(std::move(w)), lambda_(lambda), d_(d), mode_index_(mode_index), rho_(rho), degree_mode_(mode),
      left_(std::move(left)), right_(std::move(right)) {
  for (std::size_t r = 0; r < left_.labels.size(); ++r) {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      const auto c = right_.find(left_.labels[r] + w_[i]);
      if (!c) continue;
      BlockSpec b{i, r, *c, left_.sizes[r], right_.sizes[*c], free_count_};
      free_count_ += b.rows * b.cols;
      blocks_.push_back(b);
    }
  }
}

std::vector<std::pair<int, int>> BlockPattern::allowed(std::size_t i) const {
  std::vector<std::pair<int, int>> out;
  for (const BlockSpec& b : blocks_)
    if (b.phys == i) out.emplace_back(left_.labels[b.row], right_.labels[b.col]);
  return out;
}

std::vector<bool> BlockPattern::dense_mask() const {
  const std::size_t p = phys();
  std::vector<bool> mask(left_.rank * p * right_.rank, false);
  for (const BlockSpec& b : blocks_)
    for (std::size_t x = 0; x < b.rows; ++x)
      for (std::size_t y = 0; y < b.cols; ++y)
        mask[((left_.offsets[b.row] + x) * p + b.phys) * right_.rank + right_.offsets[b.col] + y] = true;
  return mask;
}

bool BlockPattern::operator==(const BlockPattern& o) const {
  return w_ == o.w_ && lambda_ == o.lambda_ && d_ == o.d_ && mode_index_ == o.mode_index_ && rho_ == o.rho_ &&
         degree_mode_ == o.degree_mode_ && left_ == o.left_ && right_ == o.right_;
}

BlockPattern bounded_degree_pattern(const DegreeMap& w, int lambda, std::size_t d, std::size_t l, std::size_t rho,
                                    DegreeMode mode) {
  if (l < 1 || l > d) throw IndexError("bounded_degree_pattern: core " + std::to_string(l) + " outside [1, " +
                                       std::to_string(d) + "]");
  if (rho < 1) throw ConfigError("bounded_degree_pattern: rho must be at least 1");
  if (lambda < 0) throw ConfigError("bounded_degree_pattern: lambda must be non-negative");
  auto left = interface_labels(w, lambda, d, l - 1, rho, mode);
  auto right = interface_labels(w, lambda, d, l, rho, mode);
  if (left.labels.empty() || right.labels.empty())
    throw StructureError("bounded_degree_pattern: degree " + std::to_string(lambda) + " is not realisable");
  return BlockPattern(w, lambda, d, l, rho, mode, std::move(left), std::move(right));
}

std::vector<std::shared_ptr<const BlockPattern>> chain_patterns(const DegreeMap& w, int lambda, std::size_t d,
                                                                std::size_t rho, DegreeMode mode) {
  std::vector<std::shared_ptr<const BlockPattern>> out;
  out.reserve(d);
  for (std::size_t l = 1; l <= d; ++l)
    out.push_back(std::make_shared<const BlockPattern>(bounded_degree_pattern(w, lambda, d, l, rho, mode)));
  return out;
}

// ------------------------------------------------------------ BlockSparseCore

BlockSparseCore::BlockSparseCore(std::shared_ptr<const BlockPattern> pattern) : pattern_(std::move(pattern)) {
  blocks_.reserve(pattern_->blocks().size());
  for (const BlockSpec& b : pattern_->blocks())
    blocks_.push_back(Matrix::Zero(static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols)));
}

Vector BlockSparseCore::parameters() const {
  Vector out(static_cast<Eigen::Index>(pattern_->free_count()));
  const auto& specs = pattern_->blocks();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const Matrix& m = blocks_[k];
    for (Eigen::Index x = 0; x < m.rows(); ++x)
      for (Eigen::Index y = 0; y < m.cols(); ++y)
        out[static_cast<Eigen::Index>(specs[k].offset) + x * m.cols() + y] = m(x, y);
  }
  return out;
}

void BlockSparseCore::set_parameters(const Vector& params) {
  if (static_cast<std::size_t>(params.size()) != pattern_->free_count())
    throw DimensionError("BlockSparseCore::set_parameters: expected " + std::to_string(pattern_->free_count()) +
                         " parameters, got " + std::to_string(params.size()));
  const auto& specs = pattern_->blocks();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    Matrix& m = blocks_[k];
    for (Eigen::Index x = 0; x < m.rows(); ++x)
      for (Eigen::Index y = 0; y < m.cols(); ++y)
        m(x, y) = params[static_cast<Eigen::Index>(specs[k].offset) + x * m.cols() + y];
  }
}

Core BlockSparseCore::to_core() const {
  const BlockPattern& pat = *pattern_;
  Core core(pat.left().rank, pat.phys(), pat.right().rank);
  const auto& specs = pat.blocks();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const BlockSpec& b = specs[k];
    const std::size_t r0 = pat.left().offsets[b.row];
    const std::size_t c0 = pat.right().offsets[b.col];
    for (std::size_t x = 0; x < b.rows; ++x)
      for (std::size_t y = 0; y < b.cols; ++y)
        core(r0 + x, b.phys, c0 + y) = blocks_[k](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
  }
  return core;
}

BlockSparseCore BlockSparseCore::from_core(std::shared_ptr<const BlockPattern> pattern, const Core& core,
                                           double tol) {
  const BlockPattern& pat = *pattern;
  if (core.left() != pat.left().rank || core.phys() != pat.phys() || core.right() != pat.right().rank)
    throw StructureError("BlockSparseCore::from_core: core shape does not match the pattern");
  const std::vector<bool> mask = pat.dense_mask();
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (!mask[k] && std::abs(core.data()[k]) > tol)
      throw StructureError("BlockSparseCore::from_core: nonzero entry outside the allowed blocks");
  BlockSparseCore out(std::move(pattern));
  const auto& specs = pat.blocks();
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const BlockSpec& b = specs[k];
    const std::size_t r0 = pat.left().offsets[b.row];
    const std::size_t c0 = pat.right().offsets[b.col];
    for (std::size_t x = 0; x < b.rows; ++x)
      for (std::size_t y = 0; y < b.cols; ++y)
        out.blocks_[k](static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = core(r0 + x, b.phys, c0 + y);
  }
  return out;
}

bool BlockSparseCore::all_finite() const {
  return std::all_of(blocks_.begin(), blocks_.end(), [](const Matrix& m) { return m.allFinite(); });
}

std::vector<Matrix> orthonormalize_blocks(BlockSparseCore& core) {
  const BlockPattern& pat = core.pattern();
  const auto& specs = pat.blocks();
  std::vector<Matrix> factors;
  factors.reserve(pat.right().labels.size());
  for (std::size_t c = 0; c < pat.right().labels.size(); ++c) {
    const auto cols = static_cast<Eigen::Index>(pat.right().sizes[c]);
    std::vector<std::size_t> members;
    Eigen::Index rows = 0;
    for (std::size_t k = 0; k < specs.size(); ++k)
      if (specs[k].col == c) {
        members.push_back(k);
        rows += static_cast<Eigen::Index>(specs[k].rows);
      }
    if (rows < cols) {
      factors.push_back(Matrix::Identity(cols, cols));
      continue;
    }
    Matrix stacked(rows, cols);
    Eigen::Index at = 0;
    for (std::size_t k : members) {
      stacked.middleRows(at, core.blocks()[k].rows()) = core.blocks()[k];
      at += core.blocks()[k].rows();
    }
    Eigen::HouseholderQR<Matrix> qr(stacked);
    const Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
    Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
    at = 0;
    for (std::size_t k : members) {
      core.blocks()[k] = q.middleRows(at, core.blocks()[k].rows());
      at += core.blocks()[k].rows();
    }
    factors.push_back(std::move(r));
  }
  return factors;
}

std::vector<BlockSparseCore> init_block_sparse_cores(std::span<const std::shared_ptr<const BlockPattern>> patterns,
                                                     std::uint64_t seed) {
  for (std::size_t l = 0; l + 1 < patterns.size(); ++l)
    if (!(patterns[l]->right() == patterns[l + 1]->left()))
      throw StructureError("init_block_sparse_cores: patterns of cores " + std::to_string(l + 1) + " and " +
                           std::to_string(l + 2) + " disagree on their shared interface");
  std::vector<BlockSparseCore> chain;
  chain.reserve(patterns.size());
  for (std::size_t l = 0; l < patterns.size(); ++l) {
    BlockSparseCore core(patterns[l]);
    CounterRng rng(derive_key(seed, l));
    for (Matrix& m : core.blocks())
      for (Eigen::Index x = 0; x < m.rows(); ++x)
        for (Eigen::Index y = 0; y < m.cols(); ++y) m(x, y) = rng.normal();
    chain.push_back(std::move(core));
  }
  for (std::size_t l = 0; l + 1 < chain.size(); ++l) {
    const std::vector<Matrix> r = orthonormalize_blocks(chain[l]);
    const auto& next_specs = chain[l + 1].pattern().blocks();
    for (std::size_t k = 0; k < next_specs.size(); ++k) chain[l + 1].blocks()[k] = r[next_specs[k].row] * chain[l + 1].blocks()[k];
  }
  return chain;
}

TensorTrain chain_to_tensor_train(std::span<const BlockSparseCore> chain) {
  if (chain.empty()) throw StructureError("chain_to_tensor_train: empty chain");
  std::vector<Core> cores;
  cores.reserve(chain.size());
  for (const BlockSparseCore& c : chain) cores.push_back(c.to_core());
  Core& last = cores.back();
  if (last.right() != 1) {
    Core summed(last.left(), last.phys(), 1);
    for (std::size_t a = 0; a < last.left(); ++a)
      for (std::size_t i = 0; i < last.phys(); ++i) {
        double s = 0.0;
        for (std::size_t b = 0; b < last.right(); ++b) s += last(a, i, b);
        summed(a, i, 0) = s;
      }
    last = std::move(summed);
  }
  return TensorTrain(std::move(cores));
}

// ------------------------------------------------------------ degree operator

DenseTensor apply_degree_operator(const DenseTensor& phi, const DegreeOperatorSpec& spec) {
  const std::size_t p = spec.degree_map.size();
  if (phi.order() != spec.d)
    throw DimensionError("apply_degree_operator: tensor of order " + std::to_string(phi.order()) + ", expected " +
                         std::to_string(spec.d));
  for (std::size_t k = 0; k < phi.order(); ++k)
    if (phi.shape()[k] != p)
      throw DimensionError("apply_degree_operator: mode " + std::to_string(k + 1) + " has dimension " +
                           std::to_string(phi.shape()[k]) + ", expected " + std::to_string(p));
  DenseTensor out(phi.shape());
  std::vector<std::size_t> idx(spec.d, 0);
  for (std::size_t flat = 0; flat < phi.size(); ++flat) {
    int degree = 0;
    for (std::size_t k = 0; k < spec.d; ++k) degree += spec.degree_map[idx[k]];
    out[flat] = degree * phi[flat];
    for (std::size_t k = spec.d; k-- > 0;) {
      if (++idx[k] < p) break;
      idx[k] = 0;
    }
  }
  return out;
}

double max_coefficient_above_degree(const DenseTensor& phi, const DegreeMap& w, int lambda) {
  const std::size_t p = w.size();
  const std::size_t d = phi.order();
  std::vector<std::size_t> idx(d, 0);
  double worst = 0.0;
  for (std::size_t flat = 0; flat < phi.size(); ++flat) {
    int degree = 0;
    for (std::size_t k = 0; k < d; ++k) degree += w[idx[k]];
    if (degree > lambda) worst = std::max(worst, std::abs(phi[flat]));
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < p) break;
      idx[k] = 0;
    }
  }
  return worst;
}

TensorTrain assemble_bounded_degree(std::span<const TensorTrain> fixed_degree_tts) {
  if (fixed_degree_tts.empty()) throw StructureError("assemble_bounded_degree: no input trains");
  TensorTrain acc = fixed_degree_tts.front();
  for (std::size_t k = 1; k < fixed_degree_tts.size(); ++k) {
    if (fixed_degree_tts[k].dims() != acc.dims() || fixed_degree_tts[k].label_dim() != acc.label_dim())
      throw StructureError("assemble_bounded_degree: input " + std::to_string(k + 1) + " has a different shape");
    acc = tt_add(acc, fixed_degree_tts[k]);
  }
  return acc;
}

std::pair<double, double> binomial_block_size_formula(int left_degree, int right_degree, int l, int d) {
  auto binom = [](int n, int k) -> double {
    if (k < 0 || n < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
    return r;
  };
  return {binom(left_degree + l - 1, l - 2), binom(right_degree + d - l, l - 2)};
}

} // namespace dynlaw
