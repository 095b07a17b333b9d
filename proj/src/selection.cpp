#include "dynlaw/selection.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/random.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace dynlaw {

SelectionTable::SelectionTable(std::size_t d, int alpha, std::vector<int> entries)
    : d_(d), alpha_(alpha), entries_(std::move(entries)) {
  if (d_ == 0) throw ConfigError("selection table: order must be at least 1");
  if (alpha_ < 1) throw ConfigError("selection table: alpha must be at least 1");
  if (entries_.size() != d_ * d_)
    throw ConfigError("selection table: expected " + std::to_string(d_ * d_) + " entries, got " +
                      std::to_string(entries_.size()));
  for (int e : entries_)
    if (e < 1 || e > alpha_)
      throw ConfigError("selection table: entry " + std::to_string(e) + " outside [1, " + std::to_string(alpha_) + "]");
}

int SelectionTable::at(std::size_t k, std::size_t l) const {
  if (k < 1 || k > d_ || l < 1 || l > d_)
    throw IndexError("selection table: (" + std::to_string(k) + ", " + std::to_string(l) + ") outside [1, " +
                     std::to_string(d_) + "]^2");
  return entries_[(k - 1) * d_ + (l - 1)];
}

SelectionTable local_selection_table(std::size_t d, int L) {
  if (L < 0) throw ConfigError("local_selection_table: interaction length must be non-negative");
  const int alpha = 2 * L + 3;
  std::vector<int> entries(d * d);
  for (std::size_t i = 1; i <= d; ++i)
    for (std::size_t j = 1; j <= d; ++j) {
      const long long di = static_cast<long long>(i);
      const long long dj = static_cast<long long>(j);
      int s;
      if (dj < di - L) s = 1;
      else if (dj > di + L) s = alpha;
      else s = static_cast<int>(dj - di + L + 2);
      entries[(i - 1) * d + (j - 1)] = s;
    }
  SelectionTable table(d, alpha, std::move(entries));
  table.set_interaction_length(L);
  return table;
}

ActivationUsage activation_usage(const SelectionTable& table, std::size_t l, int j) {
  ActivationUsage usage;
  for (std::size_t e = 1; e <= table.order(); ++e) {
    if (table.at(e, l) != j) continue;
    usage.components.push_back(e);
    if (l > 1) usage.by_left_type[table.at(e, l - 1)].push_back(e);
  }
  return usage;
}

int dominant_left_type(const ActivationUsage& usage) {
  int best = 0;
  std::size_t best_size = 0;
  for (const auto& [a, members] : usage.by_left_type)
    if (members.size() > best_size) {
      best = a;
      best_size = members.size();
    }
  return best;
}

// -------------------------------------------------------------- ModelEnsemble

ModelEnsemble::ModelEnsemble(Dictionary dict, SelectionTable table, int lambda, std::size_t rho,
                             std::vector<std::shared_ptr<const BlockPattern>> patterns,
                             std::vector<std::vector<BlockSparseCore>> cores)
    : dict_(std::move(dict)), table_(std::move(table)), lambda_(lambda), rho_(rho), patterns_(std::move(patterns)),
      cores_(std::move(cores)) {
  const std::size_t d = table_.order();
  if (dict_.modes() != d)
    throw StructureError("ensemble: dictionary has " + std::to_string(dict_.modes()) + " modes, table has order " +
                         std::to_string(d));
  if (patterns_.size() != d || cores_.size() != d)
    throw StructureError("ensemble: expected " + std::to_string(d) + " patterns and core columns");
  for (std::size_t l = 0; l < d; ++l) {
    if (cores_[l].size() != static_cast<std::size_t>(table_.alpha()))
      throw StructureError("ensemble: mode " + std::to_string(l + 1) + " has " + std::to_string(cores_[l].size()) +
                           " cores, expected " + std::to_string(table_.alpha()));
    if (patterns_[l]->phys() != dict_.size())
      throw StructureError("ensemble: pattern of mode " + std::to_string(l + 1) + " disagrees with the dictionary size");
    for (const BlockSparseCore& c : cores_[l])
      if (!c.pattern_ptr() || !(c.pattern() == *patterns_[l]))
        throw StructureError("ensemble: core at mode " + std::to_string(l + 1) + " does not use the shared pattern");
  }
}

const BlockPattern& ModelEnsemble::pattern(std::size_t l) const { return *pattern_ptr(l); }

const std::shared_ptr<const BlockPattern>& ModelEnsemble::pattern_ptr(std::size_t l) const {
  if (l < 1 || l > order()) throw IndexError("ensemble: mode " + std::to_string(l) + " out of range");
  return patterns_[l - 1];
}

const BlockSparseCore& ModelEnsemble::core(std::size_t l, int j) const {
  if (l < 1 || l > order() || j < 1 || j > alpha())
    throw IndexError("ensemble: core (" + std::to_string(l) + ", " + std::to_string(j) + ") does not exist");
  return cores_[l - 1][static_cast<std::size_t>(j - 1)];
}

BlockSparseCore& ModelEnsemble::core(std::size_t l, int j) {
  return const_cast<BlockSparseCore&>(std::as_const(*this).core(l, j));
}

TensorTrain ModelEnsemble::assemble_law(std::size_t k) const {
  if (k < 1 || k > order()) throw IndexError("assemble_law: component " + std::to_string(k) + " out of range");
  std::vector<BlockSparseCore> chain;
  chain.reserve(order());
  for (std::size_t l = 1; l <= order(); ++l) chain.push_back(core(l, table_.at(k, l)));
  return chain_to_tensor_train(chain);
}

Vector ModelEnsemble::evaluate(std::span<const double> x) const {
  if (x.size() != order())
    throw InputError("ensemble: state has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(order()));
  Matrix states(1, static_cast<Eigen::Index>(order()));
  for (std::size_t l = 0; l < x.size(); ++l) states(0, static_cast<Eigen::Index>(l)) = x[l];
  return evaluate_batch(states).row(0).transpose();
}

Matrix ModelEnsemble::evaluate_batch(const Matrix& states) const {
  const std::size_t d = order();
  if (static_cast<std::size_t>(states.cols()) != d)
    throw InputError("ensemble: states have " + std::to_string(states.cols()) + " columns, expected " +
                     std::to_string(d));
  const Eigen::Index M = states.rows();
  // Components sharing a type prefix share the partial contraction.
  std::map<std::vector<int>, Matrix> level;
  level.emplace(std::vector<int>{}, Matrix::Ones(M, 1));
  for (std::size_t l = 1; l <= d; ++l) {
    const Matrix features = featurize_mode(dict_, l, states);
    std::map<std::vector<int>, Matrix> next;
    for (std::size_t k = 1; k <= d; ++k) {
      std::vector<int> key;
      key.reserve(l);
      for (std::size_t q = 1; q <= l; ++q) key.push_back(table_.at(k, q));
      if (next.count(key)) continue;
      const std::vector<int> parent(key.begin(), key.end() - 1);
      next.emplace(key, advance_left(level.at(parent), core(l, key.back()), features));
    }
    level = std::move(next);
  }
  Matrix out(M, static_cast<Eigen::Index>(d));
  for (std::size_t k = 1; k <= d; ++k) {
    std::vector<int> key;
    for (std::size_t q = 1; q <= d; ++q) key.push_back(table_.at(k, q));
    out.col(static_cast<Eigen::Index>(k - 1)) = level.at(key).rowwise().sum();
  }
  return out;
}

std::size_t ModelEnsemble::parameter_count() const {
  std::size_t n = 0;
  for (const auto& column : cores_)
    for (const BlockSparseCore& c : column) n += c.pattern().free_count();
  return n;
}

bool ModelEnsemble::all_finite() const {
  for (const auto& column : cores_)
    for (const BlockSparseCore& c : column)
      if (!c.all_finite()) return false;
  return true;
}

ModelEnsemble make_ensemble(const Dictionary& dict, const SelectionTable& table, int lambda, std::size_t rho,
                            std::uint64_t seed) {
  const std::size_t d = table.order();
  auto patterns = chain_patterns(dict.degree_map(), lambda, d, rho);
  std::vector<std::vector<BlockSparseCore>> cores(d);
  for (int j = 1; j <= table.alpha(); ++j) {
    auto chain = init_block_sparse_cores(patterns, derive_key(seed, static_cast<std::uint64_t>(j)));
    for (std::size_t l = 0; l < d; ++l) cores[l].push_back(std::move(chain[l]));
  }
  return ModelEnsemble(dict, table, lambda, rho, std::move(patterns), std::move(cores));
}

Matrix advance_left(const Matrix& left, const BlockSparseCore& core, const Matrix& features) {
  const BlockPattern& pat = core.pattern();
  if (static_cast<std::size_t>(left.cols()) != pat.left().rank || features.rows() != left.rows())
    throw DimensionError("advance_left: stack shape does not match the core");
  Matrix out = Matrix::Zero(left.rows(), static_cast<Eigen::Index>(pat.right().rank));
  const auto& specs = pat.blocks();
  Matrix scaled;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const BlockSpec& b = specs[k];
    const auto r0 = static_cast<Eigen::Index>(pat.left().offsets[b.row]);
    const auto c0 = static_cast<Eigen::Index>(pat.right().offsets[b.col]);
    scaled = left.middleCols(r0, static_cast<Eigen::Index>(b.rows)).array().colwise() *
             features.col(static_cast<Eigen::Index>(b.phys)).array();
    out.middleCols(c0, static_cast<Eigen::Index>(b.cols)).noalias() += scaled * core.blocks()[k];
  }
  return out;
}

Matrix advance_right(const Matrix& right, const BlockSparseCore& core, const Matrix& features) {
  const BlockPattern& pat = core.pattern();
  if (static_cast<std::size_t>(right.cols()) != pat.right().rank || features.rows() != right.rows())
    throw DimensionError("advance_right: stack shape does not match the core");
  Matrix out = Matrix::Zero(right.rows(), static_cast<Eigen::Index>(pat.left().rank));
  const auto& specs = pat.blocks();
  Matrix scaled;
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const BlockSpec& b = specs[k];
    const auto r0 = static_cast<Eigen::Index>(pat.left().offsets[b.row]);
    const auto c0 = static_cast<Eigen::Index>(pat.right().offsets[b.col]);
    scaled = right.middleCols(c0, static_cast<Eigen::Index>(b.cols)).array().colwise() *
             features.col(static_cast<Eigen::Index>(b.phys)).array();
    out.middleCols(r0, static_cast<Eigen::Index>(b.rows)).noalias() += scaled * core.blocks()[k].transpose();
  }
  return out;
}

} // namespace dynlaw
