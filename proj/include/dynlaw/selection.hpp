#pragma once

#include "dynlaw/block_pattern.hpp"
#include "dynlaw/dictionary.hpp"
#include "dynlaw/tensor_train.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace dynlaw {

/// d x d table of activation types; entry (k, l) is the type of core l inside
/// component k. Indices and types are 1-based.
class SelectionTable {
public:
  SelectionTable() = default;
  SelectionTable(std::size_t d, int alpha, std::vector<int> entries);

  std::size_t order() const noexcept { return d_; }
  int alpha() const noexcept { return alpha_; }
  int at(std::size_t k, std::size_t l) const;
  const std::vector<int>& entries() const noexcept { return entries_; }

  /// Interaction length when the table came from local_selection_table.
  std::optional<int> interaction_length() const noexcept { return interaction_length_; }
  void set_interaction_length(int L) { interaction_length_ = L; }

  bool operator==(const SelectionTable& o) const { return d_ == o.d_ && alpha_ == o.alpha_ && entries_ == o.entries_; }

private:
  std::size_t d_ = 0;
  int alpha_ = 0;
  std::vector<int> entries_;
  std::optional<int> interaction_length_;
};

/// Types 1 and 2L+3 for modes left and right of the window [k-L, k+L];
/// l - k + L + 2 inside it.
SelectionTable local_selection_table(std::size_t d, int L);

struct ActivationUsage {
  std::vector<std::size_t> components;                   // E
  std::map<int, std::vector<std::size_t>> by_left_type;  // E_a, empty for l == 1
};

ActivationUsage activation_usage(const SelectionTable& table, std::size_t l, int j);

/// Largest E_a; ties go to the smallest type.
int dominant_left_type(const ActivationUsage& usage);

/// Shared cores (l, j) for all modes and activation types, plus the table
/// that assembles them into per-component laws.
class ModelEnsemble {
public:
  ModelEnsemble(Dictionary dict, SelectionTable table, int lambda, std::size_t rho,
                std::vector<std::shared_ptr<const BlockPattern>> patterns,
                std::vector<std::vector<BlockSparseCore>> cores);

  std::size_t order() const noexcept { return table_.order(); }
  int alpha() const noexcept { return table_.alpha(); }
  int lambda() const noexcept { return lambda_; }
  std::size_t rho() const noexcept { return rho_; }
  const Dictionary& dictionary() const noexcept { return dict_; }
  const SelectionTable& table() const noexcept { return table_; }
  const BlockPattern& pattern(std::size_t l) const;
  const std::shared_ptr<const BlockPattern>& pattern_ptr(std::size_t l) const;

  const BlockSparseCore& core(std::size_t l, int j) const;
  BlockSparseCore& core(std::size_t l, int j);

  /// Component k as a dense train, terminal labels summed.
  TensorTrain assemble_law(std::size_t k) const;

  /// f_hat(x) for all components.
  Vector evaluate(std::span<const double> x) const;

  /// States as rows; returns predictions as rows.
  Matrix evaluate_batch(const Matrix& states) const;

  std::size_t parameter_count() const;
  bool all_finite() const;

private:
  Dictionary dict_;
  SelectionTable table_;
  int lambda_;
  std::size_t rho_;
  std::vector<std::shared_ptr<const BlockPattern>> patterns_;
  std::vector<std::vector<BlockSparseCore>> cores_;  // [l-1][j-1]
};

/// Random ensemble: bounded-degree patterns shared by all types at a mode,
/// every type's chain initialised from its own substream of seed.
ModelEnsemble make_ensemble(const Dictionary& dict, const SelectionTable& table, int lambda, std::size_t rho,
                            std::uint64_t seed);

/// Contracts the left stack of one sample range through a core: rows of
/// `left` are per-sample interface vectors, `features` the M x p dictionary
/// values of the core's mode.
Matrix advance_left(const Matrix& left, const BlockSparseCore& core, const Matrix& features);

/// Right-to-left counterpart of advance_left.
Matrix advance_right(const Matrix& right, const BlockSparseCore& core, const Matrix& features);

} // namespace dynlaw
