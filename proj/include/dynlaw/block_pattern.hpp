#pragma once

// Degree-labelled block-sparse support patterns of tensor-train cores.
//
// Interfaces carry cumulative-degree labels: label a on interface l means the
// modes 1..l have consumed total degree a. A block (i, a, b) of core l may be
// nonzero only if b = a + w(i) <= lambda. Block sizes are capped by rho and by
// the exact number of index tuples realising the label on either side.

#include "dynlaw/dictionary.hpp"
#include "dynlaw/tensor_train.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace dynlaw {

/// Bounded: terminal labels 0..lambda are all accepted (degree <= lambda).
/// Fixed: only the terminal label lambda is accepted (degree == lambda).
enum class DegreeMode { Bounded, Fixed };

/// Number of tuples (i_1..i_n) in [p]^n with sum_k w(i_k) == target.
std::uint64_t count_block_solutions(const DegreeMap& w, int target, int n_modes);

/// Labels present on one interface, with block sizes and offsets into the rank.
struct InterfaceLabels {
  std::vector<int> labels;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> offsets;
  std::size_t rank = 0;

  std::optional<std::size_t> find(int label) const;
  bool operator==(const InterfaceLabels&) const = default;
};

/// Labels on interface q in [0, d] for the given degree constraint.
InterfaceLabels interface_labels(const DegreeMap& w, int lambda, std::size_t d, std::size_t q, std::size_t rho,
                                 DegreeMode mode = DegreeMode::Bounded);

struct BlockSpec {
  std::size_t phys;    // physical index i (0-based)
  std::size_t row;     // position in the left interface's label list
  std::size_t col;     // position in the right interface's label list
  std::size_t rows;
  std::size_t cols;
  std::size_t offset;  // first free parameter of this block
};

class BlockPattern {
public:
  BlockPattern(DegreeMap w, int lambda, std::size_t d, std::size_t mode_index, std::size_t rho, DegreeMode mode,
               InterfaceLabels left, InterfaceLabels right);

  const DegreeMap& degree_map() const noexcept { return w_; }
  int lambda() const noexcept { return lambda_; }
  std::size_t rho() const noexcept { return rho_; }
  std::size_t order() const noexcept { return d_; }
  std::size_t mode_index() const noexcept { return mode_index_; }
  DegreeMode degree_mode() const noexcept { return degree_mode_; }
  std::size_t phys() const noexcept { return w_.size(); }

  const InterfaceLabels& left() const noexcept { return left_; }
  const InterfaceLabels& right() const noexcept { return right_; }
  const std::vector<BlockSpec>& blocks() const noexcept { return blocks_; }
  std::size_t free_count() const noexcept { return free_count_; }

  /// (row label, col label) pairs that may be nonzero for physical index i.
  std::vector<std::pair<int, int>> allowed(std::size_t i) const;

  /// Dense 0/1 mask over the (left rank, phys, right rank) core layout.
  std::vector<bool> dense_mask() const;

  bool operator==(const BlockPattern& o) const;

private:
  DegreeMap w_;
  int lambda_;
  std::size_t d_;
  std::size_t mode_index_;
  std::size_t rho_;
  DegreeMode degree_mode_;
  InterfaceLabels left_;
  InterfaceLabels right_;
  std::vector<BlockSpec> blocks_;
  std::size_t free_count_ = 0;
};

/// Support pattern of core l (1-based) in a chain of d cores.
BlockPattern bounded_degree_pattern(const DegreeMap& w, int lambda, std::size_t d, std::size_t l, std::size_t rho,
                                    DegreeMode mode = DegreeMode::Bounded);

/// Patterns for every core of a chain.
std::vector<std::shared_ptr<const BlockPattern>> chain_patterns(const DegreeMap& w, int lambda, std::size_t d,
                                                                std::size_t rho,
                                                                DegreeMode mode = DegreeMode::Bounded);

/// A core whose entries live only in the allowed blocks of its pattern.
class BlockSparseCore {
public:
  BlockSparseCore() = default;
  explicit BlockSparseCore(std::shared_ptr<const BlockPattern> pattern);

  const BlockPattern& pattern() const { return *pattern_; }
  const std::shared_ptr<const BlockPattern>& pattern_ptr() const noexcept { return pattern_; }

  std::vector<Matrix>& blocks() noexcept { return blocks_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }

  /// Free parameters, block by block, each block row-major.
  Vector parameters() const;
  void set_parameters(const Vector& params);

  /// Densified core (left rank, p, right rank).
  Core to_core() const;

  /// Reads a dense core back; throws StructureError when entries outside the
  /// allowed blocks exceed tol in magnitude.
  static BlockSparseCore from_core(std::shared_ptr<const BlockPattern> pattern, const Core& core, double tol = 0.0);

  bool all_finite() const;

private:
  std::shared_ptr<const BlockPattern> pattern_;
  std::vector<Matrix> blocks_;
};

/// Random N(0,1) blocks, left-orthogonalised block-wise along the chain.
std::vector<BlockSparseCore> init_block_sparse_cores(std::span<const std::shared_ptr<const BlockPattern>> patterns,
                                                     std::uint64_t seed);

/// Orthonormalises each right-label column group of a single core in place;
/// returns the per-label R factors (one s_b x s_b matrix per right label).
std::vector<Matrix> orthonormalize_blocks(BlockSparseCore& core);

/// Dense train of a chain; terminal labels are summed (all-ones contraction).
TensorTrain chain_to_tensor_train(std::span<const BlockSparseCore> chain);

struct DegreeOperatorSpec {
  DegreeMap degree_map;
  std::size_t d = 0;
};

/// (L phi)_{i_1..i_d} = (sum_k w(i_k)) phi_{i_1..i_d}.
DenseTensor apply_degree_operator(const DenseTensor& phi, const DegreeOperatorSpec& spec);

/// Largest |phi| over multi-indices whose total degree exceeds lambda.
double max_coefficient_above_degree(const DenseTensor& phi, const DegreeMap& w, int lambda);

/// Sum of fixed-degree trains as one train: concatenated first core,
/// block-diagonal interior cores, last core summed over its blocks.
TensorTrain assemble_bounded_degree(std::span<const TensorTrain> fixed_degree_tts);

/// Block-size formulas printed for the monomial dictionary, evaluated as
/// (s, t) for comparison against count_block_solutions.
std::pair<double, double> binomial_block_size_formula(int left_degree, int right_degree, int l, int d);

} // namespace dynlaw
