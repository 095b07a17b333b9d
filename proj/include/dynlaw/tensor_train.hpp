#pragma once

// Tensor trains with order-3 cores, optionally carrying an open "label" leg
// on the last core.
//
// Index conventions: modes and interfaces are 1-based in the public API
// (mode l in [1, d], interface l in [1, d-1] sits between cores l and l+1);
// containers are 0-based.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace dynlaw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::size_t kDefaultDenseCap = 10'000'000;
inline constexpr double kDefaultTruncation = 1e-12;

/// Row-major dense tensor.
class DenseTensor {
public:
  DenseTensor() = default;
  explicit DenseTensor(std::vector<std::size_t> shape);
  DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t order() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double& at(std::span<const std::size_t> index);
  double at(std::span<const std::size_t> index) const;

  std::size_t flat_index(std::span<const std::size_t> index) const;

  double norm() const;

private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

double relative_difference(const DenseTensor& a, const DenseTensor& b);

/// One order-3 core, stored row-major as (left rank, physical, right rank).
class Core {
public:
  Core() = default;
  Core(std::size_t left, std::size_t phys, std::size_t right);
  Core(std::size_t left, std::size_t phys, std::size_t right, std::vector<double> data);

  std::size_t left() const noexcept { return left_; }
  std::size_t phys() const noexcept { return phys_; }
  std::size_t right() const noexcept { return right_; }

  double& operator()(std::size_t a, std::size_t i, std::size_t b) {
    return data_[(a * phys_ + i) * right_ + b];
  }
  double operator()(std::size_t a, std::size_t i, std::size_t b) const {
    return data_[(a * phys_ + i) * right_ + b];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  /// (left*phys) x right view; contiguous thanks to the layout.
  Eigen::Map<RowMatrix> left_unfolding() { return {data_.data(), Eigen::Index(left_ * phys_), Eigen::Index(right_)}; }
  Eigen::Map<const RowMatrix> left_unfolding() const {
    return {data_.data(), Eigen::Index(left_ * phys_), Eigen::Index(right_)};
  }
  /// left x (phys*right) view.
  Eigen::Map<RowMatrix> right_unfolding() { return {data_.data(), Eigen::Index(left_), Eigen::Index(phys_ * right_)}; }
  Eigen::Map<const RowMatrix> right_unfolding() const {
    return {data_.data(), Eigen::Index(left_), Eigen::Index(phys_ * right_)};
  }

  /// Matrix slice (C)_i of shape left x right.
  Matrix slice(std::size_t i) const;

  bool all_finite() const;

private:
  std::size_t left_ = 0;
  std::size_t phys_ = 0;
  std::size_t right_ = 0;
  std::vector<double> data_;
};

/// Immutable tensor train. With a label leg the right rank of the last core
/// is the label dimension and evaluation yields a vector.
class TensorTrain {
public:
  TensorTrain() = default;
  explicit TensorTrain(std::vector<Core> cores, std::optional<std::size_t> label_dim = std::nullopt);

  std::size_t order() const noexcept { return cores_.size(); }
  const std::vector<Core>& cores() const noexcept { return cores_; }
  const Core& core(std::size_t l) const { return cores_.at(l - 1); }
  std::optional<std::size_t> label_dim() const noexcept { return label_dim_; }

  std::vector<std::size_t> dims() const;
  /// r_0 .. r_d; r_d is the label dimension when a label leg is present.
  std::vector<std::size_t> ranks() const;
  std::size_t max_rank() const;
  std::size_t parameter_count() const;

private:
  std::vector<Core> cores_;
  std::optional<std::size_t> label_dim_;
};

/// Invertible matrices A_1..A_{d-1} acting on the virtual bonds.
struct GaugeSequence {
  std::vector<Matrix> matrices;
};

/// Contracts the train against one feature vector per mode.
/// Returns a vector of length 1, or label_dim with a label leg.
Vector tt_evaluate(const TensorTrain& tt, std::span<const Vector> features);
double tt_evaluate_scalar(const TensorTrain& tt, std::span<const Vector> features);

DenseTensor tt_to_full(const TensorTrain& tt, std::size_t cap = kDefaultDenseCap);

/// Left-canonical form with minimal ranks: a right-to-left QR sweep followed
/// by a left-to-right SVD sweep dropping singular values below rel_tol * max.
TensorTrain left_orthogonalize(const TensorTrain& tt, double rel_tol = kDefaultTruncation);

/// Right-canonical form (cores 2..d have orthonormal right unfoldings), no truncation.
TensorTrain right_orthogonalize(const TensorTrain& tt);

TensorTrain apply_gauge(const TensorTrain& tt, const GaugeSequence& gauge);

/// Singular values of the unfolding separating modes 1..l from the rest,
/// computed through canonical sweeps without dense unfolding.
std::vector<double> interface_singular_values(const TensorTrain& tt, std::size_t l);

double tt_norm(const TensorTrain& tt);

/// Largest |C^T C - I| entry over the left unfoldings of cores 1..d-1.
double left_isometry_residual(const TensorTrain& tt);

/// Sum of two trains with identical dims and label legs (direct-sum ranks).
TensorTrain tt_add(const TensorTrain& a, const TensorTrain& b);

TensorTrain tt_scale(const TensorTrain& tt, double factor);

/// Rank-1 train from one vector per mode.
TensorTrain tt_rank_one(std::span<const Vector> factors);

} // namespace dynlaw
