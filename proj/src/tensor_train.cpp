#include "dynlaw/tensor_train.hpp"

#include "dynlaw/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace dynlaw {

namespace {

std::size_t checked_product(std::span<const std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) n *= s;
  return n;
}

// Thin QR of a tall-or-wide matrix: returns (Q, R) with Q having min(m, n) columns.
std::pair<Matrix, Matrix> thin_qr(const Matrix& a) {
  const Eigen::Index k = std::min(a.rows(), a.cols());
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), k);
  Matrix r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

// Multiplies m (k x rl) into the left index of core: result (k, p, rr).
Core left_multiply(const Matrix& m, const Core& core) {
  Core out(static_cast<std::size_t>(m.rows()), core.phys(), core.right());
  out.right_unfolding() = m * core.right_unfolding();
  return out;
}

// Multiplies m (rr x k) into the right index of core: result (rl, p, k).
Core right_multiply(const Core& core, const Matrix& m) {
  Core out(core.left(), core.phys(), static_cast<std::size_t>(m.cols()));
  out.left_unfolding() = core.left_unfolding() * m;
  return out;
}

Core core_from_left_unfolding(const Matrix& m, std::size_t left, std::size_t phys) {
  Core out(left, phys, static_cast<std::size_t>(m.cols()));
  out.left_unfolding() = m;
  return out;
}

Core core_from_right_unfolding(const Matrix& m, std::size_t phys, std::size_t right) {
  Core out(static_cast<std::size_t>(m.rows()), phys, right);
  out.right_unfolding() = m;
  return out;
}

std::vector<Core> right_orthogonal_cores(const TensorTrain& tt) {
  std::vector<Core> cores = tt.cores();
  for (std::size_t l = cores.size(); l-- > 1;) {
    const Core& c = cores[l];
    auto [q, r] = thin_qr(c.right_unfolding().transpose());
    cores[l] = core_from_right_unfolding(q.transpose(), c.phys(), c.right());
    cores[l - 1] = right_multiply(cores[l - 1], r.transpose());
  }
  return cores;
}

} // namespace

// ---------------------------------------------------------------- DenseTensor

DenseTensor::DenseTensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_product(shape_), 0.0) {}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != checked_product(shape_))
    throw DimensionError("dense tensor: entry count " + std::to_string(data_.size()) +
                         " does not match shape product " + std::to_string(checked_product(shape_)));
  for (double v : data_)
    if (!std::isfinite(v)) throw InputError("dense tensor: non-finite entry");
}

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size())
    throw DimensionError("dense tensor: index of order " + std::to_string(index.size()) +
                         " for tensor of order " + std::to_string(shape_.size()));
  std::size_t flat = 0;
  for (std::size_t k = 0; k < index.size(); ++k) {
    if (index[k] >= shape_[k]) throw IndexError("dense tensor: index out of range in mode " + std::to_string(k + 1));
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

double& DenseTensor::at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
double DenseTensor::at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

double DenseTensor::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double relative_difference(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw DimensionError("relative_difference: shape mismatch");
  double num = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double e = a[k] - b[k];
    num += e * e;
  }
  const double den = b.norm();
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

// ----------------------------------------------------------------------- Core

Core::Core(std::size_t left, std::size_t phys, std::size_t right)
    : left_(left), phys_(phys), right_(right), data_(left * phys * right, 0.0) {}

Core::Core(std::size_t left, std::size_t phys, std::size_t right, std::vector<double> data)
    : left_(left), phys_(phys), right_(right), data_(std::move(data)) {
  if (data_.size() != left * phys * right)
    throw DimensionError("core: entry count does not match (" + std::to_string(left) + ", " +
                         std::to_string(phys) + ", " + std::to_string(right) + ")");
}

Matrix Core::slice(std::size_t i) const {
  Matrix m(left_, right_);
  for (std::size_t a = 0; a < left_; ++a)
    for (std::size_t b = 0; b < right_; ++b) m(a, b) = (*this)(a, i, b);
  return m;
}

bool Core::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

// ---------------------------------------------------------------- TensorTrain

TensorTrain::TensorTrain(std::vector<Core> cores, std::optional<std::size_t> label_dim)
    : cores_(std::move(cores)), label_dim_(label_dim) {
  if (cores_.empty()) throw StructureError("tensor train: no cores");
  if (cores_.front().left() != 1) throw StructureError("tensor train: first core must have left rank 1");
  for (std::size_t l = 0; l + 1 < cores_.size(); ++l)
    if (cores_[l].right() != cores_[l + 1].left())
      throw StructureError("tensor train: rank mismatch between cores " + std::to_string(l + 1) + " and " +
                           std::to_string(l + 2));
  if (label_dim_) {
    if (*label_dim_ == 0) throw StructureError("tensor train: label dimension must be positive");
    if (cores_.back().right() != *label_dim_)
      throw StructureError("tensor train: last core right rank differs from label dimension");
  } else if (cores_.back().right() != 1) {
    throw StructureError("tensor train: last core must have right rank 1");
  }
  for (std::size_t l = 0; l < cores_.size(); ++l) {
    if (cores_[l].phys() == 0 || cores_[l].left() == 0 || cores_[l].right() == 0)
      throw StructureError("tensor train: empty core " + std::to_string(l + 1));
    if (!cores_[l].all_finite()) throw InputError("tensor train: non-finite entry in core " + std::to_string(l + 1));
  }
}

std::vector<std::size_t> TensorTrain::dims() const {
  std::vector<std::size_t> out;
  out.reserve(cores_.size());
  for (const Core& c : cores_) out.push_back(c.phys());
  return out;
}

std::vector<std::size_t> TensorTrain::ranks() const {
  std::vector<std::size_t> out{1};
  for (const Core& c : cores_) out.push_back(c.right());
  return out;
}

std::size_t TensorTrain::max_rank() const {
  std::size_t r = 1;
  for (std::size_t l = 0; l + 1 < cores_.size(); ++l) r = std::max(r, cores_[l].right());
  return r;
}

std::size_t TensorTrain::parameter_count() const {
  std::size_t n = 0;
  for (const Core& c : cores_) n += c.data().size();
  return n;
}

// ----------------------------------------------------------------- operations

Vector tt_evaluate(const TensorTrain& tt, std::span<const Vector> features) {
  if (features.size() != tt.order())
    throw DimensionError("tt_evaluate: got " + std::to_string(features.size()) + " feature vectors for order " +
                         std::to_string(tt.order()));
  Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
  for (std::size_t l = 0; l < tt.order(); ++l) {
    const Core& c = tt.cores()[l];
    const Vector& psi = features[l];
    if (static_cast<std::size_t>(psi.size()) != c.phys())
      throw DimensionError("tt_evaluate: feature vector for mode " + std::to_string(l + 1) + " has length " +
                           std::to_string(psi.size()) + ", expected " + std::to_string(c.phys()));
    const Eigen::RowVectorXd w = v * c.right_unfolding();
    Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(c.right()));
    for (std::size_t i = 0; i < c.phys(); ++i)
      next += psi[static_cast<Eigen::Index>(i)] *
              w.segment(static_cast<Eigen::Index>(i * c.right()), static_cast<Eigen::Index>(c.right()));
    v = std::move(next);
  }
  return v.transpose();
}

double tt_evaluate_scalar(const TensorTrain& tt, std::span<const Vector> features) {
  if (tt.label_dim()) throw DimensionError("tt_evaluate_scalar: train carries a label leg");
  return tt_evaluate(tt, features)[0];
}

DenseTensor tt_to_full(const TensorTrain& tt, std::size_t cap) {
  std::vector<std::size_t> shape = tt.dims();
  if (tt.label_dim()) shape.push_back(*tt.label_dim());
  double required = 1.0;
  for (std::size_t s : shape) required *= static_cast<double>(s);
  if (required > static_cast<double>(cap))
    throw CapacityError("tt_to_full: " + std::to_string(required) + " entries required, cap is " +
                        std::to_string(cap));
  RowMatrix acc = RowMatrix::Ones(1, 1);
  for (const Core& c : tt.cores()) {
    RowMatrix prod = acc * c.right_unfolding();
    acc = Eigen::Map<RowMatrix>(prod.data(), prod.rows() * static_cast<Eigen::Index>(c.phys()),
                                static_cast<Eigen::Index>(c.right()));
  }
  std::vector<double> data(acc.data(), acc.data() + acc.size());
  return DenseTensor(std::move(shape), std::move(data));
}

TensorTrain right_orthogonalize(const TensorTrain& tt) {
  return TensorTrain(right_orthogonal_cores(tt), tt.label_dim());
}

TensorTrain left_orthogonalize(const TensorTrain& tt, double rel_tol) {
  std::vector<Core> cores = right_orthogonal_cores(tt);
  for (std::size_t l = 0; l + 1 < cores.size(); ++l) {
    const Core& c = cores[l];
    Eigen::BDCSVD<Matrix> svd(Matrix(c.left_unfolding()), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    Eigen::Index keep = 1;
    const double cutoff = rel_tol * (s.size() > 0 ? s[0] : 0.0);
    for (Eigen::Index k = 1; k < s.size(); ++k)
      if (s[k] > cutoff) keep = k + 1;
    const Matrix u = svd.matrixU().leftCols(keep);
    const Matrix sv = s.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
    cores[l] = core_from_left_unfolding(u, c.left(), c.phys());
    cores[l + 1] = left_multiply(sv, cores[l + 1]);
  }
  return TensorTrain(std::move(cores), tt.label_dim());
}

TensorTrain apply_gauge(const TensorTrain& tt, const GaugeSequence& gauge) {
  const std::size_t d = tt.order();
  if (gauge.matrices.size() + 1 != d)
    throw DimensionError("apply_gauge: expected " + std::to_string(d - 1) + " gauge matrices, got " +
                         std::to_string(gauge.matrices.size()));
  std::vector<Matrix> inverses;
  inverses.reserve(gauge.matrices.size());
  for (std::size_t l = 0; l + 1 < d; ++l) {
    const Matrix& a = gauge.matrices[l];
    const auto r = static_cast<Eigen::Index>(tt.cores()[l].right());
    if (a.rows() != r || a.cols() != r)
      throw DimensionError("apply_gauge: gauge matrix " + std::to_string(l + 1) + " must be " + std::to_string(r) +
                           "x" + std::to_string(r));
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& s = svd.singularValues();
    const double smax = s[0];
    const double smin = s[s.size() - 1];
    if (!(smin > 0.0) || smax / smin > 1e14 || !std::isfinite(smax / smin))
      throw SingularGaugeError("apply_gauge: gauge matrix " + std::to_string(l + 1) + " is singular (condition " +
                               std::to_string(smin > 0.0 ? smax / smin : INFINITY) + ")");
    inverses.push_back(svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose());
  }
  std::vector<Core> cores = tt.cores();
  for (std::size_t l = 0; l < d; ++l) {
    if (l > 0) cores[l] = left_multiply(gauge.matrices[l - 1], cores[l]);
    if (l + 1 < d) cores[l] = right_multiply(cores[l], inverses[l]);
  }
  return TensorTrain(std::move(cores), tt.label_dim());
}

std::vector<double> interface_singular_values(const TensorTrain& tt, std::size_t l) {
  const std::size_t d = tt.order();
  if (l < 1 || l >= d)
    throw IndexError("interface_singular_values: interface " + std::to_string(l) + " outside [1, " +
                     std::to_string(d - 1) + "]");
  std::vector<Core> cores = right_orthogonal_cores(tt);
  for (std::size_t k = 0; k + 1 < l; ++k) {
    auto [q, r] = thin_qr(Matrix(cores[k].left_unfolding()));
    const std::size_t left = cores[k].left();
    const std::size_t phys = cores[k].phys();
    cores[k] = core_from_left_unfolding(q, left, phys);
    cores[k + 1] = left_multiply(r, cores[k + 1]);
  }
  Eigen::BDCSVD<Matrix> svd(Matrix(cores[l - 1].left_unfolding()));
  const Vector& s = svd.singularValues();
  return {s.data(), s.data() + s.size()};
}

double tt_norm(const TensorTrain& tt) {
  const std::vector<Core> cores = right_orthogonal_cores(tt);
  return Eigen::Map<const Vector>(cores.front().data().data(), Eigen::Index(cores.front().data().size())).norm();
}

double left_isometry_residual(const TensorTrain& tt) {
  double worst = 0.0;
  for (std::size_t l = 0; l + 1 < tt.order(); ++l) {
    const auto c = tt.cores()[l].left_unfolding();
    const Matrix g = c.transpose() * c;
    worst = std::max(worst, (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
  }
  return worst;
}

TensorTrain tt_add(const TensorTrain& a, const TensorTrain& b) {
  if (a.dims() != b.dims()) throw DimensionError("tt_add: physical dimensions differ");
  if (a.label_dim() != b.label_dim()) throw DimensionError("tt_add: label legs differ");
  const std::size_t d = a.order();
  std::vector<Core> cores;
  cores.reserve(d);
  if (d == 1) {
    const Core& ca = a.cores()[0];
    Core c = ca;
    for (std::size_t k = 0; k < c.data().size(); ++k) c.data()[k] += b.cores()[0].data()[k];
    cores.push_back(std::move(c));
    return TensorTrain(std::move(cores), a.label_dim());
  }
  for (std::size_t l = 0; l < d; ++l) {
    const Core& ca = a.cores()[l];
    const Core& cb = b.cores()[l];
    const bool first = l == 0;
    const bool last = l + 1 == d;
    const std::size_t left = first ? 1 : ca.left() + cb.left();
    const std::size_t right = last ? ca.right() : ca.right() + cb.right();
    Core c(left, ca.phys(), right);
    const std::size_t bl = first ? 0 : ca.left();
    const std::size_t br = last ? 0 : ca.right();
    for (std::size_t i = 0; i < ca.phys(); ++i) {
      for (std::size_t x = 0; x < ca.left(); ++x)
        for (std::size_t y = 0; y < ca.right(); ++y) c(x, i, y) = ca(x, i, y);
      for (std::size_t x = 0; x < cb.left(); ++x)
        for (std::size_t y = 0; y < cb.right(); ++y) c(bl + x, i, br + y) += cb(x, i, y);
    }
    cores.push_back(std::move(c));
  }
  return TensorTrain(std::move(cores), a.label_dim());
}

TensorTrain tt_scale(const TensorTrain& tt, double factor) {
  std::vector<Core> cores = tt.cores();
  for (double& v : cores.front().data()) v *= factor;
  return TensorTrain(std::move(cores), tt.label_dim());
}

TensorTrain tt_rank_one(std::span<const Vector> factors) {
  std::vector<Core> cores;
  cores.reserve(factors.size());
  for (const Vector& f : factors) {
    std::vector<double> data(f.data(), f.data() + f.size());
    cores.emplace_back(1, static_cast<std::size_t>(f.size()), 1, std::move(data));
  }
  return TensorTrain(std::move(cores));
}

} // namespace dynlaw
