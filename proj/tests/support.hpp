#pragma once

#include "dynlaw/random.hpp"
#include "dynlaw/tensor_train.hpp"

#include <vector>

namespace dynlaw::testing {

inline Matrix random_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Vector random_vector(CounterRng& rng, Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline std::size_t random_int(CounterRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

/// Gaussian train with the given dims and interior ranks r_1..r_{d-1}.
inline TensorTrain random_tt(CounterRng& rng, const std::vector<std::size_t>& dims,
                             const std::vector<std::size_t>& inner, std::optional<std::size_t> label = std::nullopt) {
  std::vector<Core> cores;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const std::size_t left = l == 0 ? 1 : inner[l - 1];
    const std::size_t right = l + 1 == dims.size() ? label.value_or(1) : inner[l];
    Core c(left, dims[l], right);
    for (double& v : c.data()) v = rng.normal();
    cores.push_back(std::move(c));
  }
  return TensorTrain(std::move(cores), label);
}

/// Random dims in [1, pmax] and ranks in [1, rmax].
inline TensorTrain random_tt(CounterRng& rng, std::size_t d, std::size_t pmax, std::size_t rmax) {
  std::vector<std::size_t> dims(d), inner(d > 0 ? d - 1 : 0);
  for (auto& p : dims) p = random_int(rng, 1, pmax);
  for (auto& r : inner) r = random_int(rng, 1, rmax);
  return random_tt(rng, dims, inner);
}

inline Vector indicator(std::size_t n, std::size_t i) {
  Vector e = Vector::Zero(static_cast<Eigen::Index>(n));
  e[static_cast<Eigen::Index>(i)] = 1.0;
  return e;
}

/// Brute-force dense contraction, independent of tt_to_full.
inline double brute_entry(const TensorTrain& tt, const std::vector<std::size_t>& idx) {
  Matrix acc = Matrix::Ones(1, 1);
  for (std::size_t l = 0; l < tt.order(); ++l) acc = acc * tt.cores()[l].slice(idx[l]);
  return acc.sum();
}

/// All multi-indices of a shape in row-major order.
inline std::vector<std::vector<std::size_t>> all_indices(const std::vector<std::size_t>& shape) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<std::size_t> idx(shape.size(), 0);
  while (true) {
    out.push_back(idx);
    std::size_t k = shape.size();
    while (k > 0) {
      --k;
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
    if (shape.empty()) return out;
  }
}

} // namespace dynlaw::testing
