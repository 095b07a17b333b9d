#pragma once

#include "dynlaw/tensor_train.hpp"

#include <atomic>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dynlaw {

enum class DictionaryKind { Monomial, Legendre, Trigonometric };

std::string to_string(DictionaryKind kind);
DictionaryKind dictionary_kind_from_string(std::string_view name);

/// Non-negative, non-decreasing degrees w(1..p).
class DegreeMap {
public:
  DegreeMap() = default;
  explicit DegreeMap(std::vector<int> weights);

  std::size_t size() const noexcept { return weights_.size(); }
  int operator[](std::size_t i) const { return weights_[i]; }
  int max() const noexcept { return weights_.empty() ? 0 : weights_.back(); }
  const std::vector<int>& weights() const noexcept { return weights_; }

  static DegreeMap polynomial(std::size_t p);
  static DegreeMap trigonometric();

  bool operator==(const DegreeMap&) const = default;

private:
  std::vector<int> weights_;
};

struct Interval {
  double lo = -1.0;
  double hi = 1.0;
  bool operator==(const Interval&) const = default;
};

/// Univariate dictionary Psi_1..Psi_p shared by all modes, with a per-mode
/// affine map from the mode's domain onto the canonical domain
/// ([-1, 1] for polynomials, [0, 2pi) for the trigonometric dictionary).
class Dictionary {
public:
  Dictionary(DictionaryKind kind, std::size_t p, std::vector<Interval> domains);

  DictionaryKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return p_; }
  std::size_t modes() const noexcept { return domains_.size(); }
  const DegreeMap& degree_map() const noexcept { return degrees_; }
  const std::vector<Interval>& domains() const noexcept { return domains_; }
  Interval canonical_domain() const;

  /// Affine map of x from mode's domain onto the canonical domain.
  double to_canonical(std::size_t mode, double x) const;

  /// Basis functions at an already-canonical coordinate.
  void eval_canonical(double t, std::span<double> out) const;
  Vector eval_canonical(double t) const;

  /// Psi(x) for the 1-based mode; counts out-of-domain evaluations.
  Vector eval(std::size_t mode, double x) const;

  std::size_t out_of_domain_count() const noexcept { return out_of_domain_->load(); }
  void reset_out_of_domain_count() const noexcept { out_of_domain_->store(0); }

  /// Same dictionary on different modes' domains.
  Dictionary with_domains(std::vector<Interval> domains) const;

private:
  DictionaryKind kind_;
  std::size_t p_;
  DegreeMap degrees_;
  std::vector<Interval> domains_;
  std::shared_ptr<std::atomic<std::size_t>> out_of_domain_;
};

/// Builds a dictionary; max_degree is ignored for the trigonometric kind.
Dictionary make_dictionary(DictionaryKind kind, int max_degree, std::vector<Interval> domains);
Dictionary make_dictionary(std::string_view kind, int max_degree, std::vector<Interval> domains);

/// One feature vector per mode.
std::vector<Vector> featurize(const Dictionary& dict, std::span<const double> x);

/// Features of mode l (1-based) for every row of X: an M x p matrix.
Matrix featurize_mode(const Dictionary& dict, std::size_t mode, const Matrix& states);

} // namespace dynlaw
