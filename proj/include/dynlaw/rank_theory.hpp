#pragma once

// Exact tensor-train witnesses for sums of product terms, the rank and
// truncation bounds they are checked against, and spectral diagnostics.

#include "dynlaw/dictionary.hpp"
#include "dynlaw/systems.hpp"
#include "dynlaw/tensor_train.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dynlaw {

/// a_0 + a_1 x + ... + a_n x^n + s sin(x) + c cos(x) in the physical variable.
struct UnivariateFactor {
  std::vector<double> poly;
  double sin_coeff = 0.0;
  double cos_coeff = 0.0;

  static UnivariateFactor polynomial(std::vector<double> coeffs);
  static UnivariateFactor sine(double scale = 1.0);
  static UnivariateFactor cosine(double scale = 1.0);

  double operator()(double x) const;
  bool has_trig() const noexcept { return sin_coeff != 0.0 || cos_coeff != 0.0; }
  int degree() const noexcept;
};

/// coefficient * prod_{(mode, g)} g(x_mode); modes are 1-based.
struct ProductTerm {
  double coefficient = 1.0;
  std::vector<std::pair<std::size_t, UnivariateFactor>> factors;

  double operator()(std::span<const double> x) const;
};

/// Component k is a sum of at most N product terms supported on the window
/// [k - L, k + L].
struct LocalSystemDescriptor {
  std::size_t d = 0;
  int L = 0;
  std::size_t N = 0;
  std::vector<std::vector<ProductTerm>> terms;

  void validate() const;
  double evaluate(std::size_t k, std::span<const double> x) const;
};

struct ModeSubsetTerms {
  std::vector<std::size_t> modes;
  std::vector<ProductTerm> terms;
};

/// Component k is a sum over distinct mode subsets containing k, each with
/// at most N product terms supported on the subset.
struct KModeDescriptor {
  std::size_t d = 0;
  std::size_t K = 0;
  std::size_t N = 0;
  std::vector<std::vector<ModeSubsetTerms>> subsets;

  void validate() const;
  double evaluate(std::size_t k, std::span<const double> x) const;
};

LocalSystemDescriptor fput_descriptor(const SystemSpec& spec);
KModeDescriptor dipole_descriptor(const SystemSpec& spec);

/// Coefficients of a factor in the dictionary of the given mode; throws
/// RepresentationError when the factor is outside the dictionary's span.
Vector factor_coefficients(const UnivariateFactor& factor, const Dictionary& dict, std::size_t mode);

/// Rank-one train of a product term; modes without a factor get the constant.
TensorTrain product_term_tt(const ProductTerm& term, const Dictionary& dict);

TensorTrain exact_tt_local(const LocalSystemDescriptor& desc, const Dictionary& dict, std::size_t k,
                           double rel_tol = kDefaultTruncation);
TensorTrain exact_tt_kmode(const KModeDescriptor& desc, const Dictionary& dict, std::size_t k,
                           double rel_tol = kDefaultTruncation);

/// All components in one train whose last core carries the component label.
TensorTrain labeled_tt_local(const LocalSystemDescriptor& desc, const Dictionary& dict,
                             double rel_tol = kDefaultTruncation);
TensorTrain labeled_tt_kmode(const KModeDescriptor& desc, const Dictionary& dict, double rel_tol = kDefaultTruncation);

/// Printed interface bounds of the labelled trains, interfaces 1..d-1.
std::vector<double> local_label_rank_bounds(std::size_t d, int L, std::size_t N);
std::vector<double> kmode_label_rank_bounds(std::size_t d, std::size_t K, std::size_t N);

struct RankComparison {
  std::vector<std::size_t> measured;
  std::vector<double> bound;
  std::vector<std::size_t> violations;  // 1-based interfaces with measured > bound
};

RankComparison compare_ranks(const TensorTrain& tt, const std::vector<double>& bounds);

/// (L+1)^{-chi} (L+chi)/(chi-1).
double c1_bound(double chi, double Ltilde);

/// ceil(N[(chi/(chi-1) g/eps)^{1/(chi-1)} - 1]), floored at 0.
std::int64_t corollary_rank_bound(std::int64_t N, double chi, double g, double eps);

std::int64_t binomial(std::int64_t n, std::int64_t k);

/// N[d C(d-1,K-1) - k C(k-1,K-1) - (d-k) C(d-k-1,K-1)].
std::int64_t c2_factor(std::int64_t N, std::int64_t d, std::int64_t k, std::int64_t K);

std::size_t separation_rank_estimate(const TensorTrain& tt, std::size_t l, double rel_tol = 1e-10);
std::size_t separation_rank_estimate(const DenseTensor& tensor, std::size_t l, double rel_tol = 1e-10,
                                     std::size_t cap = kDefaultDenseCap);

/// Interaction scale of the unit dipole chain once angles are rescaled to [0, 1).
double dipole_decay_constant();

/// Largest over components of the L2 distance, on the rescaled unit cube,
/// between the unit dipole law and its truncation to pairs within Ltilde.
double truncated_dipole_error(std::size_t d, std::size_t Ltilde, std::size_t samples, std::uint64_t seed = 0);

/// Renyi entropy of the normalised squared spectrum; alpha = 1 is the
/// Shannon limit.
double renyi_entropy(std::span<const double> sigma, double alpha);

/// sup_n n^{1/p} a*_n over the non-increasing rearrangement of |a|.
double weak_lp_norm(std::span<const double> a, double p);

struct InterfaceDiagnostics {
  std::size_t interface = 0;
  std::vector<double> singular_values;
  std::size_t rank = 0;
  std::vector<std::pair<double, double>> renyi;    // (alpha, S_alpha)
  std::vector<std::pair<double, double>> weak_lp;  // (p, norm)
};

std::vector<InterfaceDiagnostics> diagnose(const TensorTrain& tt, double rel_tol = 1e-10);

} // namespace dynlaw
