#include "dynlaw/rank_theory.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/random.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace dynlaw {

UnivariateFactor UnivariateFactor::polynomial(std::vector<double> coeffs) {
  UnivariateFactor f;
  f.poly = std::move(coeffs);
  return f;
}

UnivariateFactor UnivariateFactor::sine(double scale) {
  UnivariateFactor f;
  f.sin_coeff = scale;
  return f;
}

UnivariateFactor UnivariateFactor::cosine(double scale) {
  UnivariateFactor f;
  f.cos_coeff = scale;
  return f;
}

double UnivariateFactor::operator()(double x) const {
  double v = 0.0;
  for (std::size_t i = poly.size(); i-- > 0;) v = v * x + poly[i];
  return v + sin_coeff * std::sin(x) + cos_coeff * std::cos(x);
}

int UnivariateFactor::degree() const noexcept {
  for (std::size_t i = poly.size(); i-- > 0;)
    if (poly[i] != 0.0) return static_cast<int>(i);
  return poly.empty() ? -1 : 0;
}

double ProductTerm::operator()(std::span<const double> x) const {
  double v = coefficient;
  for (const auto& [mode, g] : factors) v *= g(x[mode - 1]);
  return v;
}

namespace {

void check_term_modes(const ProductTerm& term, std::size_t d, const auto& allowed, const std::string& where) {
  std::set<std::size_t> seen;
  for (const auto& [mode, g] : term.factors) {
    if (mode < 1 || mode > d) throw ConfigError(where + ": factor on mode " + std::to_string(mode) + " out of range");
    if (!seen.insert(mode).second) throw ConfigError(where + ": two factors on mode " + std::to_string(mode));
    if (!allowed(mode)) throw ConfigError(where + ": factor on mode " + std::to_string(mode) + " outside the support");
  }
}

} // namespace

void LocalSystemDescriptor::validate() const {
  if (d == 0) throw ConfigError("local descriptor: d must be at least 1");
  if (L < 0) throw ConfigError("local descriptor: L must be non-negative");
  if (terms.size() != d) throw ConfigError("local descriptor: need one term list per component");
  for (std::size_t k = 1; k <= d; ++k) {
    const auto lo = static_cast<long long>(k) - L;
    const auto hi = static_cast<long long>(k) + L;
    for (const ProductTerm& t : terms[k - 1])
      check_term_modes(t, d, [&](std::size_t m) { return static_cast<long long>(m) >= lo && static_cast<long long>(m) <= hi; },
                       "local descriptor, component " + std::to_string(k));
  }
}

double LocalSystemDescriptor::evaluate(std::size_t k, std::span<const double> x) const {
  if (k < 1 || k > d) throw IndexError("local descriptor: component " + std::to_string(k) + " out of range");
  double v = 0.0;
  for (const ProductTerm& t : terms[k - 1]) v += t(x);
  return v;
}

void KModeDescriptor::validate() const {
  if (d == 0 || K == 0) throw ConfigError("k-mode descriptor: d and K must be at least 1");
  if (subsets.size() != d) throw ConfigError("k-mode descriptor: need one subset list per component");
  for (std::size_t k = 1; k <= d; ++k) {
    std::set<std::vector<std::size_t>> distinct;
    for (const ModeSubsetTerms& s : subsets[k - 1]) {
      const std::string where = "k-mode descriptor, component " + std::to_string(k);
      std::vector<std::size_t> modes = s.modes;
      std::sort(modes.begin(), modes.end());
      if (modes.size() > K) throw ConfigError(where + ": subset larger than K");
      if (std::find(modes.begin(), modes.end(), k) == modes.end()) throw ConfigError(where + ": subset misses k");
      if (!distinct.insert(modes).second) throw ConfigError(where + ": repeated subset");
      if (s.terms.size() > N) throw ConfigError(where + ": more than N terms on one subset");
      for (const ProductTerm& t : s.terms)
        check_term_modes(t, d, [&](std::size_t m) { return std::binary_search(modes.begin(), modes.end(), m); }, where);
    }
  }
}

double KModeDescriptor::evaluate(std::size_t k, std::span<const double> x) const {
  if (k < 1 || k > d) throw IndexError("k-mode descriptor: component " + std::to_string(k) + " out of range");
  double v = 0.0;
  for (const ModeSubsetTerms& s : subsets[k - 1])
    for (const ProductTerm& t : s.terms) v += t(x);
  return v;
}

namespace {

// c (x_a - x_b)^n expanded into products; mode 0 or d+1 stands for a wall at 0.
void add_power_of_difference(std::vector<ProductTerm>& out, double c, std::size_t a, std::size_t b, int n,
                             std::size_t d) {
  const bool a_wall = a == 0 || a == d + 1;
  const bool b_wall = b == 0 || b == d + 1;
  for (int j = 0; j <= n; ++j) {
    const int rest = n - j;
    if ((a_wall && j > 0) || (b_wall && rest > 0)) continue;
    ProductTerm t;
    t.coefficient = c * static_cast<double>(binomial(n, j)) * ((rest % 2) ? -1.0 : 1.0);
    if (j > 0) {
      std::vector<double> p(static_cast<std::size_t>(j) + 1, 0.0);
      p.back() = 1.0;
      t.factors.emplace_back(a, UnivariateFactor::polynomial(std::move(p)));
    }
    if (rest > 0) {
      std::vector<double> p(static_cast<std::size_t>(rest) + 1, 0.0);
      p.back() = 1.0;
      t.factors.emplace_back(b, UnivariateFactor::polynomial(std::move(p)));
    }
    if (t.factors.empty()) continue;
    out.push_back(std::move(t));
  }
}

} // namespace

LocalSystemDescriptor fput_descriptor(const SystemSpec& spec) {
  if (spec.kind != SystemKind::Fput) throw ConfigError("fput_descriptor: system is not an FPUT chain");
  spec.validate();
  LocalSystemDescriptor desc;
  desc.d = spec.d;
  desc.L = 1;
  desc.N = 4;
  desc.terms.resize(spec.d);
  for (std::size_t k = 1; k <= spec.d; ++k) {
    auto& terms = desc.terms[k - 1];
    const double kr = spec.fput.kappa[static_cast<Eigen::Index>(k)];
    const double kl = spec.fput.kappa[static_cast<Eigen::Index>(k - 1)];
    const double br = spec.fput.beta[static_cast<Eigen::Index>(k)];
    const double bl = spec.fput.beta[static_cast<Eigen::Index>(k - 1)];
    add_power_of_difference(terms, kr, k + 1, k, 1, spec.d);
    add_power_of_difference(terms, -kl, k, k - 1, 1, spec.d);
    add_power_of_difference(terms, br, k + 1, k, 3, spec.d);
    add_power_of_difference(terms, -bl, k, k - 1, 3, spec.d);
  }
  return desc;
}

KModeDescriptor dipole_descriptor(const SystemSpec& spec) {
  if (spec.kind != SystemKind::Dipole) throw ConfigError("dipole_descriptor: system is not a dipole chain");
  spec.validate();
  KModeDescriptor desc;
  desc.d = spec.d;
  desc.K = 2;
  desc.N = 2;
  desc.subsets.resize(spec.d);
  const auto& P = spec.dipole;
  for (std::size_t k = 1; k <= spec.d; ++k) {
    const auto ki = static_cast<Eigen::Index>(k - 1);
    for (std::size_t l = 1; l <= spec.d; ++l) {
      if (l == k) continue;
      const auto li = static_cast<Eigen::Index>(l - 1);
      const double dist = std::abs(P.positions[ki] - P.positions[li]);
      const double c = P.inertia[ki] * P.moments[ki] * P.moments[li] / (dist * dist * dist);
      ModeSubsetTerms s;
      s.modes = {k, l};
      ProductTerm a;
      a.coefficient = c;
      a.factors = {{k, UnivariateFactor::sine()}, {l, UnivariateFactor::cosine()}};
      ProductTerm b;
      b.coefficient = -c;
      b.factors = {{k, UnivariateFactor::cosine()}, {l, UnivariateFactor::sine()}};
      s.terms = {a, b};
      desc.subsets[k - 1].push_back(std::move(s));
    }
  }
  return desc;
}

Vector factor_coefficients(const UnivariateFactor& factor, const Dictionary& dict, std::size_t mode) {
  if (mode < 1 || mode > dict.modes()) throw IndexError("factor_coefficients: mode " + std::to_string(mode) + " out of range");
  const std::size_t p = dict.size();
  const Interval iv = dict.domains()[mode - 1];
  const Interval c = dict.canonical_domain();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(p));

  if (dict.kind() == DictionaryKind::Trigonometric) {
    if (factor.degree() > 0) throw RepresentationError("factor_coefficients: polynomial factor under a trigonometric dictionary");
    const double scale = (c.hi - c.lo) / (iv.hi - iv.lo);
    if (factor.has_trig() && std::abs(scale - 1.0) > 1e-12)
      throw RepresentationError("factor_coefficients: mode domain is not a full period");
    // x = t + shift
    const double shift = iv.lo - c.lo;
    out[0] = factor.poly.empty() ? 0.0 : factor.poly[0];
    out[1] = factor.sin_coeff * std::cos(shift) - factor.cos_coeff * std::sin(shift);
    out[2] = factor.sin_coeff * std::sin(shift) + factor.cos_coeff * std::cos(shift);
    return out;
  }

  if (factor.has_trig()) throw RepresentationError("factor_coefficients: trigonometric factor under a polynomial dictionary");
  const int deg = factor.degree();
  if (deg >= static_cast<int>(p))
    throw RepresentationError("factor_coefficients: degree " + std::to_string(deg) + " exceeds dictionary size " +
                              std::to_string(p));
  if (deg < 0) return out;
  // x = a + b t
  const double b = (iv.hi - iv.lo) / (c.hi - c.lo);
  const double a = iv.lo - c.lo * b;
  Vector mono = Vector::Zero(static_cast<Eigen::Index>(p));
  for (int i = deg; i >= 0; --i) {
    Vector next = Vector::Zero(static_cast<Eigen::Index>(p));
    for (Eigen::Index j = 0; j + 1 < static_cast<Eigen::Index>(p); ++j) {
      next[j] += a * mono[j];
      next[j + 1] += b * mono[j];
    }
    next[static_cast<Eigen::Index>(p) - 1] += a * mono[static_cast<Eigen::Index>(p) - 1];
    next[0] += factor.poly[static_cast<std::size_t>(i)];
    mono = next;
  }
  if (dict.kind() == DictionaryKind::Monomial) return mono;

  // Columns hold monomial coefficients of P_0..P_{p-1}.
  Matrix basis = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  basis(0, 0) = 1.0;
  if (p > 1) basis(1, 1) = 1.0;
  for (Eigen::Index k = 1; k + 1 < static_cast<Eigen::Index>(p); ++k) {
    const double kk = static_cast<double>(k);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
      double v = -kk * basis(j, k - 1);
      if (j > 0) v += (2.0 * kk + 1.0) * basis(j - 1, k);
      basis(j, k + 1) = v / (kk + 1.0);
    }
  }
  return basis.triangularView<Eigen::Upper>().solve(mono);
}

TensorTrain product_term_tt(const ProductTerm& term, const Dictionary& dict) {
  const std::size_t d = dict.modes();
  std::vector<Vector> factors(d);
  const UnivariateFactor one = UnivariateFactor::polynomial({1.0});
  for (std::size_t l = 1; l <= d; ++l) factors[l - 1] = factor_coefficients(one, dict, l);
  for (const auto& [mode, g] : term.factors) {
    if (mode < 1 || mode > d) throw IndexError("product_term_tt: mode " + std::to_string(mode) + " out of range");
    factors[mode - 1] = factor_coefficients(g, dict, mode);
  }
  factors[0] *= term.coefficient;
  return tt_rank_one(factors);
}

namespace {

TensorTrain zero_train(const Dictionary& dict, std::optional<std::size_t> label_dim = std::nullopt) {
  std::vector<Core> cores;
  for (std::size_t l = 0; l < dict.modes(); ++l)
    cores.emplace_back(1, dict.size(), (l + 1 == dict.modes() && label_dim) ? *label_dim : 1);
  return TensorTrain(std::move(cores), label_dim);
}

TensorTrain sum_and_round(const std::vector<ProductTerm>& terms, const Dictionary& dict, double rel_tol) {
  if (terms.empty()) return zero_train(dict);
  TensorTrain acc = product_term_tt(terms.front(), dict);
  for (std::size_t i = 1; i < terms.size(); ++i) acc = tt_add(acc, product_term_tt(terms[i], dict));
  if (tt_norm(acc) == 0.0) return zero_train(dict);
  return left_orthogonalize(acc, rel_tol);
}

void check_dictionary(const Dictionary& dict, std::size_t d) {
  if (dict.modes() != d)
    throw DimensionError("dictionary has " + std::to_string(dict.modes()) + " modes, system has " + std::to_string(d));
}

TensorTrain with_label(const TensorTrain& tt, std::size_t k, std::size_t label_dim) {
  std::vector<Core> cores = tt.cores();
  const Core& last = cores.back();
  Core labeled(last.left(), last.phys(), label_dim);
  for (std::size_t a = 0; a < last.left(); ++a)
    for (std::size_t i = 0; i < last.phys(); ++i) labeled(a, i, k - 1) = last(a, i, 0);
  cores.back() = std::move(labeled);
  return TensorTrain(std::move(cores), label_dim);
}

TensorTrain label_sum(const std::vector<TensorTrain>& components, const Dictionary& dict, double rel_tol) {
  const std::size_t d = components.size();
  TensorTrain acc = with_label(components.front(), 1, d);
  for (std::size_t k = 2; k <= d; ++k) acc = tt_add(acc, with_label(components[k - 1], k, d));
  if (tt_norm(acc) == 0.0) return zero_train(dict, d);
  return left_orthogonalize(acc, rel_tol);
}

} // namespace

TensorTrain exact_tt_local(const LocalSystemDescriptor& desc, const Dictionary& dict, std::size_t k, double rel_tol) {
  desc.validate();
  check_dictionary(dict, desc.d);
  if (k < 1 || k > desc.d) throw IndexError("exact_tt_local: component " + std::to_string(k) + " out of range");
  return sum_and_round(desc.terms[k - 1], dict, rel_tol);
}

TensorTrain exact_tt_kmode(const KModeDescriptor& desc, const Dictionary& dict, std::size_t k, double rel_tol) {
  desc.validate();
  check_dictionary(dict, desc.d);
  if (k < 1 || k > desc.d) throw IndexError("exact_tt_kmode: component " + std::to_string(k) + " out of range");
  std::vector<ProductTerm> terms;
  for (const ModeSubsetTerms& s : desc.subsets[k - 1]) terms.insert(terms.end(), s.terms.begin(), s.terms.end());
  return sum_and_round(terms, dict, rel_tol);
}

TensorTrain labeled_tt_local(const LocalSystemDescriptor& desc, const Dictionary& dict, double rel_tol) {
  std::vector<TensorTrain> components;
  for (std::size_t k = 1; k <= desc.d; ++k) components.push_back(exact_tt_local(desc, dict, k, rel_tol));
  return label_sum(components, dict, rel_tol);
}

TensorTrain labeled_tt_kmode(const KModeDescriptor& desc, const Dictionary& dict, double rel_tol) {
  std::vector<TensorTrain> components;
  for (std::size_t k = 1; k <= desc.d; ++k) components.push_back(exact_tt_kmode(desc, dict, k, rel_tol));
  return label_sum(components, dict, rel_tol);
}

std::vector<double> local_label_rank_bounds(std::size_t d, int L, std::size_t N) {
  std::vector<double> out;
  for (std::size_t k = 1; k < d; ++k)
    out.push_back(static_cast<double>(k) - L + 1.0 + 2.0 * static_cast<double>(N) * L);
  return out;
}

std::vector<double> kmode_label_rank_bounds(std::size_t d, std::size_t K, std::size_t N) {
  std::vector<double> out;
  const auto dd = static_cast<std::int64_t>(d);
  const auto KK = static_cast<std::int64_t>(K);
  for (std::int64_t k = 1; k < dd; ++k)
    out.push_back(static_cast<double>(c2_factor(static_cast<std::int64_t>(N), dd, k, KK) + k * binomial(k - 1, KK - 1) + 1));
  return out;
}

RankComparison compare_ranks(const TensorTrain& tt, const std::vector<double>& bounds) {
  RankComparison out;
  out.bound = bounds;
  for (std::size_t l = 0; l + 1 < tt.order(); ++l) out.measured.push_back(tt.cores()[l].right());
  if (out.measured.size() != bounds.size()) throw DimensionError("compare_ranks: one bound per interface expected");
  for (std::size_t i = 0; i < bounds.size(); ++i)
    if (static_cast<double>(out.measured[i]) > bounds[i]) out.violations.push_back(i + 1);
  return out;
}

double c1_bound(double chi, double Ltilde) {
  if (!(chi > 1.0)) throw DomainError("c1_bound: chi must exceed 1");
  if (!(Ltilde >= 1.0)) throw DomainError("c1_bound: truncation length must be at least 1");
  return (Ltilde + chi) / ((chi - 1.0) * std::pow(Ltilde + 1.0, chi));
}

std::int64_t corollary_rank_bound(std::int64_t N, double chi, double g, double eps) {
  if (!(chi > 1.0)) throw DomainError("corollary_rank_bound: chi must exceed 1");
  if (!(g > 0.0) || !(eps > 0.0)) throw DomainError("corollary_rank_bound: g and eps must be positive");
  if (N <= 0) return 0;
  const double root = std::pow(chi / (chi - 1.0) * g / eps, 1.0 / (chi - 1.0));
  const double value = static_cast<double>(N) * (root - 1.0);
  if (!(value > 0.0)) return 0;
  // Values within rounding of an integer are taken as that integer.
  return static_cast<std::int64_t>(std::ceil(value - 1e-9 * std::max(1.0, value)));
}

std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  __int128 r = 1;
  for (std::int64_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return static_cast<std::int64_t>(r);
}

std::int64_t c2_factor(std::int64_t N, std::int64_t d, std::int64_t k, std::int64_t K) {
  if (k < 1 || k > d || K < 1 || K > d) throw DomainError("c2_factor: need 1 <= k <= d and 1 <= K <= d");
  return N * (d * binomial(d - 1, K - 1) - k * binomial(k - 1, K - 1) - (d - k) * binomial(d - k - 1, K - 1));
}

std::size_t separation_rank_estimate(const TensorTrain& tt, std::size_t l, double rel_tol) {
  const std::vector<double> sv = interface_singular_values(tt, l);
  if (sv.empty() || sv.front() <= 0.0) return 0;
  return static_cast<std::size_t>(
      std::count_if(sv.begin(), sv.end(), [&](double s) { return s > rel_tol * sv.front(); }));
}

std::size_t separation_rank_estimate(const DenseTensor& tensor, std::size_t l, double rel_tol, std::size_t cap) {
  if (l < 1 || l >= tensor.order())
    throw IndexError("separation_rank_estimate: interface " + std::to_string(l) + " outside [1, " +
                     std::to_string(tensor.order() - 1) + "]");
  if (tensor.size() > cap)
    throw CapacityError("separation_rank_estimate: tensor has " + std::to_string(tensor.size()) +
                        " entries, cap is " + std::to_string(cap));
  Eigen::Index rows = 1;
  for (std::size_t k = 0; k < l; ++k) rows *= static_cast<Eigen::Index>(tensor.shape()[k]);
  const Eigen::Index cols = static_cast<Eigen::Index>(tensor.size()) / rows;
  const Matrix unfolding = Eigen::Map<const RowMatrix>(tensor.data().data(), rows, cols);
  const Vector sv = Eigen::BDCSVD<Matrix>(unfolding).singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) return 0;
  return static_cast<std::size_t>((sv.array() > rel_tol * sv[0]).count());
}

double dipole_decay_constant() { return 1.0 / (2.0 * std::numbers::sqrt2 * std::numbers::pi); }

double truncated_dipole_error(std::size_t d, std::size_t Ltilde, std::size_t samples, std::uint64_t seed) {
  if (d < 3) throw DomainError("truncated_dipole_error: d must be at least 3");
  if (Ltilde < 1 || Ltilde >= d) throw DomainError("truncated_dipole_error: need 1 <= Ltilde < d");
  if (samples == 0) throw DomainError("truncated_dipole_error: need at least one sample");
  std::vector<double> sq(d, 0.0);
  std::vector<double> x(d);
  const std::uint64_t stream = derive_key(seed, "dipole-truncation");
  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t m = 0; m < samples; ++m) {
    CounterRng rng(derive_key(stream, m));
    for (double& v : x) v = rng.uniform(0.0, two_pi);
    for (std::size_t k = 0; k < d; ++k) {
      double dropped = 0.0;
      for (std::size_t l = 0; l < d; ++l) {
        const std::size_t dist = k > l ? k - l : l - k;
        if (dist <= Ltilde) continue;
        const double r = static_cast<double>(dist);
        dropped += std::sin(x[k] - x[l]) / (r * r * r);
      }
      dropped /= two_pi;
      sq[k] += dropped * dropped;
    }
  }
  double worst = 0.0;
  for (double s : sq) worst = std::max(worst, std::sqrt(s / static_cast<double>(samples)));
  return worst;
}

double renyi_entropy(std::span<const double> sigma, double alpha) {
  if (sigma.empty()) throw InputError("renyi_entropy: empty spectrum");
  if (!(alpha >= 0.0)) throw DomainError("renyi_entropy: alpha must be non-negative");
  double total = 0.0;
  for (double s : sigma) total += s * s;
  if (!(total > 0.0)) throw InputError("renyi_entropy: spectrum is zero");
  double acc = 0.0;
  std::size_t support = 0;
  for (double s : sigma) {
    const double w = s * s / total;
    if (w <= 0.0) continue;
    ++support;
    if (alpha == 1.0) acc -= w * std::log(w);
    else acc += std::pow(w, alpha);
  }
  if (alpha == 1.0) return acc;
  if (alpha == 0.0) return std::log(static_cast<double>(support));
  return std::log(acc) / (1.0 - alpha);
}

double weak_lp_norm(std::span<const double> a, double p) {
  if (a.empty()) throw InputError("weak_lp_norm: empty sequence");
  if (!(p > 0.0)) throw DomainError("weak_lp_norm: p must be positive");
  std::vector<double> sorted;
  sorted.reserve(a.size());
  for (double v : a) sorted.push_back(std::abs(v));
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double best = 0.0;
  for (std::size_t n = 0; n < sorted.size(); ++n)
    best = std::max(best, std::pow(static_cast<double>(n + 1), 1.0 / p) * sorted[n]);
  return best;
}

std::vector<InterfaceDiagnostics> diagnose(const TensorTrain& tt, double rel_tol) {
  std::vector<InterfaceDiagnostics> out;
  for (std::size_t l = 1; l < tt.order(); ++l) {
    InterfaceDiagnostics diag;
    diag.interface = l;
    diag.singular_values = interface_singular_values(tt, l);
    const auto& sv = diag.singular_values;
    const double top = sv.empty() ? 0.0 : sv.front();
    diag.rank = top > 0.0 ? static_cast<std::size_t>(
                                std::count_if(sv.begin(), sv.end(), [&](double s) { return s > rel_tol * top; }))
                          : 0;
    if (top > 0.0) {
      for (double alpha : {0.5, 1.0, 2.0}) diag.renyi.emplace_back(alpha, renyi_entropy(sv, alpha));
      double norm = 0.0;
      for (double s : sv) norm += s * s;
      norm = std::sqrt(norm);
      std::vector<double> normalised;
      for (double s : sv) normalised.push_back(s / norm);
      for (double p : {0.5, 1.0}) diag.weak_lp.emplace_back(p, weak_lp_norm(normalised, p));
    }
    out.push_back(std::move(diag));
  }
  return out;
}

} // namespace dynlaw
