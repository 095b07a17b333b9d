#include "dynlaw/dictionary.hpp"

#include "dynlaw/errors.hpp"

#include <cmath>
#include <numbers>

namespace dynlaw {

std::string to_string(DictionaryKind kind) {
  switch (kind) {
  case DictionaryKind::Monomial: return "monomial";
  case DictionaryKind::Legendre: return "legendre";
  case DictionaryKind::Trigonometric: return "trigonometric";
  }
  return "unknown";
}

DictionaryKind dictionary_kind_from_string(std::string_view name) {
  if (name == "monomial") return DictionaryKind::Monomial;
  if (name == "legendre") return DictionaryKind::Legendre;
  if (name == "trigonometric" || name == "trig") return DictionaryKind::Trigonometric;
  throw ConfigError("unknown dictionary kind '" + std::string(name) + "'");
}

DegreeMap::DegreeMap(std::vector<int> weights) : weights_(std::move(weights)) {
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] < 0) throw ConfigError("degree map: negative weight");
    if (i > 0 && weights_[i] < weights_[i - 1]) throw ConfigError("degree map: weights must be non-decreasing");
  }
}

DegreeMap DegreeMap::polynomial(std::size_t p) {
  std::vector<int> w(p);
  for (std::size_t i = 0; i < p; ++i) w[i] = static_cast<int>(i);
  return DegreeMap(std::move(w));
}

DegreeMap DegreeMap::trigonometric() { return DegreeMap({0, 1, 1}); }

Dictionary::Dictionary(DictionaryKind kind, std::size_t p, std::vector<Interval> domains)
    : kind_(kind), p_(p), domains_(std::move(domains)),
      out_of_domain_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (p_ == 0) throw ConfigError("dictionary: size must be at least 1");
  if (kind_ == DictionaryKind::Trigonometric) {
    if (p_ != 3) throw ConfigError("dictionary: trigonometric dictionary has size 3");
    degrees_ = DegreeMap::trigonometric();
  } else {
    degrees_ = DegreeMap::polynomial(p_);
  }
  for (std::size_t k = 0; k < domains_.size(); ++k) {
    const Interval& iv = domains_[k];
    if (!(iv.lo < iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw ConfigError("dictionary: empty or non-finite domain for mode " + std::to_string(k + 1));
  }
}

Interval Dictionary::canonical_domain() const {
  if (kind_ == DictionaryKind::Trigonometric) return {0.0, 2.0 * std::numbers::pi};
  return {-1.0, 1.0};
}

double Dictionary::to_canonical(std::size_t mode, double x) const {
  if (mode < 1 || mode > domains_.size())
    throw IndexError("dictionary: mode " + std::to_string(mode) + " outside [1, " + std::to_string(domains_.size()) +
                     "]");
  const Interval& iv = domains_[mode - 1];
  const Interval c = canonical_domain();
  return c.lo + (x - iv.lo) * ((c.hi - c.lo) / (iv.hi - iv.lo));
}

void Dictionary::eval_canonical(double t, std::span<double> out) const {
  switch (kind_) {
  case DictionaryKind::Monomial: {
    double v = 1.0;
    for (std::size_t i = 0; i < p_; ++i) {
      out[i] = v;
      v *= t;
    }
    break;
  }
  case DictionaryKind::Legendre: {
    // (k+1) P_{k+1} = (2k+1) t P_k - k P_{k-1}
    out[0] = 1.0;
    if (p_ > 1) out[1] = t;
    for (std::size_t k = 1; k + 1 < p_; ++k) {
      const double kk = static_cast<double>(k);
      out[k + 1] = ((2.0 * kk + 1.0) * t * out[k] - kk * out[k - 1]) / (kk + 1.0);
    }
    break;
  }
  case DictionaryKind::Trigonometric:
    out[0] = 1.0;
    out[1] = std::sin(t);
    out[2] = std::cos(t);
    break;
  }
}

Vector Dictionary::eval_canonical(double t) const {
  Vector v(static_cast<Eigen::Index>(p_));
  eval_canonical(t, std::span<double>(v.data(), p_));
  return v;
}

Vector Dictionary::eval(std::size_t mode, double x) const {
  if (!std::isfinite(x)) throw InputError("dictionary: non-finite input for mode " + std::to_string(mode));
  const double t = to_canonical(mode, x);
  const Interval c = canonical_domain();
  const double slack = 1e-12 * (c.hi - c.lo);
  if (t < c.lo - slack || t > c.hi + slack) out_of_domain_->fetch_add(1, std::memory_order_relaxed);
  return eval_canonical(t);
}

Dictionary Dictionary::with_domains(std::vector<Interval> domains) const {
  return Dictionary(kind_, p_, std::move(domains));
}

Dictionary make_dictionary(DictionaryKind kind, int max_degree, std::vector<Interval> domains) {
  if (kind == DictionaryKind::Trigonometric) return Dictionary(kind, 3, std::move(domains));
  if (max_degree < 0) throw ConfigError("make_dictionary: max_degree must be non-negative");
  return Dictionary(kind, static_cast<std::size_t>(max_degree) + 1, std::move(domains));
}

Dictionary make_dictionary(std::string_view kind, int max_degree, std::vector<Interval> domains) {
  return make_dictionary(dictionary_kind_from_string(kind), max_degree, std::move(domains));
}

std::vector<Vector> featurize(const Dictionary& dict, std::span<const double> x) {
  if (x.size() != dict.modes())
    throw InputError("featurize: state has length " + std::to_string(x.size()) + ", dictionary has " +
                     std::to_string(dict.modes()) + " modes");
  std::vector<Vector> out;
  out.reserve(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    try {
      out.push_back(dict.eval(k + 1, x[k]));
    } catch (const InputError& e) {
      throw InputError("featurize: mode " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return out;
}

Matrix featurize_mode(const Dictionary& dict, std::size_t mode, const Matrix& states) {
  const std::size_t p = dict.size();
  Matrix out(states.rows(), static_cast<Eigen::Index>(p));
  for (Eigen::Index m = 0; m < states.rows(); ++m) {
    const Vector v = dict.eval(mode, states(m, static_cast<Eigen::Index>(mode - 1)));
    out.row(m) = v.transpose();
  }
  return out;
}

} // namespace dynlaw
