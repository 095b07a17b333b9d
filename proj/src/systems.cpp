#include "dynlaw/systems.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/random.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dynlaw {

std::string to_string(SystemKind kind) {
  switch (kind) {
  case SystemKind::Fput: return "fput";
  case SystemKind::Dipole: return "dipole";
  case SystemKind::LennardJones: return "lj";
  }
  return "unknown";
}

SystemKind system_kind_from_string(std::string_view name) {
  if (name == "fput") return SystemKind::Fput;
  if (name == "dipole") return SystemKind::Dipole;
  if (name == "lj" || name == "lennard-jones") return SystemKind::LennardJones;
  throw ConfigError("unknown system kind '" + std::string(name) + "'");
}

namespace {

void require_length(std::span<const double> x, std::size_t d, const char* what) {
  if (x.size() != d)
    throw InputError(std::string(what) + ": state has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(d));
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

} // namespace

void SystemSpec::validate() const {
  if (d == 0) throw ConfigError("system: d must be at least 1");
  auto finite = [](const auto& m) { return m.allFinite(); };
  switch (kind) {
  case SystemKind::Fput:
    if (static_cast<std::size_t>(fput.kappa.size()) != d + 1 || static_cast<std::size_t>(fput.beta.size()) != d + 1)
      throw ConfigError("fput: kappa and beta need d+1 entries");
    if (!finite(fput.kappa) || !finite(fput.beta)) throw ConfigError("fput: non-finite parameters");
    break;
  case SystemKind::Dipole:
    if (static_cast<std::size_t>(dipole.moments.size()) != d || static_cast<std::size_t>(dipole.inertia.size()) != d ||
        static_cast<std::size_t>(dipole.positions.size()) != d)
      throw ConfigError("dipole: moments, inertia and positions need d entries");
    if (!finite(dipole.moments) || !finite(dipole.inertia) || !finite(dipole.positions))
      throw ConfigError("dipole: non-finite parameters");
    for (std::size_t k = 1; k < d; ++k)
      if (!(dipole.positions[static_cast<Eigen::Index>(k)] > dipole.positions[static_cast<Eigen::Index>(k - 1)]))
        throw ConfigError("dipole: positions must be strictly increasing");
    break;
  case SystemKind::LennardJones: {
    const auto n = static_cast<Eigen::Index>(d);
    if (lj.masses.size() != n || lj.epsilon.rows() != n || lj.epsilon.cols() != n || lj.radius.rows() != n ||
        lj.radius.cols() != n)
      throw ConfigError("lj: masses need d entries, epsilon and radius d x d");
    if (lj.q < 1) throw ConfigError("lj: q must be at least 1");
    if (!finite(lj.masses) || !finite(lj.epsilon) || !finite(lj.radius)) throw ConfigError("lj: non-finite parameters");
    if ((lj.epsilon - lj.epsilon.transpose()).cwiseAbs().maxCoeff() > 0.0 ||
        (lj.radius - lj.radius.transpose()).cwiseAbs().maxCoeff() > 0.0)
      throw ConfigError("lj: epsilon and radius must be symmetric");
    if ((lj.radius.array() <= 0.0).any()) throw ConfigError("lj: radius must be positive");
    break;
  }
  }
}

Vector SystemSpec::rhs(std::span<const double> x) const {
  switch (kind) {
  case SystemKind::Fput: return fput_rhs(x, fput.kappa, fput.beta);
  case SystemKind::Dipole: return dipole_rhs(x, dipole.moments, dipole.inertia, dipole.positions);
  case SystemKind::LennardJones: return lj_rhs(x, lj);
  }
  return {};
}

Vector SystemSpec::target(std::span<const double> x) const {
  Vector f = rhs(x);
  if (kind != SystemKind::LennardJones) return f;
  return lj_transform_targets(x, std::span<const double>(f.data(), static_cast<std::size_t>(f.size())), lj.q);
}

SystemSpec make_fput(std::size_t d, double kappa, double beta) {
  SystemSpec s;
  s.kind = SystemKind::Fput;
  s.d = d;
  s.fput.kappa = Vector::Constant(static_cast<Eigen::Index>(d + 1), kappa);
  s.fput.beta = Vector::Constant(static_cast<Eigen::Index>(d + 1), beta);
  return s;
}

SystemSpec make_fput_random(std::size_t d, std::uint64_t seed) {
  SystemSpec s = make_fput(d);
  CounterRng kappa(derive_key(seed, "fput-kappa"));
  CounterRng beta(derive_key(seed, "fput-beta"));
  for (Eigen::Index k = 0; k <= static_cast<Eigen::Index>(d); ++k) {
    s.fput.kappa[k] = kappa.uniform(0.0, 2.0);
    s.fput.beta[k] = beta.uniform(0.0, 1.4);
  }
  return s;
}

SystemSpec make_dipole(std::size_t d) {
  SystemSpec s;
  s.kind = SystemKind::Dipole;
  s.d = d;
  const auto n = static_cast<Eigen::Index>(d);
  s.dipole.moments = Vector::Ones(n);
  s.dipole.inertia = Vector::Ones(n);
  s.dipole.positions = Vector::LinSpaced(n, 0.0, static_cast<double>(d) - 1.0);
  return s;
}

SystemSpec make_lennard_jones(std::size_t d, int q) {
  SystemSpec s;
  s.kind = SystemKind::LennardJones;
  s.d = d;
  const auto n = static_cast<Eigen::Index>(d);
  s.lj.masses = Vector::Ones(n);
  s.lj.epsilon = Matrix::Ones(n, n);
  s.lj.radius = Matrix::Ones(n, n);
  s.lj.q = q;
  return s;
}

Vector fput_rhs(std::span<const double> x, const Vector& kappa, const Vector& beta) {
  const std::size_t d = x.size();
  if (static_cast<std::size_t>(kappa.size()) != d + 1 || static_cast<std::size_t>(beta.size()) != d + 1)
    throw InputError("fput_rhs: kappa and beta need " + std::to_string(d + 1) + " entries");
  auto pos = [&](std::size_t k) { return (k == 0 || k == d + 1) ? 0.0 : x[k - 1]; };
  Vector f(static_cast<Eigen::Index>(d));
  for (std::size_t k = 1; k <= d; ++k) {
    const double right = pos(k + 1) - pos(k);
    const double left = pos(k) - pos(k - 1);
    const auto kr = static_cast<Eigen::Index>(k);
    const auto kl = static_cast<Eigen::Index>(k - 1);
    f[kl] = kappa[kr] * right - kappa[kl] * left + beta[kr] * right * right * right - beta[kl] * left * left * left;
  }
  return f;
}

Vector dipole_rhs(std::span<const double> x, const Vector& moments, const Vector& inertia, const Vector& positions) {
  const auto d = static_cast<Eigen::Index>(x.size());
  if (moments.size() != d || inertia.size() != d || positions.size() != d)
    throw InputError("dipole_rhs: parameter lengths differ from the state length");
  Vector f = Vector::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double acc = 0.0;
    for (Eigen::Index l = 0; l < d; ++l) {
      if (l == k) continue;
      const double dist = std::abs(positions[k] - positions[l]);
      if (dist == 0.0) throw InputError("dipole_rhs: duplicate positions");
      acc += moments[l] / (dist * dist * dist) * std::sin(x[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(l)]);
    }
    f[k] = inertia[k] * moments[k] * acc;
  }
  return f;
}

Vector lj_rhs(std::span<const double> x, const LennardJonesParams& params) {
  const auto d = static_cast<Eigen::Index>(x.size());
  if (params.masses.size() != d) throw InputError("lj_rhs: parameter lengths differ from the state length");
  const int q = params.q;
  Vector f = Vector::Zero(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    double acc = 0.0;
    for (Eigen::Index l = 0; l < d; ++l) {
      if (l == k) continue;
      const double delta = x[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(l)];
      if (delta == 0.0)
        throw SingularityError("lj_rhs: particles " + std::to_string(k + 1) + " and " + std::to_string(l + 1) +
                               " coincide");
      const double R = params.radius(k, l);
      const double u = R / std::abs(delta);
      acc += sign(delta) * params.epsilon(k, l) / R * (2.0 * std::pow(u, 2 * q + 1) - std::pow(u, q + 1));
    }
    f[k] = 6.0 * params.masses[k] * acc;
  }
  return f;
}

Vector lj_transform_targets(std::span<const double> x, std::span<const double> f, int q) {
  if (f.size() != x.size()) throw InputError("lj_transform_targets: state and force lengths differ");
  const std::size_t d = x.size();
  Vector g(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k) {
    double factor = 1.0;
    if (k > 0) factor *= std::pow(x[k] - x[k - 1], 2 * q + 1);
    if (k + 1 < d) factor *= std::pow(x[k] - x[k + 1], 2 * q + 1);
    g[static_cast<Eigen::Index>(k)] = factor * f[k];
  }
  return g;
}

double total_energy_lj(std::span<const double> x, std::span<const double> v, const SystemSpec& spec) {
  if (spec.kind != SystemKind::LennardJones) throw ConfigError("total_energy_lj: system is not a Lennard-Jones chain");
  require_length(x, spec.d, "total_energy_lj");
  require_length(v, spec.d, "total_energy_lj");
  const int q = spec.lj.q;
  double energy = 0.0;
  for (std::size_t k = 0; k < spec.d; ++k) {
    for (std::size_t l = k + 1; l < spec.d; ++l) {
      const double dist = std::abs(x[k] - x[l]);
      if (dist == 0.0)
        throw SingularityError("total_energy_lj: particles " + std::to_string(k + 1) + " and " +
                               std::to_string(l + 1) + " coincide");
      const auto ki = static_cast<Eigen::Index>(k);
      const auto li = static_cast<Eigen::Index>(l);
      const double u = spec.lj.radius(ki, li) / dist;
      energy += spec.lj.epsilon(ki, li) * (std::pow(u, 2 * q) - std::pow(u, q));
    }
    energy += 0.5 * spec.lj.masses[static_cast<Eigen::Index>(k)] * v[k] * v[k];
  }
  return energy;
}

void SamplerSpec::validate(const SystemSpec& system) const {
  if (intervals.size() != system.d)
    throw ConfigError("sampler: " + std::to_string(intervals.size()) + " intervals for " + std::to_string(system.d) +
                      " modes");
  for (std::size_t k = 0; k < intervals.size(); ++k)
    if (!(intervals[k].lo < intervals[k].hi) || !std::isfinite(intervals[k].lo) || !std::isfinite(intervals[k].hi))
      throw ConfigError("sampler: empty interval for mode " + std::to_string(k + 1));
  if (!std::isfinite(sigma) || sigma < 0.0) throw ConfigError("sampler: sigma must be finite and >= 0");
  if (system.kind == SystemKind::LennardJones)
    for (std::size_t k = 1; k < intervals.size(); ++k)
      if (!(intervals[k - 1].hi < intervals[k].lo))
        throw ConfigError("sampler: Lennard-Jones intervals of modes " + std::to_string(k) + " and " +
                          std::to_string(k + 1) + " overlap");
}

SamplerSpec default_sampler(const SystemSpec& system, double sigma, std::uint64_t seed) {
  SamplerSpec s;
  s.sigma = sigma;
  s.seed = seed;
  for (std::size_t l = 1; l <= system.d; ++l) {
    switch (system.kind) {
    case SystemKind::Fput: s.intervals.push_back({-1.0, 1.0}); break;
    case SystemKind::Dipole: s.intervals.push_back({0.0, 2.0 * std::numbers::pi}); break;
    case SystemKind::LennardJones: {
      const double c = static_cast<double>(l);
      s.intervals.push_back({c - 0.25, c + 0.25});
      break;
    }
    }
  }
  return s;
}

Matrix sample_states(const SamplerSpec& sampler, std::size_t M, std::uint64_t stream) {
  const std::size_t d = sampler.intervals.size();
  Matrix X(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(d));
  for (std::size_t m = 0; m < M; ++m) {
    CounterRng rng(derive_key(stream, m));
    for (std::size_t l = 0; l < d; ++l)
      X(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(l)) =
          rng.uniform(sampler.intervals[l].lo, sampler.intervals[l].hi);
  }
  return X;
}

Matrix system_targets(const SystemSpec& system, const Matrix& X) {
  if (static_cast<std::size_t>(X.cols()) != system.d)
    throw InputError("system_targets: states have " + std::to_string(X.cols()) + " columns, expected " +
                     std::to_string(system.d));
  Matrix Y(X.rows(), X.cols());
  std::vector<double> row(system.d);
  for (Eigen::Index m = 0; m < X.rows(); ++m) {
    for (std::size_t l = 0; l < system.d; ++l) row[l] = X(m, static_cast<Eigen::Index>(l));
    Y.row(m) = system.target(row).transpose();
  }
  return Y;
}

TrainingSet sample_dataset(const SystemSpec& system, const SamplerSpec& sampler, std::size_t M) {
  system.validate();
  sampler.validate(system);
  if (M == 0) throw ConfigError("sample_dataset: M must be at least 1");
  TrainingSet data;
  data.X = sample_states(sampler, M, derive_key(sampler.seed, "states"));
  data.Y = system_targets(system, data.X);
  if (sampler.sigma > 0.0) {
    const std::uint64_t noise = derive_key(sampler.seed, "noise");
    for (Eigen::Index m = 0; m < data.Y.rows(); ++m) {
      CounterRng rng(derive_key(noise, static_cast<std::uint64_t>(m)));
      for (Eigen::Index l = 0; l < data.Y.cols(); ++l) data.Y(m, l) += sampler.sigma * rng.normal();
    }
  }
  data.domains = sampler.intervals;
  return data;
}

double residuum(const Matrix& predicted, const Matrix& truth) {
  if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
    throw DimensionError("residuum: prediction and truth shapes differ");
  const double denom = truth.squaredNorm();
  if (!(denom > 0.0)) throw DomainError("residuum: the reference law vanishes on every sample");
  return std::sqrt((predicted - truth).squaredNorm() / denom);
}

double residuum(const BatchLaw& model, const BatchLaw& truth, const SamplerSpec& sampler, std::size_t samples,
                std::uint64_t seed) {
  if (samples == 0) throw ConfigError("residuum: need at least one sample");
  const Matrix X = sample_states(sampler, samples, derive_key(seed, "residuum"));
  return residuum(model(X), truth(X));
}

} // namespace dynlaw
