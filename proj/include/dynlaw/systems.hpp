#pragma once

// Reference dynamical laws, dataset sampling and the residuum metric.

#include "dynlaw/als.hpp"
#include "dynlaw/dictionary.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dynlaw {

enum class SystemKind { Fput, Dipole, LennardJones };

std::string to_string(SystemKind kind);
SystemKind system_kind_from_string(std::string_view name);

/// Springs between neighbours with walls at x_0 = x_{d+1} = 0; kappa and beta
/// hold the d+1 springs, spring k joining masses k-1 and k.
struct FputParams {
  Vector kappa;
  Vector beta;
};

struct DipoleParams {
  Vector moments;
  Vector inertia;
  Vector positions;
};

struct LennardJonesParams {
  Vector masses;
  Matrix epsilon;  // symmetric
  Matrix radius;   // symmetric, positive
  int q = 2;
};

struct SystemSpec {
  SystemKind kind = SystemKind::Fput;
  std::size_t d = 0;
  FputParams fput;
  DipoleParams dipole;
  LennardJonesParams lj;

  void validate() const;

  /// The law f(x).
  Vector rhs(std::span<const double> x) const;

  /// What a model is trained on: f(x), or the transformed g(x) for
  /// Lennard-Jones chains.
  Vector target(std::span<const double> x) const;
};

SystemSpec make_fput(std::size_t d, double kappa = 1.0, double beta = 1.0);
/// kappa ~ U[0, 2], beta ~ U[0, 1.4].
SystemSpec make_fput_random(std::size_t d, std::uint64_t seed);
SystemSpec make_dipole(std::size_t d);
SystemSpec make_lennard_jones(std::size_t d, int q = 2);

Vector fput_rhs(std::span<const double> x, const Vector& kappa, const Vector& beta);
Vector dipole_rhs(std::span<const double> x, const Vector& moments, const Vector& inertia, const Vector& positions);
Vector lj_rhs(std::span<const double> x, const LennardJonesParams& params);

/// g_k = (x_k - x_{k-1})^{2q+1} (x_k - x_{k+1})^{2q+1} f_k, missing
/// neighbours contributing a factor 1.
Vector lj_transform_targets(std::span<const double> x, std::span<const double> f, int q);

double total_energy_lj(std::span<const double> x, std::span<const double> v, const SystemSpec& spec);

struct SamplerSpec {
  std::vector<Interval> intervals;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate(const SystemSpec& system) const;
};

/// FPUT: [-1, 1]; dipoles: [0, 2pi); Lennard-Jones: [l - 0.25, l + 0.25].
SamplerSpec default_sampler(const SystemSpec& system, double sigma = 0.0, std::uint64_t seed = 0);

/// Uniform states, one counter-based stream per sample.
Matrix sample_states(const SamplerSpec& sampler, std::size_t M, std::uint64_t stream);

/// Targets for each row of X, without noise.
Matrix system_targets(const SystemSpec& system, const Matrix& X);

TrainingSet sample_dataset(const SystemSpec& system, const SamplerSpec& sampler, std::size_t M);

using BatchLaw = std::function<Matrix(const Matrix&)>;

/// sqrt(sum ||model - truth||^2 / sum ||truth||^2) over M' fresh samples
/// drawn from an evaluation stream disjoint from training.
double residuum(const BatchLaw& model, const BatchLaw& truth, const SamplerSpec& sampler, std::size_t samples,
                std::uint64_t seed);

/// Same ratio on precomputed values.
double residuum(const Matrix& predicted, const Matrix& truth);

inline constexpr std::size_t kDefaultResiduumSamples = 20000;

} // namespace dynlaw
