#include "support.hpp"

#include "dynlaw/dictionary.hpp"
#include "dynlaw/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace dynlaw;
using namespace dynlaw::testing;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Interval> unit_domains(std::size_t d) { return std::vector<Interval>(d, Interval{-1.0, 1.0}); }
std::vector<Interval> angle_domains(std::size_t d) { return std::vector<Interval>(d, Interval{0.0, 2.0 * kPi}); }

// Closed forms of the first Legendre polynomials.
double legendre_closed(int n, double x) {
  switch (n) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return 0.5 * (3 * x * x - 1);
    case 3: return 0.5 * (5 * x * x * x - 3 * x);
    case 4: return (35 * std::pow(x, 4) - 30 * x * x + 3) / 8.0;
    case 5: return (63 * std::pow(x, 5) - 70 * std::pow(x, 3) + 15 * x) / 8.0;
  }
  return NAN;
}

} // namespace

TEST(Dictionary, MonomialAtTwo) {
  const Dictionary dict = make_dictionary(DictionaryKind::Monomial, 2, {{-4.0, 4.0}});
  const Vector v = dict.eval_canonical(2.0);
  ASSERT_EQ(v.size(), 3);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], 2.0);
  EXPECT_EQ(v[2], 4.0);
}

TEST(Dictionary, TrigAtZero) {
  const Dictionary dict = make_dictionary(DictionaryKind::Trigonometric, 0, angle_domains(1));
  const Vector v = dict.eval(1, 0.0);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_EQ(v[2], 1.0);
}

TEST(Dictionary, LegendreAtOne) {
  const Dictionary dict = make_dictionary(DictionaryKind::Legendre, 3, unit_domains(1));
  const Vector v = dict.eval(1, 1.0);
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(v[k], 1.0);
}

TEST(Dictionary, LegendreClosedForms) {
  const Dictionary dict = make_dictionary(DictionaryKind::Legendre, 5, unit_domains(1));
  CounterRng rng(1);
  for (int t = 0; t < 50; ++t) {
    const double x = rng.uniform(-1.0, 1.0);
    const Vector v = dict.eval(1, x);
    for (int k = 0; k <= 5; ++k) EXPECT_NEAR(v[k], legendre_closed(k, x), 1e-14);
  }
}

TEST(Dictionary, NonFiniteInput) {
  const Dictionary dict = make_dictionary(DictionaryKind::Legendre, 3, unit_domains(2));
  EXPECT_THROW(dict.eval(1, std::nan("")), InputError);
  EXPECT_THROW(dict.eval(2, INFINITY), InputError);
}

TEST(Dictionary, MakeLegendreThree) {
  const Dictionary dict = make_dictionary("legendre", 3, unit_domains(5));
  EXPECT_EQ(dict.size(), 4u);
  EXPECT_EQ(dict.degree_map().weights(), (std::vector<int>{0, 1, 2, 3}));
}

TEST(Dictionary, MakeTrigonometric) {
  const Dictionary dict = make_dictionary("trigonometric", 7, angle_domains(3));
  EXPECT_EQ(dict.size(), 3u);
  EXPECT_EQ(dict.degree_map().weights(), (std::vector<int>{0, 1, 1}));
}

TEST(Dictionary, ConstantOnly) {
  const Dictionary dict = make_dictionary("monomial", 0, unit_domains(2));
  EXPECT_EQ(dict.size(), 1u);
  EXPECT_EQ(dict.eval(2, 0.3)[0], 1.0);
}

TEST(Dictionary, UnknownKind) { EXPECT_THROW(make_dictionary("chebyshev", 3, unit_domains(1)), ConfigError); }

TEST(Dictionary, BadDegreeMaps) {
  EXPECT_THROW(DegreeMap({0, -1}), ConfigError);
  EXPECT_THROW(DegreeMap({0, 2, 1}), ConfigError);
}

TEST(Dictionary, FeaturizeMonomialOrigin) {
  const Dictionary dict = make_dictionary("monomial", 1, unit_domains(2));
  const std::vector<double> x{0.0, 0.0};
  const auto f = featurize(dict, x);
  ASSERT_EQ(f.size(), 2u);
  for (const auto& v : f) {
    EXPECT_EQ(v[0], 1.0);
    EXPECT_EQ(v[1], 0.0);
  }
}

TEST(Dictionary, FeaturizeTrig) {
  const Dictionary dict = make_dictionary("trigonometric", 0, angle_domains(2));
  const std::vector<double> x{kPi / 2, kPi};
  const auto f = featurize(dict, x);
  EXPECT_NEAR(f[0][0], 1.0, 1e-15);
  EXPECT_NEAR(f[0][1], 1.0, 1e-15);
  EXPECT_NEAR(f[0][2], 0.0, 1e-15);
  EXPECT_NEAR(f[1][0], 1.0, 1e-15);
  EXPECT_NEAR(f[1][1], 0.0, 1e-15);
  EXPECT_NEAR(f[1][2], -1.0, 1e-15);
}

TEST(Dictionary, FeaturizeLengthMismatch) {
  const Dictionary dict = make_dictionary("monomial", 2, unit_domains(3));
  const std::vector<double> x{0.1, 0.2};
  EXPECT_THROW(featurize(dict, x), InputError);
}

TEST(Dictionary, OutOfDomainIsCounted) {
  const Dictionary dict = make_dictionary("legendre", 2, unit_domains(1));
  dict.reset_out_of_domain_count();
  dict.eval(1, 0.5);
  EXPECT_EQ(dict.out_of_domain_count(), 0u);
  EXPECT_NO_THROW(dict.eval(1, 1.5));
  EXPECT_EQ(dict.out_of_domain_count(), 1u);
}

TEST(Dictionary, FeaturizeModeMatchesPointwise) {
  CounterRng rng(2);
  const Dictionary dict = make_dictionary("legendre", 3, {{0.0, 2.0}, {-3.0, 1.0}});
  const Matrix X = random_matrix(rng, 7, 2) * 0.3;
  for (std::size_t mode = 1; mode <= 2; ++mode) {
    const Matrix F = featurize_mode(dict, mode, X);
    for (Eigen::Index m = 0; m < X.rows(); ++m)
      EXPECT_LE((F.row(m).transpose() - dict.eval(mode, X(m, Eigen::Index(mode - 1)))).norm(), 1e-15);
  }
}

// Properties.

TEST(DictionaryProperty, PolynomialDegreeMatchesWeight) {
  // Degree of a sampled polynomial from finite differences of order w(i)+1.
  for (auto kind : {DictionaryKind::Monomial, DictionaryKind::Legendre}) {
    const Dictionary dict = make_dictionary(kind, 6, unit_domains(1));
    const double h = 0.1;
    for (std::size_t i = 0; i < dict.size(); ++i) {
      const int w = dict.degree_map()[i];
      auto diff = [&](int order) {
        double s = 0.0;
        for (int k = 0; k <= order; ++k) {
          double c = 1.0;
          for (int q = 0; q < k; ++q) c = c * (order - q) / (q + 1);
          s += ((order - k) % 2 ? -1.0 : 1.0) * c * dict.eval_canonical(-0.5 + k * h)[Eigen::Index(i)];
        }
        return s;
      };
      EXPECT_GT(std::abs(diff(w)), 1e-8) << to_string(kind) << " i=" << i;
      EXPECT_LT(std::abs(diff(w + 1)), 1e-10) << to_string(kind) << " i=" << i;
    }
  }
}

TEST(DictionaryProperty, AffineRescaling) {
  CounterRng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = rng.uniform(-5.0, 5.0);
    const double b = a + rng.uniform(0.1, 4.0);
    const Dictionary dict = make_dictionary("legendre", 4, {{a, b}});
    const double x = rng.uniform(a, b);
    const double t = -1.0 + 2.0 * (x - a) / (b - a);
    EXPECT_LE((dict.eval(1, x) - dict.eval_canonical(dict.to_canonical(1, x))).norm(), 0.0);
    EXPECT_NEAR(dict.to_canonical(1, x), t, 1e-13);
  }
}

TEST(DictionaryProperty, TrigIdentity) {
  CounterRng rng(4);
  const Dictionary dict = make_dictionary("trigonometric", 0, {{-3.0, 10.0}});
  for (int trial = 0; trial < 500; ++trial) {
    const Vector v = dict.eval(1, rng.uniform(-3.0, 10.0));
    EXPECT_NEAR(v[1] * v[1] + v[2] * v[2], 1.0, 1e-14);
  }
}
