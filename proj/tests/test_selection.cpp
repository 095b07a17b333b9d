#include "support.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/selection.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace dynlaw;
using namespace dynlaw::testing;

namespace {

int table_oracle(int i, int j, int L) {
  if (j < i - L) return 1;
  if (j > i + L) return 2 * L + 3;
  return j - i + L + 2;
}

std::vector<Interval> unit_domains(std::size_t d) { return std::vector<Interval>(d, Interval{-1.0, 1.0}); }

ModelEnsemble small_ensemble(std::size_t d, int L, std::uint64_t seed) {
  return make_ensemble(make_dictionary("monomial", 2, unit_domains(d)), local_selection_table(d, L), 2, 2, seed);
}

} // namespace

TEST(Selection, TableD4L1) {
  const SelectionTable t = local_selection_table(4, 1);
  const std::vector<std::vector<int>> rows{{3, 4, 5, 5}, {2, 3, 4, 5}, {1, 2, 3, 4}, {1, 1, 2, 3}};
  EXPECT_EQ(t.alpha(), 5);
  for (std::size_t k = 1; k <= 4; ++k)
    for (std::size_t l = 1; l <= 4; ++l) EXPECT_EQ(t.at(k, l), rows[k - 1][l - 1]) << k << "," << l;
}

TEST(Selection, WideWindowUsesMiddleBranch) {
  const SelectionTable t = local_selection_table(5, 6);
  for (int e : t.entries()) {
    EXPECT_NE(e, 1);
    EXPECT_NE(e, t.alpha());
  }
}

TEST(Selection, SingleMode) {
  const SelectionTable t = local_selection_table(1, 0);
  EXPECT_EQ(t.alpha(), 3);
  EXPECT_EQ(t.at(1, 1), 2);
}

TEST(Selection, TableChecks) {
  EXPECT_THROW(SelectionTable(2, 2, {1, 2, 3, 1}), ConfigError);
  EXPECT_THROW(SelectionTable(2, 2, {1, 2, 1}), ConfigError);
  EXPECT_THROW(local_selection_table(3, -1), ConfigError);
  EXPECT_THROW(local_selection_table(3, 1).at(0, 1), IndexError);
}

TEST(Selection, AlphaOneGivesIdenticalLaws) {
  const std::size_t d = 3;
  const Dictionary dict = make_dictionary("legendre", 2, unit_domains(d));
  const ModelEnsemble ens = make_ensemble(dict, SelectionTable(d, 1, std::vector<int>(d * d, 1)), 2, 2, 5);
  const DenseTensor first = tt_to_full(ens.assemble_law(1));
  for (std::size_t k = 2; k <= d; ++k) EXPECT_EQ(relative_difference(tt_to_full(ens.assemble_law(k)), first), 0.0);
}

TEST(Selection, AssembleUsesTableTypes) {
  const ModelEnsemble ens = small_ensemble(4, 1, 6);
  const TensorTrain tt = ens.assemble_law(1);
  const std::vector<int> types{3, 4, 5, 5};
  for (std::size_t l = 1; l <= 4; ++l) {
    const Core expected = ens.core(l, types[l - 1]).to_core();
    const Core& got = tt.core(l);
    if (l < 4) {
      EXPECT_TRUE(std::equal(expected.data().begin(), expected.data().end(), got.data().begin())) << "core " << l;
    }
  }
  EXPECT_THROW(ens.assemble_law(0), IndexError);
}

TEST(Selection, AssembledLawMatchesEvaluate) {
  CounterRng rng(7);
  const ModelEnsemble ens = small_ensemble(5, 1, 7);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x(5);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const Vector f = ens.evaluate(x);
    const auto features = featurize(ens.dictionary(), x);
    for (std::size_t k = 1; k <= 5; ++k)
      EXPECT_NEAR(f[Eigen::Index(k - 1)], tt_evaluate_scalar(ens.assemble_law(k), features), 1e-12);
  }
}

TEST(Selection, UsageAtFirstMode) {
  const auto usage = activation_usage(local_selection_table(4, 1), 1, 3);
  EXPECT_EQ(usage.components, (std::vector<std::size_t>{1}));
  EXPECT_TRUE(usage.by_left_type.empty());
}

TEST(Selection, UsageLeftOutsideType) {
  const SelectionTable t = local_selection_table(10, 1);
  const auto usage = activation_usage(t, 5, 1);
  EXPECT_EQ(usage.components, (std::vector<std::size_t>{7, 8, 9, 10}));
  std::map<int, std::vector<std::size_t>> expected;
  for (std::size_t e : usage.components) expected[table_oracle(int(e), 4, 1)].push_back(e);
  EXPECT_EQ(usage.by_left_type, expected);
}

TEST(Selection, UnusedCore) {
  const auto usage = activation_usage(local_selection_table(3, 2), 1, 7);
  EXPECT_TRUE(usage.components.empty());
}

TEST(Selection, DominantTieGoesToSmallestType) {
  ActivationUsage usage;
  usage.by_left_type[4] = {1, 2};
  usage.by_left_type[2] = {5, 6};
  usage.by_left_type[1] = {9};
  EXPECT_EQ(dominant_left_type(usage), 2);
  usage.by_left_type[7] = {3, 4, 8};
  EXPECT_EQ(dominant_left_type(usage), 7);
}

// Properties.

TEST(SelectionProperty, TableMatchesOracle) {
  for (std::size_t d = 1; d <= 50; ++d)
    for (int L = 0; L <= 10; ++L) {
      const SelectionTable t = local_selection_table(d, L);
      ASSERT_EQ(t.alpha(), 2 * L + 3);
      for (std::size_t i = 1; i <= d; ++i)
        for (std::size_t j = 1; j <= d; ++j) ASSERT_EQ(t.at(i, j), table_oracle(int(i), int(j), L));
    }
}

TEST(SelectionProperty, PartitionOfUsage) {
  CounterRng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = random_int(rng, 1, 20);
    const int L = static_cast<int>(random_int(rng, 0, 6));
    const SelectionTable t = local_selection_table(d, L);
    const std::size_t l = random_int(rng, 1, d);
    const int j = static_cast<int>(random_int(rng, 1, std::size_t(t.alpha())));
    const auto usage = activation_usage(t, l, j);
    std::set<std::size_t> expected;
    for (std::size_t e = 1; e <= d; ++e)
      if (t.at(e, l) == j) expected.insert(e);
    EXPECT_EQ(std::set<std::size_t>(usage.components.begin(), usage.components.end()), expected);
    if (l == 1) {
      EXPECT_TRUE(usage.by_left_type.empty());
      continue;
    }
    std::set<std::size_t> joined;
    std::size_t total = 0;
    for (const auto& [a, members] : usage.by_left_type)
      for (std::size_t e : members) {
        EXPECT_EQ(t.at(e, l - 1), a);
        joined.insert(e);
        ++total;
      }
    EXPECT_EQ(joined, expected);
    EXPECT_EQ(total, expected.size());
  }
}

TEST(SelectionProperty, SharingConsistency) {
  CounterRng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = random_int(rng, 2, 6);
    const int L = static_cast<int>(random_int(rng, 0, 2));
    ModelEnsemble ens = small_ensemble(d, L, rng());
    std::vector<DenseTensor> before;
    for (std::size_t k = 1; k <= d; ++k) before.push_back(tt_to_full(ens.assemble_law(k)));
    const std::size_t l = random_int(rng, 1, d);
    const int j = static_cast<int>(random_int(rng, 1, std::size_t(ens.alpha())));
    BlockSparseCore& core = ens.core(l, j);
    core.set_parameters(core.parameters() + random_vector(rng, Eigen::Index(core.pattern().free_count())));
    const auto usage = activation_usage(ens.table(), l, j);
    const std::set<std::size_t> E(usage.components.begin(), usage.components.end());
    for (std::size_t k = 1; k <= d; ++k) {
      const double diff = relative_difference(tt_to_full(ens.assemble_law(k)), before[k - 1]);
      if (E.count(k))
        EXPECT_GT(diff, 0.0) << "trial " << trial << " k " << k;
      else
        EXPECT_EQ(diff, 0.0) << "trial " << trial << " k " << k;
    }
  }
}
