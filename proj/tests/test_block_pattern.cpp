#include "support.hpp"

#include "dynlaw/block_pattern.hpp"
#include "dynlaw/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace dynlaw;
using namespace dynlaw::testing;

namespace {

std::uint64_t enumerate_solutions(const DegreeMap& w, int target, int n) {
  std::vector<std::size_t> shape(static_cast<std::size_t>(n), w.size());
  if (n == 0) return target == 0 ? 1 : 0;
  std::uint64_t count = 0;
  for (const auto& idx : all_indices(shape)) {
    int s = 0;
    for (std::size_t i : idx) s += w[i];
    count += s == target;
  }
  return count;
}

int total_degree(const DegreeMap& w, const std::vector<std::size_t>& idx) {
  int s = 0;
  for (std::size_t i : idx) s += w[i];
  return s;
}

std::vector<BlockSparseCore> random_chain(const DegreeMap& w, int lambda, std::size_t d, std::size_t rho,
                                          DegreeMode mode, std::uint64_t seed) {
  const auto patterns = chain_patterns(w, lambda, d, rho, mode);
  return init_block_sparse_cores(patterns, seed);
}

// Support of a 4x4 block matrix given as rows of 0/1.
using Support = std::set<std::pair<int, int>>;

Support literal_support(const std::vector<std::vector<int>>& m) {
  Support s;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (m[r][c]) s.emplace(r, c);
  return s;
}

// Rows carry the consumed degree a = row; columns carry the remaining degree
// 4 - (column + 1), i.e. cumulative label b = column.
Support pattern_support(const BlockPattern& pat, std::size_t i) {
  Support s;
  for (auto [a, b] : pat.allowed(i)) s.emplace(a, b);
  return s;
}

} // namespace

TEST(BlockPattern, CountExamples) {
  const DegreeMap mono = DegreeMap::polynomial(3);
  const DegreeMap trig = DegreeMap::trigonometric();
  EXPECT_EQ(count_block_solutions(mono, 0, 2), 1u);
  EXPECT_EQ(count_block_solutions(mono, 2, 2), 3u);
  EXPECT_EQ(count_block_solutions(trig, 2, 2), 4u);
}

TEST(BlockPattern, MonomialInteriorSupport) {
  const auto pat = bounded_degree_pattern(DegreeMap::polynomial(3), 3, 10, 5, 4, DegreeMode::Fixed);
  EXPECT_EQ(pattern_support(pat, 0), literal_support({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}));
  EXPECT_EQ(pattern_support(pat, 1), literal_support({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}}));
  EXPECT_EQ(pattern_support(pat, 2), literal_support({{0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}}));
}

TEST(BlockPattern, TrigInteriorSupport) {
  const auto pat = bounded_degree_pattern(DegreeMap::trigonometric(), 3, 10, 5, 4, DegreeMode::Fixed);
  EXPECT_EQ(pattern_support(pat, 0), literal_support({{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}));
  const Support super = literal_support({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}});
  EXPECT_EQ(pattern_support(pat, 1), super);
  EXPECT_EQ(pattern_support(pat, 2), super);
}

TEST(BlockPattern, LambdaZero) {
  const DegreeMap w = DegreeMap::polynomial(4);
  for (std::size_t l = 1; l <= 4; ++l) {
    const auto pat = bounded_degree_pattern(w, 0, 4, l, 3);
    EXPECT_EQ(pat.blocks().size(), 1u);
    EXPECT_EQ(pat.blocks().front().phys, 0u);
    EXPECT_EQ(pat.free_count(), 1u);
  }
}

TEST(BlockPattern, BadArguments) {
  const DegreeMap w = DegreeMap::polynomial(3);
  EXPECT_THROW(bounded_degree_pattern(w, 2, 4, 0, 2), IndexError);
  EXPECT_THROW(bounded_degree_pattern(w, 2, 4, 5, 2), IndexError);
  EXPECT_THROW(bounded_degree_pattern(w, 2, 4, 1, 0), ConfigError);
  EXPECT_THROW(bounded_degree_pattern(w, 9, 2, 1, 2, DegreeMode::Fixed), StructureError);
}

TEST(BlockPattern, InitIsDeterministic) {
  const DegreeMap w = DegreeMap::polynomial(3);
  const auto a = random_chain(w, 3, 5, 2, DegreeMode::Bounded, 42);
  const auto b = random_chain(w, 3, 5, 2, DegreeMode::Bounded, 42);
  const auto c = random_chain(w, 3, 5, 2, DegreeMode::Bounded, 43);
  for (std::size_t l = 0; l < a.size(); ++l) EXPECT_EQ(a[l].parameters(), b[l].parameters());
  EXPECT_NE(a[2].parameters(), c[2].parameters());
}

TEST(BlockPattern, InitRespectsMask) {
  const auto chain = random_chain(DegreeMap::trigonometric(), 3, 6, 3, DegreeMode::Bounded, 7);
  for (const auto& core : chain) {
    const Core dense = core.to_core();
    const auto mask = core.pattern().dense_mask();
    for (std::size_t k = 0; k < mask.size(); ++k)
      if (!mask[k]) EXPECT_EQ(dense.data()[k], 0.0);
    EXPECT_NO_THROW(BlockSparseCore::from_core(core.pattern_ptr(), dense));
  }
}

TEST(BlockPattern, FromCoreRejectsOffPattern) {
  const auto chain = random_chain(DegreeMap::polynomial(3), 2, 4, 2, DegreeMode::Bounded, 8);
  Core dense = chain[1].to_core();
  const auto mask = chain[1].pattern().dense_mask();
  const auto off = std::find(mask.begin(), mask.end(), false);
  ASSERT_NE(off, mask.end());
  dense.data()[static_cast<std::size_t>(off - mask.begin())] = 1.0;
  EXPECT_THROW(BlockSparseCore::from_core(chain[1].pattern_ptr(), dense), StructureError);
}

TEST(BlockPattern, InitIsBlockwiseLeftOrthogonal) {
  const auto chain = random_chain(DegreeMap::polynomial(4), 3, 5, 3, DegreeMode::Bounded, 9);
  const TensorTrain tt = chain_to_tensor_train(chain);
  for (std::size_t l = 0; l + 1 < chain.size(); ++l) {
    const Core dense = chain[l].to_core();
    const auto C = dense.left_unfolding();
    const Matrix gram = C.transpose() * C;
    EXPECT_LE((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-12) << "core " << l + 1;
  }
  EXPECT_GT(tt_norm(tt), 0.0);
}

TEST(BlockPattern, MonomialBoundedDegreeD4) {
  const DegreeMap w = DegreeMap::polynomial(4);
  const auto chain = random_chain(w, 3, 4, 4, DegreeMode::Bounded, 10);
  const DenseTensor full = tt_to_full(chain_to_tensor_train(chain));
  double worst = 0.0, inside = 0.0;
  for (const auto& idx : all_indices(full.shape())) {
    double& slot = total_degree(w, idx) > 3 ? worst : inside;
    slot = std::max(slot, std::abs(full.at(idx)));
  }
  EXPECT_LE(worst, 1e-14);
  EXPECT_GT(inside, 0.0);
  EXPECT_EQ(max_coefficient_above_degree(full, w, 3), worst);
}

TEST(BlockPattern, DegreeOperatorExamples) {
  const DegreeMap w = DegreeMap::polynomial(3);
  DenseTensor phi({3, 3});
  phi.at(std::vector<std::size_t>{0, 0}) = 1.0;
  const DenseTensor zero = apply_degree_operator(phi, {w, 2});
  EXPECT_EQ(zero.norm(), 0.0);

  DenseTensor psi({3, 3});
  psi.at(std::vector<std::size_t>{1, 1}) = 1.0;
  const DenseTensor two = apply_degree_operator(psi, {w, 2});
  EXPECT_EQ(two.at(std::vector<std::size_t>{1, 1}), 2.0);

  CounterRng rng(11);
  DenseTensor any({2, 2, 2});
  for (double& v : any.data()) v = rng.normal();
  EXPECT_EQ(apply_degree_operator(any, {DegreeMap({0, 0}), 3}).norm(), 0.0);
  EXPECT_THROW(apply_degree_operator(any, {w, 3}), DimensionError);
}

TEST(BlockPattern, AssembleSingle) {
  CounterRng rng(12);
  const TensorTrain a = random_tt(rng, {3, 3, 3}, {2, 2});
  std::vector<TensorTrain> one{a};
  EXPECT_LE(relative_difference(tt_to_full(assemble_bounded_degree(one)), tt_to_full(a)), 1e-14);
  EXPECT_THROW(assemble_bounded_degree(std::span<const TensorTrain>{}), StructureError);
}

TEST(BlockPattern, AssembleTwoFixedDegrees) {
  const DegreeMap w = DegreeMap::polynomial(3);
  std::vector<TensorTrain> parts;
  for (int lambda : {1, 2})
    parts.push_back(chain_to_tensor_train(random_chain(w, lambda, 3, 3, DegreeMode::Fixed, 20 + lambda)));
  const DenseTensor sum = tt_to_full(assemble_bounded_degree(parts));
  const DenseTensor f1 = tt_to_full(parts[0]), f2 = tt_to_full(parts[1]);
  for (std::size_t k = 0; k < sum.size(); ++k) EXPECT_NEAR(sum[k], f1[k] + f2[k], 1e-12);
}

// Properties.

TEST(BlockPatternProperty, CountMatchesEnumeration) {
  for (std::size_t p = 1; p <= 4; ++p) {
    std::vector<DegreeMap> maps{DegreeMap::polynomial(p)};
    if (p == 3) maps.push_back(DegreeMap::trigonometric());
    for (const DegreeMap& w : maps)
      for (int n = 0; n <= 6; ++n)
        for (int t = 0; t <= 8; ++t)
          EXPECT_EQ(count_block_solutions(w, t, n), enumerate_solutions(w, t, n)) << "p=" << p << " n=" << n << " t=" << t;
  }
}

TEST(BlockPatternProperty, EigenvectorOfDegreeOperator) {
  CounterRng rng(200);
  for (int trial = 0; trial < 60; ++trial) {
    const bool trig = trial % 2 == 1;
    const std::size_t d = random_int(rng, 2, 6);
    const std::size_t p = trig ? 3 : random_int(rng, 2, 4);
    const DegreeMap w = trig ? DegreeMap::trigonometric() : DegreeMap::polynomial(p);
    const int lambda = static_cast<int>(random_int(rng, 0, 4));
    if (lambda > static_cast<int>(d) * w.max()) continue;
    const auto chain = random_chain(w, lambda, d, random_int(rng, 1, 3), DegreeMode::Fixed, rng());
    const DenseTensor full = tt_to_full(chain_to_tensor_train(chain));
    const DenseTensor Lphi = apply_degree_operator(full, {w, d});
    double err = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) err = std::max(err, std::abs(Lphi[k] - lambda * full[k]));
    EXPECT_LE(err, 1e-10 * std::max(1.0, full.norm())) << "trial " << trial;
  }
}

TEST(BlockPatternProperty, BoundedDegreeHasNoHighCoefficients) {
  CounterRng rng(201);
  for (int trial = 0; trial < 60; ++trial) {
    const bool trig = trial % 2 == 1;
    const std::size_t d = random_int(rng, 2, 6);
    const DegreeMap w = trig ? DegreeMap::trigonometric() : DegreeMap::polynomial(random_int(rng, 2, 4));
    const int lambda = static_cast<int>(random_int(rng, 0, 4));
    const auto chain = random_chain(w, lambda, d, random_int(rng, 1, 3), DegreeMode::Bounded, rng());
    const DenseTensor raw = tt_to_full(chain_to_tensor_train(chain));
    const DenseTensor gauged = tt_to_full(left_orthogonalize(chain_to_tensor_train(chain)));
    for (const auto& idx : all_indices(raw.shape()))
      if (total_degree(w, idx) > lambda) {
        ASSERT_LE(std::abs(raw.at(idx)), 1e-14 * raw.norm()) << "trial " << trial;
        ASSERT_LE(std::abs(gauged.at(idx)), 1e-14 * gauged.norm()) << "trial " << trial;
      }
  }
}

TEST(BlockPatternProperty, CapSoundness) {
  CounterRng rng(202);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t d = random_int(rng, 1, 7);
    const DegreeMap w = trial % 3 == 0 ? DegreeMap::trigonometric() : DegreeMap::polynomial(random_int(rng, 1, 4));
    const int lambda = static_cast<int>(random_int(rng, 0, 5));
    const std::size_t rho = random_int(rng, 1, 5);
    const auto mode = trial % 2 ? DegreeMode::Fixed : DegreeMode::Bounded;
    if (mode == DegreeMode::Fixed && lambda > static_cast<int>(d) * w.max()) continue;
    const auto patterns = chain_patterns(w, lambda, d, rho, mode);
    for (std::size_t l = 1; l <= d; ++l) {
      const BlockPattern& pat = *patterns[l - 1];
      for (const BlockSpec& b : pat.blocks()) {
        const int a = pat.left().labels[b.row];
        const int c = pat.right().labels[b.col];
        EXPECT_EQ(c, a + w[b.phys]);
        EXPECT_LE(c, lambda);
        std::uint64_t right = 0;
        if (mode == DegreeMode::Fixed) {
          right = enumerate_solutions(w, lambda - c, static_cast<int>(d - l));
        } else {
          for (int t = 0; t <= lambda - c; ++t) right += enumerate_solutions(w, t, static_cast<int>(d - l));
        }
        EXPECT_LE(b.rows, std::min<std::uint64_t>(rho, enumerate_solutions(w, a, static_cast<int>(l - 1))));
        EXPECT_LE(b.cols, std::min<std::uint64_t>(rho, right));
        EXPECT_LE(b.cols, std::min<std::uint64_t>(rho, enumerate_solutions(w, c, static_cast<int>(l))));
      }
    }
  }
}
