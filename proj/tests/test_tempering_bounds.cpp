#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "stlmc/stlmc.hpp"

using namespace stlmc;

TEST(TemperingChain, SingleLevelIsLazyBaseChain) {
  Rng rng(1);
  const FiniteChain c = random_reversible_chain(4, rng);
  for (auto mode : {ProposalMode::neighbor, ProposalMode::uniform}) {
    const FiniteTemperingChain st = build_tempering_chain({c}, {1.0}, mode);
    const Matrix lazy = 0.5 * (Matrix::Identity(4, 4) + c.P);
    EXPECT_LE((st.chain.P - lazy).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(TemperingChain, IdenticalLevelsHaveSymmetricLevelMarginal) {
  Rng rng(2);
  const FiniteChain c = random_reversible_chain(3, rng);
  const FiniteTemperingChain st = build_tempering_chain({c, c}, {0.5, 0.5}, ProposalMode::neighbor);
  EXPECT_NEAR(st.chain.p.head(3).sum(), 0.5, 1e-12);
  EXPECT_NEAR(st.chain.p.tail(3).sum(), 0.5, 1e-12);
  // Identical levels always accept: the level flips with probability 1/4.
  for (int x = 0; x < 3; ++x) EXPECT_NEAR(st.chain.P(x, 3 + x), 0.25, 1e-15);
  EXPECT_TRUE(st.chain.is_reversible());
}

TEST(TemperingChain, StationaryIsWeightedProduct) {
  for (std::uint64_t k = 0; k < 50; ++k) {
    Rng rng = Rng::stream(3, 0, k);
    const auto mode = k % 2 == 0 ? ProposalMode::neighbor : ProposalMode::uniform;
    const TemperingInstance inst = random_tempering_instance(rng, mode, false);
    const auto& st = inst.chain;
    EXPECT_LE(st.chain.stationarity_residual(), 1e-10);
    EXPECT_TRUE(st.chain.is_reversible());
    for (std::size_t i = 0; i < st.level_count(); ++i)
      EXPECT_NEAR(st.chain.p.segment(static_cast<Eigen::Index>(i * st.base_size()),
                                     static_cast<Eigen::Index>(st.base_size())).sum(),
                  st.rel_weights[i], 1e-12);
  }
}

TEST(TemperingChain, RejectsBadInputs) {
  Rng rng(4);
  const FiniteChain a = random_reversible_chain(3, rng);
  const FiniteChain b = random_reversible_chain(4, rng);
  EXPECT_THROW(build_tempering_chain({}, {}, ProposalMode::neighbor), Error);
  EXPECT_THROW(build_tempering_chain({a, b}, {0.5, 0.5}, ProposalMode::neighbor), Error);
  EXPECT_THROW(build_tempering_chain({a, a}, {0.4, 0.4}, ProposalMode::neighbor), Error);
  EXPECT_THROW(build_tempering_chain({a}, {0.5, 0.5}, ProposalMode::neighbor), Error);
}

TEST(Overlap, Examples) {
  Vector u = Vector::Constant(4, 0.25);
  EXPECT_DOUBLE_EQ(overlap_delta({u, u}, {Partition::whole(4), Partition::singletons(4)}), 1.0);
  EXPECT_DOUBLE_EQ(overlap_delta({u}, {Partition::whole(4)}), 1.0);
  Vector left(4), right(4);
  left << 0.5, 0.5, 0.0, 0.0;
  right << 0.0, 0.0, 0.5, 0.5;
  EXPECT_DOUBLE_EQ(overlap_delta({left, right}, {Partition::whole(4), Partition::whole(4)}), 0.0);
  Vector mid(4);
  mid << 0.4, 0.1, 0.1, 0.4;
  // sum min(u, mid) = 0.25 + 0.1 + 0.1 + 0.25.
  EXPECT_NEAR(overlap_delta({u, mid}, {Partition::whole(4), Partition::whole(4)}), 0.7, 1e-15);
}

TEST(Overlap, GammaAndBlockMass) {
  Vector a(4), b(4);
  a << 0.1, 0.2, 0.3, 0.4;
  b << 0.4, 0.3, 0.2, 0.1;
  const std::vector<Partition> parts{Partition::whole(4), Partition(std::vector<std::size_t>{0, 0, 1, 1})};
  EXPECT_NEAR(min_block_mass({a, b}, parts), 0.3, 1e-15);
  // Whole block: ratio 1. Level 2 against itself: 1. So gamma = 1.
  EXPECT_NEAR(refinement_gamma({a, b}, parts), 1.0, 1e-15);
  const std::vector<Partition> coarse{Partition(std::vector<std::size_t>{0, 0, 1, 1}),
                                      Partition(std::vector<std::size_t>{0, 0, 1, 1})};
  // Block {0, 1}: 0.3 / 0.7.
  EXPECT_NEAR(refinement_gamma({a, b}, coarse), 0.3 / 0.7, 1e-15);
}

TEST(GapBound, RandomSweepBothModes) {
  for (std::uint64_t k = 0; k < 200; ++k) {
    Rng rng = Rng::stream(5, 0, k);
    const auto mode = k % 2 == 0 ? ProposalMode::neighbor : ProposalMode::uniform;
    const TemperingInstance inst = random_tempering_instance(rng, mode, false);
    const BoundCheck c = tempering_gap_bound_check(inst.chain, inst.partitions);
    EXPECT_TRUE(c.holds()) << "instance " << k << ": bound " << c.bound << " gap " << c.gap;
    EXPECT_GE(c.bound, 0.0);
  }
}

TEST(GapBound, RefinementSweep) {
  for (std::uint64_t k = 0; k < 200; ++k) {
    Rng rng = Rng::stream(6, 0, k);
    const auto mode = k % 2 == 0 ? ProposalMode::neighbor : ProposalMode::uniform;
    const TemperingInstance inst = random_tempering_instance(rng, mode, true);
    const BoundCheck c = refinement_gap_bound_check(inst.chain, inst.partitions);
    EXPECT_TRUE(c.holds()) << "instance " << k << ": bound " << c.bound << " gap " << c.gap;
    EXPECT_GT(c.gamma, 0.0);
  }
}

TEST(GapBound, RefinementBeatsCoarseOnClusteredInstance) {
  const TemperingInstance inst = clustered_instance(8, 3, 0.01, ProposalMode::neighbor);
  const BoundCheck coarse = tempering_gap_bound_check(inst.chain, inst.partitions);
  const BoundCheck fine = refinement_gap_bound_check(inst.chain, inst.partitions);
  EXPECT_TRUE(coarse.holds());
  EXPECT_TRUE(fine.holds());
  EXPECT_DOUBLE_EQ(fine.delta, 1.0);
  EXPECT_DOUBLE_EQ(fine.gamma, 1.0);
  EXPECT_NEAR(coarse.p_min, 1.0 / 8.0, 1e-12);
  EXPECT_GT(fine.bound, 10.0 * coarse.bound);
}

TEST(GapBound, RejectsBadPartitions) {
  const TemperingInstance inst = clustered_instance(2, 2, 0.1, ProposalMode::neighbor);
  EXPECT_THROW(tempering_gap_bound_check(inst.chain, {Partition::whole(4)}), Error);
  const std::vector<Partition> first_split{Partition::singletons(4), Partition::singletons(4)};
  EXPECT_THROW(tempering_gap_bound_check(inst.chain, first_split), Error);
  const std::vector<Partition> not_refining{Partition::whole(4), Partition(std::vector<std::size_t>{0, 1, 0, 1})};
  EXPECT_NO_THROW(tempering_gap_bound_check(inst.chain, not_refining));
  const TemperingInstance three = [] {
    Rng rng(7);
    const FiniteChain c = random_reversible_chain(4, rng);
    return TemperingInstance{build_tempering_chain({c, c, c}, {0.3, 0.3, 0.4}, ProposalMode::neighbor), {}};
  }();
  const std::vector<Partition> crossing{Partition::whole(4), Partition(std::vector<std::size_t>{0, 0, 1, 1}),
                                        Partition(std::vector<std::size_t>{0, 1, 1, 0})};
  EXPECT_THROW(refinement_gap_bound_check(three.chain, crossing), Error);
}
