#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace wfmap;

namespace {

QuotientGraph worked_quotient() {
  return fixtures::make_quotient({4, 1, 3, 1}, {{0, 1, 1}, {0, 2, 2}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
}

}  // namespace

TEST(BottomWeights, WorkedExample) {
  auto q = worked_quotient();
  auto system = fixtures::uniform_system(4, 100);
  auto bw = bottom_weights(q, system);
  EXPECT_EQ(bw.at(0), 12.0);
  EXPECT_EQ(bw.at(1), 7.0);
  EXPECT_EQ(bw.at(2), 5.0);
  EXPECT_EQ(bw.at(3), 1.0);
  EXPECT_EQ(bw.makespan, 12.0);
}

TEST(BottomWeights, WorkedExampleFromTasks) {
  auto dag = fixtures::nine_task_dag();
  auto q = fixtures::nine_task_quotient(dag);
  auto bw = bottom_weights(q, fixtures::uniform_system(4, 100));
  EXPECT_EQ(bw.makespan, 12.0);
  EXPECT_EQ(bw.critical_path, (std::vector<VertexId>{0, 1, 2, 3}));
}

TEST(BottomWeights, SingleVertexOnProcessor) {
  auto q = fixtures::make_quotient({12}, {});
  q.vertex(0).proc = 0;
  auto system = fixtures::system_of({{10, 4}});
  EXPECT_EQ(makespan(q, system), 3.0);
}

TEST(BottomWeights, ChainWithBandwidthTwo) {
  auto q = fixtures::make_quotient({2, 3}, {{0, 1, 4}});
  auto system = fixtures::uniform_system(2, 10, 1.0, 2.0);
  auto bw = bottom_weights(q, system);
  EXPECT_EQ(bw.at(1), 3.0);
  EXPECT_EQ(bw.at(0), 7.0);
}

TEST(BottomWeights, UnassignedVerticesRunAtSpeedOne) {
  auto q = fixtures::make_quotient({8, 8}, {{0, 1, 0}});
  q.vertex(0).proc = 0;
  auto system = fixtures::system_of({{10, 4}, {10, 2}});
  EXPECT_EQ(makespan(q, system), 2.0 + 8.0);
}

TEST(BottomWeights, CyclicQuotientThrows) {
  auto q = fixtures::make_quotient({1, 1}, {{0, 1, 1}, {1, 0, 1}});
  EXPECT_THROW(bottom_weights(q, fixtures::uniform_system(2, 1)), CyclicQuotientError);
}

TEST(CriticalPath, WorkedExampleFollowsArgmax) {
  auto bw = bottom_weights(worked_quotient(), fixtures::uniform_system(4, 100));
  EXPECT_EQ(bw.critical_path, (std::vector<VertexId>{0, 1, 2, 3}));
}

TEST(CriticalPath, SingleVertex) {
  auto q = fixtures::make_quotient({5}, {});
  auto bw = bottom_weights(q, fixtures::uniform_system(1, 1));
  EXPECT_EQ(bw.critical_path, (std::vector<VertexId>{0}));
}

TEST(CriticalPath, TieGoesToSmallerId) {
  auto q = fixtures::make_quotient({1, 2, 2}, {{0, 2, 1}, {0, 1, 1}});
  auto bw = bottom_weights(q, fixtures::uniform_system(3, 1));
  EXPECT_EQ(bw.critical_path, (std::vector<VertexId>{0, 1}));
}

TEST(OracleMakespan, WorkedExampleAndSingleVertex) {
  EXPECT_EQ(oracle_makespan(worked_quotient(), fixtures::uniform_system(4, 1)), 12.0);
  auto q = fixtures::make_quotient({9}, {});
  q.vertex(0).proc = 0;
  EXPECT_EQ(oracle_makespan(q, fixtures::system_of({{1, 3}})), 3.0);
}

TEST(OracleMakespan, MatchesBottomWeightsOnRandomQuotients) {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 300; ++trial) {
    auto system = random_system(10, rng);
    auto q = random_quotient(1 + trial % 10, system, rng);
    EXPECT_TRUE(fixtures::close(makespan(q, system), oracle_makespan(q, system)));
  }
}

TEST(OracleMakespan, RejectsLargeGraphs) {
  auto q = fixtures::make_quotient(std::vector<double>(11, 1.0), {});
  EXPECT_THROW(oracle_makespan(q, fixtures::uniform_system(1, 1)), std::invalid_argument);
}

TEST(MakespanProperties, ScalingSpeedsAndBandwidth) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    auto system = random_system(10, rng);
    auto q = random_quotient(8, system, rng);
    for (auto v : q.vertices())
      if (!q.vertex(v).proc) q.vertex(v).proc = static_cast<ProcIndex>(9 - v % 2);  // keep all assigned
    // distinctness is not needed for the makespan formula itself
    const double lambda = 2.5;
    std::vector<Processor> scaled = system.processors();
    for (auto& p : scaled) p.speed *= lambda;
    ComputingSystem faster(scaled, system.bandwidth() * lambda);
    auto a = bottom_weights(q, system), b = bottom_weights(q, faster);
    EXPECT_TRUE(fixtures::close(b.makespan, a.makespan / lambda));
    EXPECT_EQ(a.critical_path, b.critical_path);
  }
}

TEST(MakespanProperties, RemovingAnEdgeNeverIncreasesMakespan) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto system = random_system(10, rng);
    auto q = random_quotient(8, system, rng, 0.5);
    double full = makespan(q, system);
    QuotientGraph fewer;
    for (auto v : q.vertices()) fewer.add_vertex(q.vertex(v));
    bool skipped = false;
    for (auto v : q.vertices())
      for (const auto& [c, vol] : q.children(v)) {
        if (!skipped) {
          skipped = true;
          continue;
        }
        fewer.add_edge_volume(v, c, vol);
      }
    EXPECT_LE(makespan(fewer, system), full * (1 + 1e-12));
  }
}

TEST(MakespanProperties, AllUnassignedIgnoresSystem) {
  std::mt19937_64 rng(31);
  auto q = worked_quotient();
  auto a = random_system(4, rng), b = random_system(4, rng);
  auto same_bw = ComputingSystem(b.processors(), a.bandwidth());
  EXPECT_EQ(makespan(q, a), makespan(q, same_bw));
}
