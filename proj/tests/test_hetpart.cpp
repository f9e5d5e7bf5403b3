#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace wfmap;
using fixtures::ids;
using fixtures::idx;

namespace {

QuotientGraph singletons(const WorkflowDag& dag) {
  std::vector<std::vector<TaskIndex>> blocks;
  for (TaskIndex u = 0; u < dag.size(); ++u) blocks.push_back({u});
  return build_quotient(dag, Partition::from_blocks(dag.size(), blocks));
}

// Vertex of the singleton quotient holding task `id`.
VertexId vx(const WorkflowDag& dag, const char* id) { return static_cast<VertexId>(dag.require(id)); }

std::optional<VertexId> vertex_with(const QuotientGraph& q, TaskIndex u) {
  for (auto v : q.vertices()) {
    const auto& m = q.vertex(v).members;
    if (std::binary_search(m.begin(), m.end(), u)) return v;
  }
  return std::nullopt;
}

std::vector<char> all_candidates(const QuotientGraph& q) { return std::vector<char>(q.slot_count(), 1); }

const Partitioner& builtin() { return *builtin_partitioner(); }

}  // namespace

TEST(HetPart, WorkedExamplePartitionWithoutLocalSearch) {
  auto dag = fixtures::nine_task_dag();
  auto system = fixtures::uniform_system(4, 100);
  HetPartOptions opt;
  opt.local_search = false;
  auto outcome = daghetpart_from_partition(dag, system, fixtures::nine_task_blocks(dag), opt);
  ASSERT_TRUE(feasible(outcome));
  const auto& r = std::get<MappingResult>(outcome);
  EXPECT_EQ(r.blocks.size(), 4u);
  EXPECT_EQ(r.makespan, 12.0);
  EXPECT_TRUE(check_mapping(dag, system, r).empty());
}

TEST(HetPart, WorkedExampleLocalSearchCannotImproveUniformSystem) {
  auto dag = fixtures::nine_task_dag();
  auto system = fixtures::uniform_system(4, 100);
  auto outcome = daghetpart_from_partition(dag, system, fixtures::nine_task_blocks(dag));
  ASSERT_TRUE(feasible(outcome));
  EXPECT_EQ(std::get<MappingResult>(outcome).makespan, 12.0);
  EXPECT_EQ(std::get<MappingResult>(outcome).local_search_makespans, (std::vector<double>{12.0}));
}

TEST(HetPart, ChainStaysWholeOnFastestProcessor) {
  WorkflowDag dag({{"a", 2, 1}, {"b", 3, 1}, {"c", 5, 1}, {"d", 10, 1}},
                  {{"a", "b", 1}, {"b", "c", 1}, {"c", "d", 1}});
  auto system = fixtures::system_of({{100, 1}, {100, 10}});
  auto outcome = daghetpart(dag, system);
  ASSERT_TRUE(feasible(outcome));
  const auto& r = std::get<MappingResult>(outcome);
  ASSERT_EQ(r.blocks.size(), 1u);
  EXPECT_EQ(r.blocks[0].proc, 1u);
  EXPECT_DOUBLE_EQ(r.makespan, 2.0);
}

TEST(HetPart, SweepIsNeverWorseThanSingleBlock) {
  for (auto family : kAllFamilies) {
    auto dag = generate_workflow(family, 40, 5);
    auto system = scale_memories_to_fit(preset(Preset::Small, 1.0), dag);
    std::vector<TaskIndex> all(dag.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<TaskIndex>(i);
    auto single = daghetpart_from_partition(dag, system, {all});
    auto best = daghetpart(dag, system);
    if (feasible(single)) {
      ASSERT_TRUE(feasible(best));
      EXPECT_LE(std::get<MappingResult>(best).makespan, std::get<MappingResult>(single).makespan);
    }
  }
}

TEST(SweepPartCounts, StrideKeepsFirstAndLast) {
  EXPECT_EQ(sweep_part_counts(5, 1), (std::vector<std::size_t>{1, 2, 3, 4, 5}));
  EXPECT_EQ(sweep_part_counts(6, 2), (std::vector<std::size_t>{1, 3, 5, 6}));
  EXPECT_EQ(sweep_part_counts(1, 3), (std::vector<std::size_t>{1}));
  EXPECT_TRUE(sweep_part_counts(0, 1).empty());
}

TEST(BiggestAssign, LargestBlockGetsLargestMemory) {
  WorkflowDag dag({{"x", 1, 8}, {"y", 1, 5}}, {});
  auto system = fixtures::system_of({{6, 1}, {10, 1}});
  auto out = biggest_assign(dag, {ids(dag, {"y"}), ids(dag, {"x"})}, system, builtin(), {});
  ASSERT_EQ(out.blocks.size(), 2u);
  for (const auto& b : out.blocks) {
    ASSERT_TRUE(b.proc.has_value());
    EXPECT_EQ(*b.proc, b.members == ids(dag, {"x"}) ? 1u : 0u);
  }
  EXPECT_EQ(out.splits, 0u);
}

TEST(BiggestAssign, OversizedBlockIsSplitAndReenqueued) {
  // Each of a..d sends 5 to its own consumer outside the block, and those
  // files pile up until the block ends: the block needs 20.
  WorkflowDag dag({{"a", 1, 0}, {"b", 1, 0}, {"c", 1, 0}, {"d", 1, 0}, {"sa", 1, 0}, {"sb", 1, 0}, {"sc", 1, 0},
                   {"sd", 1, 0}},
                  {{"a", "sa", 5}, {"b", "sb", 5}, {"c", "sc", 5}, {"d", "sd", 5}});
  EXPECT_EQ(block_memory_requirement(dag, ids(dag, {"a", "b", "c", "d"})).peak, 20.0);
  auto system = fixtures::uniform_system(2, 10);
  auto out = biggest_assign(dag, {ids(dag, {"a", "b", "c", "d"})}, system, builtin(), {});
  EXPECT_EQ(out.splits, 1u);
  ASSERT_EQ(out.blocks.size(), 2u);
  std::set<ProcIndex> used;
  for (const auto& b : out.blocks) {
    EXPECT_EQ(b.requirement, 10.0);
    ASSERT_TRUE(b.proc.has_value());
    used.insert(*b.proc);
  }
  EXPECT_EQ(used.size(), 2u);
}

TEST(BiggestAssign, LeftoverBlocksFitSmallestMemoryUnassigned) {
  WorkflowDag dag({{"p", 1, 20}, {"q", 1, 9}, {"r", 1, 3}, {"a", 1, 0}, {"b", 1, 0}, {"sa", 1, 0}, {"sb", 1, 0}},
                  {{"a", "sa", 5}, {"b", "sb", 5}});
  auto system = fixtures::system_of({{20, 1}, {9, 1}});
  auto out = biggest_assign(dag, {ids(dag, {"p"}), ids(dag, {"q"}), ids(dag, {"r"}), ids(dag, {"a", "b"})}, system,
                            builtin(), {});
  EXPECT_EQ(out.splits, 1u);
  EXPECT_TRUE(out.oversized.empty());
  std::size_t assigned = 0, unassigned = 0;
  for (const auto& b : out.blocks) {
    if (b.proc) {
      ++assigned;
      EXPECT_LE(b.requirement, system.processor(*b.proc).memory);
    } else {
      ++unassigned;
      EXPECT_LE(b.requirement, 9.0);
    }
  }
  EXPECT_EQ(assigned, 2u);
  EXPECT_EQ(unassigned, 3u);  // r, a, b
}

TEST(FitBlock, FittingBlockIsPlacedWhenMapping) {
  WorkflowDag dag({{"x", 1, 4}}, {});
  auto system = fixtures::uniform_system(1, 10);
  auto block = make_work_block(dag, {0});
  BlockQueue queue;
  auto r = fit_block(dag, block, queue, system, 0, true, builtin(), {});
  EXPECT_EQ(r.status, FitStatus::Placed);
  EXPECT_EQ(block.proc, std::optional<ProcIndex>(0));
  EXPECT_TRUE(queue.empty());
}

TEST(FitBlock, FittingBlockIsLeftAloneWithoutMapping) {
  WorkflowDag dag({{"x", 1, 4}}, {});
  auto system = fixtures::uniform_system(1, 10);
  auto block = make_work_block(dag, {0});
  BlockQueue queue;
  auto r = fit_block(dag, block, queue, system, 0, false, builtin(), {});
  EXPECT_EQ(r.status, FitStatus::FitsUnmapped);
  EXPECT_FALSE(block.proc.has_value());
  EXPECT_TRUE(queue.empty());
}

TEST(FitBlock, OverweightPairBecomesTwoSingletons) {
  WorkflowDag dag({{"a", 1, 0}, {"b", 1, 0}, {"z", 1, 0}}, {{"a", "z", 7}, {"b", "z", 7}});
  auto system = fixtures::uniform_system(1, 10);
  auto block = make_work_block(dag, ids(dag, {"a", "b"}));
  EXPECT_EQ(block.requirement, 14.0);
  BlockQueue queue;
  auto r = fit_block(dag, block, queue, system, 0, true, builtin(), {});
  EXPECT_EQ(r.status, FitStatus::Split);
  ASSERT_EQ(queue.size(), 2u);
  std::set<std::vector<TaskIndex>> parts;
  while (!queue.empty()) {
    auto b = queue.pop();
    EXPECT_EQ(b.requirement, 7.0);
    parts.insert(b.members);
  }
  EXPECT_EQ(parts, (std::set<std::vector<TaskIndex>>{ids(dag, {"a"}), ids(dag, {"b"})}));
}

TEST(FitBlock, OversizedSingleTaskIsUnsplittable) {
  WorkflowDag dag({{"x", 1, 20}}, {});
  auto system = fixtures::uniform_system(1, 10);
  auto block = make_work_block(dag, {0});
  BlockQueue queue;
  auto r = fit_block(dag, block, queue, system, 0, true, builtin(), {});
  EXPECT_EQ(r.status, FitStatus::Unsplittable);
  EXPECT_EQ(r.task, std::optional<TaskIndex>(0));
}

TEST(BlockQueue, OrdersByRequirementThenWorkThenFirstMember) {
  WorkflowDag dag({{"a", 1, 5}, {"b", 3, 5}, {"c", 3, 5}, {"d", 1, 9}}, {});
  BlockQueue queue;
  for (TaskIndex u = 0; u < 4; ++u) queue.push(make_work_block(dag, {u}));
  EXPECT_EQ(queue.pop().members, ids(dag, {"d"}));
  EXPECT_EQ(queue.pop().members, ids(dag, {"b"}));
  EXPECT_EQ(queue.pop().members, ids(dag, {"c"}));
  EXPECT_EQ(queue.pop().members, ids(dag, {"a"}));
}

TEST(FindMergePartner, NoAssignedNeighbour) {
  WorkflowDag dag({{"v", 1, 0}, {"w", 1, 0}}, {{"v", "w", 1}});
  auto q = singletons(dag);
  auto choice = find_ms_opt_merge(dag, fixtures::uniform_system(2, 10), q, 0, all_candidates(q));
  EXPECT_TRUE(std::isinf(choice.makespan));
  EXPECT_FALSE(choice.partner.has_value());
  EXPECT_FALSE(choice.third.has_value());
}

TEST(FindMergePartner, TwoCycleIsResolvedByTripleMerge) {
  // a -> b, a -> c, c -> b. Merging a into b closes a 2-cycle with c; the
  // triple merge fits b's processor while a + c does not fit c's.
  WorkflowDag dag({{"a", 1, 1}, {"b", 1, 1}, {"c", 1, 1}}, {{"a", "b", 1}, {"a", "c", 1}, {"c", "b", 1}});
  auto system = fixtures::system_of({{100, 1}, {2, 1}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "b")).proc = 0;
  q.vertex(vx(dag, "c")).proc = 1;
  auto before = q;
  auto choice = find_ms_opt_merge(dag, system, q, vx(dag, "a"), all_candidates(q));
  ASSERT_TRUE(choice.partner.has_value());
  EXPECT_EQ(*choice.partner, vx(dag, "b"));
  ASSERT_TRUE(choice.third.has_value());
  EXPECT_EQ(*choice.third, vx(dag, "c"));
  EXPECT_EQ(choice.makespan, 3.0);
  EXPECT_TRUE(q == before);
}

TEST(FindMergePartner, PicksSmallerMakespan) {
  // x -> v -> y. Putting the heavy v on y's faster processor wins:
  // with x: 7/1 + 1 + 1/2 = 8.5; with y: 1 + 1 + 7/2 = 5.5.
  WorkflowDag dag({{"v", 6, 0}, {"x", 1, 0}, {"y", 1, 0}}, {{"x", "v", 1}, {"v", "y", 1}});
  auto system = fixtures::system_of({{100, 1}, {100, 2}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "x")).proc = 0;
  q.vertex(vx(dag, "y")).proc = 1;
  auto choice = find_ms_opt_merge(dag, system, q, vx(dag, "v"), all_candidates(q));
  ASSERT_TRUE(choice.partner.has_value());
  EXPECT_EQ(*choice.partner, vx(dag, "y"));
  EXPECT_EQ(choice.makespan, 5.5);
  EXPECT_FALSE(choice.third.has_value());
}

TEST(FindMergePartner, RespectsCandidateMask) {
  WorkflowDag dag({{"v", 6, 0}, {"x", 1, 0}, {"y", 1, 0}}, {{"x", "v", 1}, {"v", "y", 1}});
  auto system = fixtures::system_of({{100, 1}, {100, 2}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "x")).proc = 0;
  q.vertex(vx(dag, "y")).proc = 1;
  std::vector<char> only_x(q.slot_count(), 0);
  only_x[vx(dag, "x")] = 1;
  auto choice = find_ms_opt_merge(dag, system, q, vx(dag, "v"), only_x);
  EXPECT_EQ(choice.partner, std::optional<VertexId>(vx(dag, "x")));
  EXPECT_EQ(choice.makespan, 8.5);
}

TEST(MergeUnassigned, NothingToDoWhenAllAssigned) {
  auto dag = fixtures::nine_task_dag();
  auto q = fixtures::nine_task_quotient(dag);
  for (VertexId v = 0; v < 4; ++v) q.vertex(v).proc = v;
  auto before = q;
  EXPECT_FALSE(merge_unassigned_to_assigned(dag, fixtures::uniform_system(4, 100), q).has_value());
  EXPECT_TRUE(q == before);
}

TEST(MergeUnassigned, FallsBackToCriticalPathPartner) {
  // x (heavy) -> u and y -> u. The critical path is x -> u, so y is tried
  // first, but u + y needs 7 against y's memory of 3; u then joins x.
  WorkflowDag dag({{"u", 1, 5}, {"x", 10, 0}, {"y", 1, 0}}, {{"x", "u", 1}, {"y", "u", 1}});
  auto system = fixtures::system_of({{100, 1}, {3, 1}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "x")).proc = 0;
  q.vertex(vx(dag, "y")).proc = 1;
  MergeStats stats;
  EXPECT_FALSE(merge_unassigned_to_assigned(dag, system, q, &stats).has_value());
  EXPECT_EQ(stats.merges, 1u);
  auto v = vertex_with(q, idx(dag, "u"));
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(q.vertex(*v).members, ids(dag, {"u", "x"}));
  EXPECT_EQ(q.vertex(*v).proc, std::optional<ProcIndex>(0));
}

TEST(MergeUnassigned, ReinsertedVertexMergesAfterItsNeighbour) {
  // s -> p -> v -> z with s and z assigned. p cannot join s (memory 1) and
  // its other neighbour v is still unassigned, so p waits; v joins z, and
  // then p joins the merged vertex.
  WorkflowDag dag({{"a_s", 1, 0}, {"b_p", 1, 2}, {"c_v", 1, 0}, {"d_z", 1, 0}},
                  {{"a_s", "b_p", 1}, {"b_p", "c_v", 1}, {"c_v", "d_z", 1}});
  auto system = fixtures::system_of({{1, 1}, {100, 1}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "a_s")).proc = 0;
  q.vertex(vx(dag, "d_z")).proc = 1;
  MergeStats stats;
  EXPECT_FALSE(merge_unassigned_to_assigned(dag, system, q, &stats).has_value());
  EXPECT_EQ(stats.reinsertions, 1u);
  EXPECT_EQ(stats.merges, 2u);
  EXPECT_EQ(q.vertex_count(), 2u);
  auto v = vertex_with(q, idx(dag, "b_p"));
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(q.vertex(*v).members, ids(dag, {"b_p", "c_v", "d_z"}));
  EXPECT_EQ(q.vertex(*v).proc, std::optional<ProcIndex>(1));
  EXPECT_EQ(q.vertex(*v).reinsert_counter, 0);
}

TEST(MergeUnassigned, NoPartnerAndNoWaitingNeighbourIsInfeasible) {
  WorkflowDag dag({{"p", 1, 5}, {"s", 1, 0}}, {{"s", "p", 1}});
  auto system = fixtures::system_of({{1, 1}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "s")).proc = 0;
  auto fail = merge_unassigned_to_assigned(dag, system, q);
  ASSERT_TRUE(fail.has_value());
  EXPECT_EQ(fail->task, std::optional<TaskIndex>(idx(dag, "p")));
}

TEST(MergeUnassigned, ExaminationsAreBounded) {
  for (auto family : kAllFamilies) {
    auto dag = generate_workflow(family, 120, 2);
    auto system = scale_memories_to_fit(preset(Preset::Small, 1.0), dag);
    std::vector<TaskIndex> all(dag.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<TaskIndex>(i);
    auto initial = builtin().partition(dag, all, {18, 0.1, WeightKind::Work, 0}).parts;
    auto step2 = biggest_assign(dag, initial, system, builtin(), {});
    auto q = detail::quotient_of(dag, step2.blocks);
    auto vertices = q.vertex_count();
    MergeStats stats;
    auto fail = merge_unassigned_to_assigned(dag, system, q, &stats);
    EXPECT_LE(stats.examinations, 3 * vertices);
    if (!fail) {
      EXPECT_TRUE(is_acyclic(q).acyclic);
      for (auto v : q.vertices()) EXPECT_TRUE(q.vertex(v).proc.has_value());
    }
  }
}

TEST(SwapUntilBest, HeavyBlockMovesToFastProcessor) {
  WorkflowDag dag({{"h", 100, 1}, {"l", 1, 1}}, {});
  auto system = fixtures::system_of({{10, 1}, {10, 10}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "h")).proc = 0;
  q.vertex(vx(dag, "l")).proc = 1;
  std::vector<double> history{makespan(q, system)};
  EXPECT_EQ(swap_until_best(dag, q, system, history), 1u);
  EXPECT_EQ(q.vertex(vx(dag, "h")).proc, std::optional<ProcIndex>(1));
  EXPECT_EQ(history, (std::vector<double>{100.0, 10.0}));
}

TEST(SwapUntilBest, NoReciprocalFitLeavesMappingAlone) {
  WorkflowDag dag({{"h", 100, 8}, {"l", 1, 1}}, {});
  auto system = fixtures::system_of({{10, 1}, {2, 10}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "h")).proc = 0;
  q.vertex(vx(dag, "l")).proc = 1;
  std::vector<double> history{makespan(q, system)};
  EXPECT_EQ(swap_until_best(dag, q, system, history), 0u);
  EXPECT_EQ(q.vertex(vx(dag, "h")).proc, std::optional<ProcIndex>(0));
  EXPECT_EQ(history.size(), 1u);
}

TEST(SwapUntilBest, SymmetricMappingHasNoImprovingSwap) {
  WorkflowDag dag({{"a", 5, 1}, {"b", 5, 1}}, {});
  auto system = fixtures::uniform_system(2, 10, 2.0);
  auto q = singletons(dag);
  q.vertex(0).proc = 0;
  q.vertex(1).proc = 1;
  std::vector<double> history{makespan(q, system)};
  EXPECT_EQ(swap_until_best(dag, q, system, history), 0u);
}

TEST(MoveToIdle, NothingIdle) {
  WorkflowDag dag({{"a", 1, 1}, {"b", 1, 1}}, {{"a", "b", 1}});
  auto system = fixtures::system_of({{10, 4}, {10, 4}});
  auto q = singletons(dag);
  q.vertex(0).proc = 0;
  q.vertex(1).proc = 1;
  std::vector<double> history{makespan(q, system)};
  EXPECT_EQ(move_to_idle(dag, q, system, history), 0u);
}

TEST(MoveToIdle, CriticalBlockMovesToFasterIdleProcessor) {
  WorkflowDag dag({{"a", 1, 1}, {"b", 1, 1}}, {{"a", "b", 1}});
  auto system = fixtures::system_of({{10, 4}, {10, 4}, {10, 32}});
  auto q = singletons(dag);
  q.vertex(vx(dag, "a")).proc = 0;
  q.vertex(vx(dag, "b")).proc = 1;
  std::vector<double> history{makespan(q, system)};
  EXPECT_EQ(history.front(), 1.5);
  EXPECT_EQ(move_to_idle(dag, q, system, history), 1u);
  EXPECT_EQ(q.vertex(vx(dag, "a")).proc, std::optional<ProcIndex>(2));
  EXPECT_EQ(history.back(), 1.0 / 32 + 1 + 0.25);
}

TEST(MoveToIdle, IdleProcessorsTooSmall) {
  WorkflowDag dag({{"a", 1, 1}, {"b", 1, 1}}, {{"a", "b", 1}});
  auto system = fixtures::system_of({{10, 4}, {10, 4}, {0.5, 32}});
  auto q = singletons(dag);
  q.vertex(0).proc = 0;
  q.vertex(1).proc = 1;
  std::vector<double> history{makespan(q, system)};
  EXPECT_EQ(move_to_idle(dag, q, system, history), 0u);
  EXPECT_EQ(q.vertex(0).proc, std::optional<ProcIndex>(0));
}

TEST(HetPartProperties, GeneratedInstancesAreFeasibleMonotoneAndDeterministic) {
  const Preset presets[] = {Preset::Default, Preset::Small, Preset::MoreHet};
  std::size_t feasible_count = 0;
  for (auto family : kAllFamilies) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      auto dag = generate_workflow(family, 60, seed);
      auto system = scale_memories_to_fit(preset(presets[seed % 3], 1.0), dag);
      HetPartOptions opt;
      opt.seed = seed;
      auto a = daghetpart(dag, system, opt);
      auto b = daghetpart(dag, system, opt);
      EXPECT_EQ(dump(result_to_json(dag, system, a, "hetpart")), dump(result_to_json(dag, system, b, "hetpart")));
      if (!feasible(a)) continue;
      ++feasible_count;
      const auto& r = std::get<MappingResult>(a);
      auto violations = check_mapping(dag, system, r);
      EXPECT_TRUE(violations.empty()) << violations.front();
      const auto& seq = r.local_search_makespans;
      for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_LE(seq[i], seq[i - 1]);
      EXPECT_FALSE(r.trace.empty());
    }
  }
  EXPECT_GT(feasible_count, 0u);
}

TEST(HetPart, OversizedTaskIsReported) {
  WorkflowDag dag({{"a", 1, 1}, {"big", 1, 500}}, {{"a", "big", 1}});
  auto outcome = daghetpart(dag, fixtures::uniform_system(3, 100));
  ASSERT_FALSE(feasible(outcome));
  EXPECT_EQ(std::get<Infeasible>(outcome).task, std::optional<TaskIndex>(idx(dag, "big")));
}
