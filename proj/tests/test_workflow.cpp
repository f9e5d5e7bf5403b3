#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace wfmap;
using fixtures::nine_task_dag;

namespace {

WorkflowDag chain3() { return WorkflowDag({{"1", 1, 0}, {"2", 1, 0}, {"3", 1, 0}}, {{"1", "2", 1}, {"2", "3", 1}}); }

std::vector<std::string> ids_of(const WorkflowDag& dag, const std::vector<TaskIndex>& order) {
  std::vector<std::string> out;
  for (auto u : order) out.push_back(dag.task(u).id);
  return out;
}

}  // namespace

TEST(Validate, WellFormedChainHasEmptyReport) {
  auto report = validate(chain3());
  EXPECT_TRUE(report.ok());
  EXPECT_TRUE(report.violations.empty());
}

TEST(Validate, TwoCycleReportedOnceWithBothTasks) {
  WorkflowDag dag({{"1", 1, 0}, {"2", 1, 0}}, {{"1", "2", 1}, {"2", "1", 1}});
  auto report = validate(dag);
  ASSERT_EQ(report.count(Violation::Kind::Cycle), 1u);
  const auto& v = report.violations.front();
  EXPECT_EQ(v.kind, Violation::Kind::Cycle);
  EXPECT_EQ(std::set<std::string>(v.tasks.begin(), v.tasks.end()), (std::set<std::string>{"1", "2"}));
}

TEST(Validate, UnknownEndpointIsDangling) {
  WorkflowDag dag({{"1", 1, 0}, {"2", 1, 0}}, {{"1", "2", 1}, {"2", "99", 1}});
  auto report = validate(dag);
  EXPECT_EQ(report.count(Violation::Kind::DanglingEndpoint), 1u);
  EXPECT_EQ(report.violations.size(), 1u);
}

TEST(Validate, NegativeWeightsAndSelfLoopsAreReported) {
  WorkflowDag dag({{"a", -1, 0}, {"b", 1, 0}}, {{"b", "b", 1}});
  auto report = validate(dag);
  EXPECT_EQ(report.count(Violation::Kind::NegativeWeight), 1u);
  EXPECT_EQ(report.count(Violation::Kind::SelfLoop), 1u);
  EXPECT_THROW(require_valid(dag), std::invalid_argument);
}

TEST(TaskMemory, IsolatedTaskIsItsOwnMemory) {
  WorkflowDag dag({{"x", 1, 5}}, {});
  EXPECT_EQ(task_memory_requirement(dag, "x"), 5.0);
}

TEST(TaskMemory, TaskSixOfNineTaskExample) {
  auto dag = nine_task_dag(2.0);
  EXPECT_EQ(task_memory_requirement(dag, "6"), 6.0);
}

TEST(TaskMemory, MemorylessRelay) {
  WorkflowDag dag({{"a", 1, 0}, {"b", 1, 0}, {"c", 1, 0}}, {{"a", "b", 10}, {"b", "c", 10}});
  EXPECT_EQ(task_memory_requirement(dag, "b"), 20.0);
}

TEST(TaskMemory, NeverBelowOwnMemory) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto dag = random_dag(12, rng);
    for (TaskIndex u = 0; u < dag.size(); ++u) EXPECT_GE(task_memory_requirement(dag, u), dag.task(u).memory);
  }
}

TEST(TopologicalOrder, ChainIsForced) {
  auto dag = chain3();
  EXPECT_EQ(ids_of(dag, topological_order(dag)), (std::vector<std::string>{"1", "2", "3"}));
}

TEST(TopologicalOrder, DiamondBreaksTiesBySmallerId) {
  WorkflowDag dag({{"1", 1, 0}, {"2", 1, 0}, {"3", 1, 0}, {"4", 1, 0}},
                  {{"1", "3", 1}, {"1", "2", 1}, {"3", "4", 1}, {"2", "4", 1}});
  EXPECT_EQ(ids_of(dag, topological_order(dag)), (std::vector<std::string>{"1", "2", "3", "4"}));
}

TEST(TopologicalOrder, SingleTask) {
  WorkflowDag dag({{"only", 1, 0}}, {});
  EXPECT_EQ(ids_of(dag, topological_order(dag)), (std::vector<std::string>{"only"}));
}

TEST(TopologicalOrder, CycleErrorNamesTheCycle) {
  WorkflowDag dag({{"a", 1, 0}, {"b", 1, 0}, {"c", 1, 0}}, {{"a", "b", 1}, {"b", "c", 1}, {"c", "b", 1}});
  try {
    topological_order(dag);
    FAIL() << "expected a cycle error";
  } catch (const CycleError& e) {
    EXPECT_EQ(std::set<std::string>(e.cycle().begin(), e.cycle().end()), (std::set<std::string>{"b", "c"}));
  }
}

TEST(WorkflowDag, TasksAreIndexedInNaturalIdOrder) {
  WorkflowDag dag({{"t10", 1, 0}, {"t2", 1, 0}, {"t1", 1, 0}}, {});
  EXPECT_EQ(dag.task(0).id, "t1");
  EXPECT_EQ(dag.task(1).id, "t2");
  EXPECT_EQ(dag.task(2).id, "t10");
  EXPECT_TRUE(natural_less("v9", "v10"));
  EXPECT_FALSE(natural_less("v10", "v9"));
}

TEST(WorkflowDag, DuplicateTaskIdRejected) {
  EXPECT_THROW(WorkflowDag({{"a", 1, 0}, {"a", 2, 0}}, {}), std::invalid_argument);
}
