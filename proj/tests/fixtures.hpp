#pragma once

#include <string>
#include <vector>

#include "wfmap/wfmap.hpp"

namespace fixtures {

using namespace wfmap;

// Nine unit tasks, one source (1) and one target (9); task 6 has parents 3, 4
// and children 7, 8. The four-block partition below gives block weights
// 4, 1, 3, 1 and the quotient edges 1->2, 1->3 (two edges), 2->3, 2->4, 3->4.
inline WorkflowDag nine_task_dag(double memory6 = 0.0) {
  std::vector<Task> tasks;
  for (int i = 1; i <= 9; ++i) tasks.push_back({std::to_string(i), 1.0, i == 6 ? memory6 : 0.0});
  std::vector<EdgeSpec> edges = {{"1", "2", 1}, {"1", "3", 1}, {"1", "4", 1}, {"2", "5", 1},
                                 {"3", "6", 1}, {"4", "6", 1}, {"5", "7", 1}, {"5", "9", 1},
                                 {"6", "7", 1}, {"6", "8", 1}, {"7", "8", 1}, {"8", "9", 1}};
  return WorkflowDag(std::move(tasks), std::move(edges));
}

inline TaskIndex idx(const WorkflowDag& dag, const std::string& id) { return dag.require(id); }

inline std::vector<TaskIndex> ids(const WorkflowDag& dag, std::initializer_list<const char*> names) {
  std::vector<TaskIndex> out;
  for (const char* n : names) out.push_back(dag.require(n));
  return out;
}

inline std::vector<std::vector<TaskIndex>> nine_task_blocks(const WorkflowDag& dag) {
  return {ids(dag, {"1", "2", "3", "4"}), ids(dag, {"5"}), ids(dag, {"6", "7", "8"}), ids(dag, {"9"})};
}

inline ComputingSystem uniform_system(std::size_t count, double memory, double speed = 1.0, double bandwidth = 1.0) {
  std::vector<Processor> procs;
  for (std::size_t i = 0; i < count; ++i) procs.push_back({"u-" + std::to_string(i), memory, speed, "u"});
  return ComputingSystem(std::move(procs), bandwidth);
}

inline ComputingSystem system_of(std::vector<std::pair<double, double>> memory_speed, double bandwidth = 1.0) {
  std::vector<Processor> procs;
  for (std::size_t i = 0; i < memory_speed.size(); ++i)
    procs.push_back({"p-" + std::to_string(i), memory_speed[i].first, memory_speed[i].second, "p"});
  return ComputingSystem(std::move(procs), bandwidth);
}

inline QuotientGraph nine_task_quotient(const WorkflowDag& dag) {
  return build_quotient(dag, Partition::from_blocks(dag.size(), nine_task_blocks(dag)));
}

// Quotient graph with the given vertex weights and (from, to, volume) edges.
inline QuotientGraph make_quotient(const std::vector<double>& weights,
                                   const std::vector<std::tuple<VertexId, VertexId, double>>& edges) {
  QuotientGraph q;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    QuotientVertex v;
    v.members = {static_cast<TaskIndex>(i)};
    v.weight = weights[i];
    q.add_vertex(v);
  }
  for (auto [a, b, c] : edges) q.add_edge_volume(a, b, c);
  return q;
}

inline bool close(double a, double b, double tol = 1e-9) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace fixtures
