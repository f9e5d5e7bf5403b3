#pragma once

// Small random instances for property checks against the exhaustive oracles.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/quotient.hpp"
#include "wfmap/workflow.hpp"

namespace wfmap {

struct RandomDagOptions {
  double edge_probability = 0.3;
  double work_max = 10.0;
  double memory_max = 5.0;
  double volume_max = 5.0;
};

/// Random DAG on n tasks with edges only from lower to higher index.
inline WorkflowDag random_dag(std::size_t n, std::mt19937_64& rng, const RandomDagOptions& opt = {}) {
  std::uniform_real_distribution<double> work(1.0, opt.work_max), memory(0.0, opt.memory_max),
      volume(0.1, opt.volume_max), coin(0.0, 1.0);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < n; ++i) tasks.push_back({"v" + std::to_string(i), work(rng), memory(rng)});
  std::vector<EdgeSpec> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng) < opt.edge_probability) edges.push_back({tasks[i].id, tasks[j].id, volume(rng)});
  return WorkflowDag(std::move(tasks), std::move(edges));
}

/// A chain v0 -> ... -> v(len-1) plus outside producers feeding chain tasks
/// and outside consumers reading from them. The chain is tasks [0, len).
inline WorkflowDag random_chain_with_context(std::size_t len, std::mt19937_64& rng, const RandomDagOptions& opt = {}) {
  std::uniform_real_distribution<double> work(1.0, opt.work_max), memory(0.0, opt.memory_max),
      volume(0.1, opt.volume_max), coin(0.0, 1.0);
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < len; ++i) tasks.push_back({"c" + std::to_string(i), work(rng), memory(rng)});
  std::vector<EdgeSpec> edges;
  for (std::size_t i = 0; i + 1 < len; ++i) edges.push_back({tasks[i].id, tasks[i + 1].id, volume(rng)});
  std::size_t extra = 0;
  for (std::size_t i = 0; i < len; ++i) {
    if (coin(rng) < 0.4) {
      std::string id = "in" + std::to_string(extra++);
      tasks.push_back({id, work(rng), memory(rng)});
      edges.push_back({id, tasks[i].id, volume(rng)});
    }
    if (coin(rng) < 0.4) {
      std::string id = "out" + std::to_string(extra++);
      tasks.push_back({id, work(rng), memory(rng)});
      edges.push_back({tasks[i].id, id, volume(rng)});
    }
  }
  return WorkflowDag(std::move(tasks), std::move(edges));
}

/// Random computing system with `count` processors.
inline ComputingSystem random_system(std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> speed(0.5, 8.0), memory(10.0, 100.0), bw(0.1, 5.0);
  std::vector<Processor> procs;
  for (std::size_t i = 0; i < count; ++i)
    procs.push_back({"p-" + std::to_string(i), memory(rng), speed(rng), "p"});
  return ComputingSystem(std::move(procs), bw(rng));
}

/// Random acyclic quotient graph on n vertices (edges from lower to higher
/// id). Each vertex gets a distinct processor of `system` with probability
/// 3/4 and is left unassigned otherwise.
inline QuotientGraph random_quotient(std::size_t n, const ComputingSystem& system, std::mt19937_64& rng,
                                     double edge_probability = 0.35) {
  std::uniform_real_distribution<double> weight(0.5, 20.0), volume(0.1, 10.0), coin(0.0, 1.0);
  std::vector<ProcIndex> procs(system.size());
  for (std::size_t p = 0; p < procs.size(); ++p) procs[p] = static_cast<ProcIndex>(p);
  std::shuffle(procs.begin(), procs.end(), rng);
  QuotientGraph q;
  for (std::size_t i = 0; i < n; ++i) {
    QuotientVertex v;
    v.members = {static_cast<TaskIndex>(i)};
    v.weight = weight(rng);
    if (i < procs.size() && coin(rng) < 0.75) v.proc = procs[i];
    q.add_vertex(std::move(v));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng) < edge_probability)
        q.add_edge_volume(static_cast<VertexId>(i), static_cast<VertexId>(j), volume(rng));
  return q;
}

}  // namespace wfmap
