#pragma once

// Exhaustive reference computations for small instances. They share no code
// path with the production algorithms they are used to check.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/memory.hpp"
#include "wfmap/quotient.hpp"

namespace wfmap {

/// Exact minimum peak memory over all topological orders of a block, by
/// dynamic programming over its downward-closed subsets.
inline double oracle_block_memory(const BlockView& block, const WorkflowDag& dag) {
  const std::size_t n = block.members.size();
  if (n == 0) throw std::invalid_argument("empty block");
  if (n > 12) throw std::invalid_argument("oracle_block_memory is limited to 12 tasks");

  auto local = [&](TaskIndex u) -> std::size_t {
    for (std::size_t i = 0; i < n; ++i)
      if (block.members[i] == u) return i;
    return n;
  };
  std::vector<std::uint32_t> parents_mask(n, 0);
  for (EdgeIndex e : block.internal) {
    parents_mask[local(dag.edge(e).head)] |= 1u << local(dag.edge(e).tail);
  }

  // Files held after exactly the tasks in `done` have run.
  auto live_after = [&](std::uint32_t done) {
    double live = 0;
    for (EdgeIndex e : block.internal) {
      bool tail_done = done & (1u << local(dag.edge(e).tail));
      bool head_done = done & (1u << local(dag.edge(e).head));
      if (tail_done && !head_done) live += dag.edge(e).volume;
    }
    for (EdgeIndex e : block.boundary_in)
      if (!(done & (1u << local(dag.edge(e).head)))) live += dag.edge(e).volume;
    for (EdgeIndex e : block.boundary_out)
      if (done & (1u << local(dag.edge(e).tail))) live += dag.edge(e).volume;
    return live;
  };
  // Running u keeps its inputs (already live) and adds all of its outputs.
  auto outputs = [&](std::size_t u) {
    double out = 0;
    for (EdgeIndex e : dag.out_edges(block.members[u])) out += dag.edge(e).volume;
    return out;
  };

  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(std::size_t{1} << n, kInf);
  best[0] = 0.0;
  for (std::uint32_t done = 0; done < full; ++done) {
    if (best[done] == kInf) continue;
    double live = live_after(done);
    for (std::size_t u = 0; u < n; ++u) {
      std::uint32_t bit = 1u << u;
      if ((done & bit) || (parents_mask[u] & ~done)) continue;
      double step = live + dag.task(block.members[u]).memory + outputs(u);
      double peak = std::max(best[done], step);
      best[done | bit] = std::min(best[done | bit], peak);
    }
  }
  return best[full];
}

/// Longest source-to-sink path (compute time plus transfer time) found by
/// enumerating every path of the quotient graph.
inline double oracle_makespan(const QuotientGraph& q, const ComputingSystem& system) {
  auto vs = q.vertices();
  if (vs.size() > 10) throw std::invalid_argument("oracle_makespan is limited to 10 vertices");
  auto cost = [&](VertexId v) {
    const auto& p = q.vertex(v).proc;
    return q.vertex(v).weight / (p ? system.processor(*p).speed : 1.0);
  };
  double best = 0.0;
  std::vector<VertexId> stack;
  std::function<void(VertexId, double)> walk = [&](VertexId v, double acc) {
    if (stack.size() > vs.size()) throw std::invalid_argument("quotient graph is cyclic");
    stack.push_back(v);
    acc += cost(v);
    if (q.children(v).empty()) best = std::max(best, acc);
    for (const auto& [c, vol] : q.children(v)) walk(c, acc + vol / system.bandwidth());
    stack.pop_back();
  };
  for (VertexId v : vs)
    if (q.parents(v).empty()) walk(v, 0.0);
  return best;
}

}  // namespace wfmap
