#pragma once

#include <string>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/dot.hpp"
#include "wfmap/mapping.hpp"
#include "wfmap/memory.hpp"
#include "wfmap/workflow.hpp"

namespace wfmap {

/// Memory-driven baseline: walk a memory-efficient traversal of the whole
/// workflow and cut it into consecutive segments, each as long as the next
/// processor (by decreasing memory) can hold.
inline MappingOutcome daghetmem(const WorkflowDag& dag, const ComputingSystem& system) {
  require_valid(dag);
  if (dag.size() == 0) return Infeasible{"workflow has no tasks", std::nullopt};
  for (TaskIndex u = 0; u < dag.size(); ++u) {
    auto r = task_memory_requirement(dag, u);
    if (r > system.max_memory()) {
      return Infeasible{"task " + dag.task(u).id + " needs " + format_real(r) +
                            " memory, more than any processor offers (" + format_real(system.max_memory()) + ")",
                        u};
    }
  }
  std::vector<TaskIndex> all(dag.size());
  for (TaskIndex u = 0; u < dag.size(); ++u) all[u] = u;
  auto traversal = block_memory_requirement(dag, all).order;
  auto procs = sort_by_memory_desc(system);

  std::vector<PlacedBlock> placed;
  std::vector<char> in_block(dag.size(), 0);
  std::size_t cursor = 0;
  PlacedBlock current;
  double peak = 0.0;  // peak of the current segment
  double held = 0.0;  // files produced inside the segment that are still live
  auto close = [&] {
    for (TaskIndex v : current.members) in_block[v] = 0;
    current.order = current.members;
    placed.push_back(std::move(current));
    current = PlacedBlock{};
    ++cursor;
    peak = held = 0.0;
  };

  for (TaskIndex u : traversal) {
    double from_outside = 0, from_block = 0, out = 0;
    for (EdgeIndex e : dag.in_edges(u)) (in_block[dag.edge(e).tail] ? from_block : from_outside) += dag.edge(e).volume;
    for (EdgeIndex e : dag.out_edges(u)) out += dag.edge(e).volume;
    // Inputs from outside stay live from the segment start, which lifts every
    // earlier step as well.
    double step = dag.task(u).memory + from_outside + held + out;
    double next_peak = current.members.empty() ? step : std::max(peak + from_outside, step);
    if (!current.members.empty() && next_peak > system.processor(procs[cursor]).memory) {
      close();
      from_outside += from_block;
      from_block = 0;
      step = dag.task(u).memory + from_outside + out;
      next_peak = step;
    }
    if (cursor >= procs.size()) {
      return Infeasible{"no processor left for task " + dag.task(u).id + " after " + std::to_string(procs.size()) +
                            " segments",
                        u};
    }
    if (next_peak > system.processor(procs[cursor]).memory) {
      return Infeasible{"task " + dag.task(u).id + " does not fit processor " +
                            system.processor(procs[cursor]).id + ", the largest one left",
                        u};
    }
    if (current.members.empty()) current.proc = procs[cursor];
    current.members.push_back(u);
    in_block[u] = 1;
    peak = next_peak;
    held += out - from_block;
  }
  close();

  auto result = finalize_mapping(dag, system, std::move(placed), "hetmem");
  result.parts_requested = result.blocks.size();
  result.trace.push_back({"traversal", std::to_string(result.blocks.size()) + " segments", result.makespan});
  return result;
}

}  // namespace wfmap
