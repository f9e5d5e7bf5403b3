#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/makespan.hpp"
#include "wfmap/memory.hpp"
#include "wfmap/quotient.hpp"
#include "wfmap/workflow.hpp"

namespace wfmap {

struct BlockReport {
  std::vector<TaskIndex> members;  // sorted
  std::vector<TaskIndex> order;    // traversal used for the memory figure
  double requirement = 0.0;
  ProcIndex proc = 0;
  double capacity = 0.0;
  bool fits = false;
  double work = 0.0;
};

struct StepEvent {
  std::string step;
  std::string detail;
  double makespan = 0.0;
};

struct MappingResult {
  std::string algorithm;
  std::vector<BlockReport> blocks;  // ordered by smallest member
  std::vector<std::uint32_t> block_of;
  double makespan = 0.0;
  std::vector<std::uint32_t> critical_path;  // block indices
  std::vector<StepEvent> trace;
  // Makespan after Step 3 followed by the value after every accepted swap or move.
  std::vector<double> local_search_makespans;
  std::size_t parts_requested = 0;
};

struct Infeasible {
  std::string reason;
  std::optional<TaskIndex> task;
};

using MappingOutcome = std::variant<MappingResult, Infeasible>;

inline bool feasible(const MappingOutcome& o) { return std::holds_alternative<MappingResult>(o); }

struct PlacedBlock {
  std::vector<TaskIndex> members;
  ProcIndex proc = 0;
  std::optional<std::vector<TaskIndex>> order;  // computed when absent
};

/// Builds the reported mapping: blocks in canonical order, per-block memory
/// report, makespan and critical path of the induced quotient graph.
inline MappingResult finalize_mapping(const WorkflowDag& dag, const ComputingSystem& system,
                                      std::vector<PlacedBlock> placed, std::string algorithm) {
  for (auto& b : placed) std::sort(b.members.begin(), b.members.end());
  std::sort(placed.begin(), placed.end(),
            [](const PlacedBlock& a, const PlacedBlock& b) { return a.members.front() < b.members.front(); });
  MappingResult r;
  r.algorithm = std::move(algorithm);
  std::vector<std::vector<TaskIndex>> blocks;
  for (auto& b : placed) {
    BlockReport rep;
    rep.members = b.members;
    auto view = BlockView::of(dag, b.members);
    auto traversal = b.order ? evaluate_order(view, dag, *b.order) : block_memory_requirement(view, dag);
    rep.order = std::move(traversal.order);
    rep.requirement = traversal.peak;
    rep.proc = b.proc;
    rep.capacity = system.processor(b.proc).memory;
    rep.fits = rep.requirement <= rep.capacity;
    for (TaskIndex u : b.members) rep.work += dag.task(u).work;
    r.blocks.push_back(std::move(rep));
    blocks.push_back(b.members);
  }
  auto partition = Partition::from_blocks(dag.size(), std::move(blocks));
  r.block_of = partition.block_of;
  auto q = build_quotient(dag, partition);
  for (std::size_t i = 0; i < r.blocks.size(); ++i) q.vertex(static_cast<VertexId>(i)).proc = r.blocks[i].proc;
  auto bw = bottom_weights(q, system);
  r.makespan = bw.makespan;
  r.critical_path.assign(bw.critical_path.begin(), bw.critical_path.end());
  return r;
}

/// Independent validation of a mapping against the workflow and the system.
/// Returns one message per violation; empty means valid.
inline std::vector<std::string> check_mapping(const WorkflowDag& dag, const ComputingSystem& system,
                                              const MappingResult& r) {
  std::vector<std::string> bad;
  const auto nb = r.blocks.size();
  if (r.block_of.size() != dag.size()) {
    bad.push_back("block_of has " + std::to_string(r.block_of.size()) + " entries for " +
                  std::to_string(dag.size()) + " tasks");
    return bad;
  }
  std::vector<int> seen(dag.size(), 0);
  for (std::size_t b = 0; b < nb; ++b) {
    if (r.blocks[b].members.empty()) bad.push_back("block " + std::to_string(b) + " is empty");
    for (TaskIndex u : r.blocks[b].members) {
      if (u >= dag.size()) {
        bad.push_back("block " + std::to_string(b) + " names an unknown task");
        continue;
      }
      ++seen[u];
      if (r.block_of[u] != b) bad.push_back("task " + dag.task(u).id + " has inconsistent block_of");
    }
  }
  for (TaskIndex u = 0; u < dag.size(); ++u)
    if (seen[u] != 1) bad.push_back("task " + dag.task(u).id + " is covered " + std::to_string(seen[u]) + " times");
  if (!bad.empty()) return bad;

  std::vector<int> used(system.size(), 0);
  for (std::size_t b = 0; b < nb; ++b) {
    auto p = r.blocks[b].proc;
    if (p >= system.size()) {
      bad.push_back("block " + std::to_string(b) + " uses an unknown processor");
      continue;
    }
    if (used[p]++) bad.push_back("processor " + system.processor(p).id + " holds more than one block");
  }

  // Peak memory of each block along its reported order, from per-edge live
  // intervals.
  for (std::size_t b = 0; b < nb; ++b) {
    const auto& blk = r.blocks[b];
    const auto n = blk.members.size();
    std::vector<long> pos(dag.size(), -1);
    bool valid_order = blk.order.size() == n;
    for (std::size_t t = 0; valid_order && t < n; ++t) {
      auto u = blk.order[t];
      if (u >= dag.size() || r.block_of[u] != b || pos[u] != -1) valid_order = false;
      else pos[u] = static_cast<long>(t);
    }
    if (!valid_order) {
      bad.push_back("block " + std::to_string(b) + " order is not a permutation of its members");
      continue;
    }
    std::vector<double> delta(n + 1, 0.0);
    auto live = [&](long from, long to, double vol) {
      delta[from] += vol;
      delta[to + 1] -= vol;
    };
    for (TaskIndex u : blk.members) {
      long t = pos[u];
      live(t, t, dag.task(u).memory);
      for (EdgeIndex e : dag.in_edges(u)) {
        long s = pos[dag.edge(e).tail];
        if (s < 0) live(0, t, dag.edge(e).volume);
        else if (s >= t) bad.push_back("block " + std::to_string(b) + " order is not topological");
      }
      for (EdgeIndex e : dag.out_edges(u)) {
        long h = pos[dag.edge(e).head];
        if (h < 0) live(t, static_cast<long>(n) - 1, dag.edge(e).volume);
        else live(t, h, dag.edge(e).volume);
      }
    }
    double cur = 0, peak = 0;
    for (std::size_t t = 0; t < n; ++t) {
      cur += delta[t];
      peak = std::max(peak, cur);
    }
    auto cap = system.processor(blk.proc).memory;
    if (peak > cap * (1 + 1e-9)) {
      bad.push_back("block " + std::to_string(b) + " needs " + std::to_string(peak) + " but processor " +
                    system.processor(blk.proc).id + " has " + std::to_string(cap));
    }
    if (std::abs(peak - blk.requirement) > 1e-9 * std::max(1.0, std::abs(peak))) {
      bad.push_back("block " + std::to_string(b) + " reports requirement " + std::to_string(blk.requirement) +
                    ", recomputed " + std::to_string(peak));
    }
  }

  // Block graph from the task edges; acyclicity by Kahn, makespan by longest path.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> succ(nb);
  std::vector<std::uint32_t> indeg(nb, 0);
  {
    std::vector<std::pair<std::uint64_t, double>> cut;
    for (const auto& e : dag.edges()) {
      auto a = r.block_of[e.tail], h = r.block_of[e.head];
      if (a != h) cut.emplace_back((std::uint64_t{a} << 32) | h, e.volume);
    }
    std::sort(cut.begin(), cut.end());
    for (std::size_t i = 0; i < cut.size();) {
      double sum = 0;
      std::size_t j = i;
      for (; j < cut.size() && cut[j].first == cut[i].first; ++j) sum += cut[j].second;
      auto a = static_cast<std::uint32_t>(cut[i].first >> 32), h = static_cast<std::uint32_t>(cut[i].first);
      succ[a].emplace_back(h, sum);
      ++indeg[h];
      i = j;
    }
  }
  std::vector<std::uint32_t> order;
  for (std::uint32_t b = 0; b < nb; ++b)
    if (indeg[b] == 0) order.push_back(b);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (auto [c, v] : succ[order[i]])
      if (--indeg[c] == 0) order.push_back(c);
  if (order.size() != nb) {
    bad.push_back("quotient graph of the mapping is cyclic");
    return bad;
  }
  std::vector<double> work(nb, 0.0);
  for (TaskIndex u = 0; u < dag.size(); ++u) work[r.block_of[u]] += dag.task(u).work;
  std::vector<double> bottom(nb, 0.0);
  double mu = 0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    double tail = 0;
    for (auto [c, v] : succ[*it]) tail = std::max(tail, v / system.bandwidth() + bottom[c]);
    bottom[*it] = work[*it] / system.processor(r.blocks[*it].proc).speed + tail;
    mu = std::max(mu, bottom[*it]);
  }
  if (std::abs(mu - r.makespan) > 1e-9 * std::max(1.0, std::abs(mu))) {
    bad.push_back("reported makespan " + std::to_string(r.makespan) + ", recomputed " + std::to_string(mu));
  }
  return bad;
}

}  // namespace wfmap
