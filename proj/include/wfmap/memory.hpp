#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "wfmap/workflow.hpp"

namespace wfmap {

/// A block of tasks together with the classification of every edge incident
/// to it. Members are kept sorted by task index.
struct BlockView {
  std::vector<TaskIndex> members;
  std::vector<EdgeIndex> internal;
  std::vector<EdgeIndex> boundary_in;
  std::vector<EdgeIndex> boundary_out;

  bool contains(TaskIndex u) const { return std::binary_search(members.begin(), members.end(), u); }

  std::size_t local_index(TaskIndex u) const {
    auto it = std::lower_bound(members.begin(), members.end(), u);
    if (it == members.end() || *it != u) throw std::out_of_range("task is not a block member");
    return static_cast<std::size_t>(it - members.begin());
  }

  static BlockView of(const WorkflowDag& dag, std::vector<TaskIndex> members) {
    BlockView b;
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    b.members = std::move(members);
    for (TaskIndex u : b.members) {
      for (EdgeIndex e : dag.out_edges(u)) {
        (b.contains(dag.edge(e).head) ? b.internal : b.boundary_out).push_back(e);
      }
      for (EdgeIndex e : dag.in_edges(u)) {
        if (!b.contains(dag.edge(e).tail)) b.boundary_in.push_back(e);
      }
    }
    return b;
  }
};

struct TraversalResult {
  std::vector<TaskIndex> order;
  double peak = 0.0;
  std::size_t peak_step = 0;
};

namespace detail {

// Position of each member in `order`, validating that the order is a
// topological order of the block.
inline std::vector<std::size_t> order_positions(const BlockView& block, const WorkflowDag& dag,
                                                std::span<const TaskIndex> order) {
  if (order.size() != block.members.size()) throw std::invalid_argument("order does not cover the block");
  constexpr auto kUnset = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> pos(block.members.size(), kUnset);
  for (std::size_t t = 0; t < order.size(); ++t) {
    auto i = block.local_index(order[t]);
    if (pos[i] != kUnset) throw std::invalid_argument("order repeats a task");
    pos[i] = t;
  }
  for (EdgeIndex e : block.internal) {
    const auto& edge = dag.edge(e);
    if (pos[block.local_index(edge.tail)] >= pos[block.local_index(edge.head)]) {
      throw std::invalid_argument("order is not topological: " + dag.task(edge.tail).id + " -> " +
                                  dag.task(edge.head).id);
    }
  }
  return pos;
}

// Per-member volumes needed by the incremental sweep.
struct LocalVolumes {
  std::vector<double> memory;
  std::vector<double> out_internal;
  std::vector<double> in_internal;
  std::vector<double> in_boundary;
  std::vector<double> out_boundary;
  std::vector<std::vector<std::uint32_t>> children;
  std::vector<std::uint32_t> parent_count;
  double boundary_in_total = 0.0;

  LocalVolumes(const BlockView& block, const WorkflowDag& dag) {
    auto n = block.members.size();
    memory.resize(n);
    out_internal.assign(n, 0.0);
    in_internal.assign(n, 0.0);
    in_boundary.assign(n, 0.0);
    out_boundary.assign(n, 0.0);
    children.resize(n);
    parent_count.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) memory[i] = dag.task(block.members[i]).memory;
    for (EdgeIndex e : block.internal) {
      const auto& edge = dag.edge(e);
      auto t = block.local_index(edge.tail), h = block.local_index(edge.head);
      out_internal[t] += edge.volume;
      in_internal[h] += edge.volume;
      children[t].push_back(static_cast<std::uint32_t>(h));
      ++parent_count[h];
    }
    for (EdgeIndex e : block.boundary_in) {
      const auto& edge = dag.edge(e);
      in_boundary[block.local_index(edge.head)] += edge.volume;
      boundary_in_total += edge.volume;
    }
    for (EdgeIndex e : block.boundary_out) {
      const auto& edge = dag.edge(e);
      out_boundary[block.local_index(edge.tail)] += edge.volume;
    }
  }

  // Change of the live set once member i has run.
  double growth(std::size_t i) const { return out_internal[i] + out_boundary[i] - in_internal[i] - in_boundary[i]; }
  // Memory held during member i's own step on top of what was already live.
  double step_extra(std::size_t i) const { return memory[i] + out_internal[i] + out_boundary[i]; }

  // Peak over a local order: boundary inputs are live from block start,
  // outputs from production; inputs are released after the consumer's step.
  std::pair<double, std::size_t> sweep(std::span<const std::uint32_t> local_order) const {
    double live = boundary_in_total;
    double peak = 0.0;
    std::size_t peak_step = 0;
    for (std::size_t t = 0; t < local_order.size(); ++t) {
      auto i = local_order[t];
      live += out_internal[i] + out_boundary[i];
      double resident = memory[i] + live;
      if (t == 0 || resident > peak) {
        peak = resident;
        peak_step = t;
      }
      live -= in_internal[i] + in_boundary[i];
    }
    return {peak, peak_step};
  }
};

}  // namespace detail

/// Memory resident while executing order[t]: the task's own memory plus every
/// live file. Internal files live from their producer's step through their
/// consumer's step, boundary inputs from block start through their consumer's
/// step, boundary outputs from production to block end.
inline double resident_memory_at_step(const BlockView& block, const WorkflowDag& dag,
                                      std::span<const TaskIndex> order, std::size_t t) {
  if (t >= order.size()) throw std::out_of_range("step index out of range");
  auto pos = detail::order_positions(block, dag, order);
  auto at = [&](TaskIndex u) { return pos[block.local_index(u)]; };
  double internal = 0.0, in = 0.0, out = 0.0;
  for (EdgeIndex e : block.internal) {
    const auto& edge = dag.edge(e);
    if (at(edge.tail) <= t && t <= at(edge.head)) internal += edge.volume;
  }
  for (EdgeIndex e : block.boundary_in) {
    if (at(dag.edge(e).head) >= t) in += dag.edge(e).volume;
  }
  for (EdgeIndex e : block.boundary_out) {
    if (at(dag.edge(e).tail) <= t) out += dag.edge(e).volume;
  }
  return dag.task(order[t]).memory + ((in + out) + internal);
}

/// Peak of a given order under the same accounting, in linear time.
inline TraversalResult evaluate_order(const BlockView& block, const WorkflowDag& dag,
                                      std::span<const TaskIndex> order) {
  if (block.members.empty()) throw std::invalid_argument("empty block");
  detail::order_positions(block, dag, order);
  detail::LocalVolumes vols(block, dag);
  std::vector<std::uint32_t> local(order.size());
  for (std::size_t t = 0; t < order.size(); ++t) local[t] = static_cast<std::uint32_t>(block.local_index(order[t]));
  auto [peak, step] = vols.sweep(local);
  return {std::vector<TaskIndex>(order.begin(), order.end()), peak, step};
}

namespace detail {

// Greedy list order: among all ready members, run the one that grows the live
// set least (ties: smaller step footprint, then smaller index).
inline std::vector<std::uint32_t> greedy_growth_order(const LocalVolumes& v) {
  auto n = v.memory.size();
  using Key = std::tuple<double, double, std::uint32_t>;
  std::priority_queue<Key, std::vector<Key>, std::greater<>> ready;
  auto remaining = v.parent_count;
  for (std::uint32_t i = 0; i < n; ++i)
    if (remaining[i] == 0) ready.emplace(v.growth(i), v.step_extra(i), i);
  std::vector<std::uint32_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto i = std::get<2>(ready.top());
    ready.pop();
    order.push_back(i);
    for (auto c : v.children[i])
      if (--remaining[c] == 0) ready.emplace(v.growth(c), v.step_extra(c), c);
  }
  return order;
}

// Depth-first order: children made ready by the last step run first, the one
// freeing the most volume on top.
inline std::vector<std::uint32_t> depth_first_order(const LocalVolumes& v) {
  auto n = v.memory.size();
  auto better = [&v](std::uint32_t a, std::uint32_t b) {
    return std::tuple(v.growth(a), v.step_extra(a), a) < std::tuple(v.growth(b), v.step_extra(b), b);
  };
  auto remaining = v.parent_count;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t i = 0; i < n; ++i)
    if (remaining[i] == 0) stack.push_back(i);
  // best candidate last so it is popped first
  std::sort(stack.begin(), stack.end(), [&](auto a, auto b) { return better(b, a); });
  std::vector<std::uint32_t> order;
  order.reserve(n);
  std::vector<std::uint32_t> fresh;
  while (!stack.empty()) {
    auto i = stack.back();
    stack.pop_back();
    order.push_back(i);
    fresh.clear();
    for (auto c : v.children[i])
      if (--remaining[c] == 0) fresh.push_back(c);
    std::sort(fresh.begin(), fresh.end(), [&](auto a, auto b) { return better(b, a); });
    stack.insert(stack.end(), fresh.begin(), fresh.end());
  }
  return order;
}

}  // namespace detail

/// Upper bound on the minimum peak memory of a block: the better of a
/// depth-first and a greedy list traversal.
inline TraversalResult block_memory_requirement(const BlockView& block, const WorkflowDag& dag) {
  if (block.members.empty()) throw std::invalid_argument("empty block");
  detail::LocalVolumes vols(block, dag);
  auto dfs = detail::depth_first_order(vols);
  if (dfs.size() != block.members.size()) throw std::invalid_argument("block induces a cyclic subgraph");
  auto greedy = detail::greedy_growth_order(vols);
  auto [p1, s1] = vols.sweep(dfs);
  auto [p2, s2] = vols.sweep(greedy);
  const auto& best = p2 < p1 ? greedy : dfs;
  TraversalResult r;
  r.order.reserve(best.size());
  for (auto i : best) r.order.push_back(block.members[i]);
  r.peak = p2 < p1 ? p2 : p1;
  r.peak_step = p2 < p1 ? s2 : s1;
  return r;
}

inline TraversalResult block_memory_requirement(const WorkflowDag& dag, std::vector<TaskIndex> members) {
  return block_memory_requirement(BlockView::of(dag, std::move(members)), dag);
}

}  // namespace wfmap
