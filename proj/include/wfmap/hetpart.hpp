#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/dot.hpp"
#include "wfmap/makespan.hpp"
#include "wfmap/mapping.hpp"
#include "wfmap/memory.hpp"
#include "wfmap/partitioner.hpp"
#include "wfmap/quotient.hpp"
#include "wfmap/workflow.hpp"

namespace wfmap {

struct HetPartOptions {
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  // Evaluate every stride-th part count (1, 1 + stride, ...) plus k itself.
  std::size_t stride = 1;
  std::shared_ptr<const Partitioner> partitioner;  // built-in when null
  bool local_search = true;
};

/// A block while Step 2 is shaping the partition.
struct WorkBlock {
  std::vector<TaskIndex> members;  // sorted
  double requirement = 0.0;
  double work = 0.0;
  std::optional<ProcIndex> proc;
};

inline WorkBlock make_work_block(const WorkflowDag& dag, std::vector<TaskIndex> members) {
  WorkBlock b;
  std::sort(members.begin(), members.end());
  b.requirement = block_memory_requirement(dag, members).peak;
  for (TaskIndex u : members) b.work += dag.task(u).work;
  b.members = std::move(members);
  return b;
}

/// Max-priority queue of blocks: larger memory requirement first, then larger
/// total work, then smaller first member.
class BlockQueue {
 public:
  void push(WorkBlock b) { heap_.push(std::move(b)); }
  WorkBlock pop() {
    auto b = heap_.top();
    heap_.pop();
    return b;
  }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Lower {
    bool operator()(const WorkBlock& a, const WorkBlock& b) const {
      if (a.requirement != b.requirement) return a.requirement < b.requirement;
      if (a.work != b.work) return a.work < b.work;
      return a.members.front() > b.members.front();
    }
  };
  std::priority_queue<WorkBlock, std::vector<WorkBlock>, Lower> heap_;
};

enum class FitStatus { Placed, FitsUnmapped, Split, Unsplittable };

struct FitResult {
  FitStatus status;
  std::optional<TaskIndex> task;  // set for Unsplittable
};

/// Places `block` on `proc` when it fits and `do_map` is set. A block that is
/// too large is bisected by memory requirement and the parts go back into the
/// queue. A block that cannot be split any further is reported.
inline FitResult fit_block(const WorkflowDag& dag, WorkBlock& block, BlockQueue& queue, const ComputingSystem& system,
                           ProcIndex proc, bool do_map, const Partitioner& partitioner, const HetPartOptions& opt) {
  if (block.requirement <= system.processor(proc).memory) {
    if (!do_map) return {FitStatus::FitsUnmapped, std::nullopt};
    block.proc = proc;
    return {FitStatus::Placed, std::nullopt};
  }
  if (block.members.size() == 1) return {FitStatus::Unsplittable, block.members.front()};
  PartitionRequest req{2, opt.epsilon, WeightKind::MemoryRequirement, opt.seed};
  auto parts = partitioner.partition(dag, block.members, req).parts;
  if (parts.size() <= 1) return {FitStatus::Unsplittable, block.members.front()};
  for (auto& p : parts) queue.push(make_work_block(dag, std::move(p)));
  return {FitStatus::Split, std::nullopt};
}

struct AssignmentOutcome {
  std::vector<WorkBlock> blocks;  // assigned and unassigned
  std::vector<TaskIndex> oversized;  // single tasks larger than the processor they were tried on
  std::size_t splits = 0;
};

/// Step 2: biggest block onto the free processor with the most memory; once
/// processors run out, the remaining blocks are cut down to the smallest
/// memory without being placed.
inline AssignmentOutcome biggest_assign(const WorkflowDag& dag, std::vector<std::vector<TaskIndex>> initial,
                                        const ComputingSystem& system, const Partitioner& partitioner,
                                        const HetPartOptions& opt) {
  AssignmentOutcome out;
  BlockQueue queue;
  for (auto& members : initial) queue.push(make_work_block(dag, std::move(members)));
  auto procs = sort_by_memory_desc(system);
  std::size_t head = 0;
  while (!queue.empty() && head < procs.size()) {
    auto block = queue.pop();
    auto r = fit_block(dag, block, queue, system, procs[head], true, partitioner, opt);
    switch (r.status) {
      case FitStatus::Placed:
        out.blocks.push_back(std::move(block));
        ++head;
        break;
      case FitStatus::Split:
        ++out.splits;
        break;
      case FitStatus::Unsplittable:
        // Left for Step 3, which may still merge it onto a larger block.
        out.oversized.push_back(*r.task);
        out.blocks.push_back(std::move(block));
        break;
      case FitStatus::FitsUnmapped:
        break;
    }
  }
  const ProcIndex smallest = procs.back();
  while (!queue.empty()) {
    auto block = queue.pop();
    auto r = fit_block(dag, block, queue, system, smallest, false, partitioner, opt);
    if (r.status == FitStatus::Split) {
      ++out.splits;
      continue;
    }
    if (r.status == FitStatus::Unsplittable) out.oversized.push_back(*r.task);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

struct MergeChoice {
  double makespan = std::numeric_limits<double>::infinity();
  std::optional<VertexId> partner;
  std::optional<VertexId> third;
};

namespace detail {

inline double vertex_requirement(const WorkflowDag& dag, QuotientGraph& q, VertexId v) {
  auto& data = q.vertex(v);
  if (std::isnan(data.requirement)) data.requirement = block_memory_requirement(dag, data.members).peak;
  return data.requirement;
}

}  // namespace detail

/// Best merge partner for unassigned vertex v among its neighbours in
/// `candidates` (indexed by vertex id). A merge that closes a 2-cycle is
/// retried with the third vertex absorbed. Every tentative merge is undone.
inline MergeChoice find_ms_opt_merge(const WorkflowDag& dag, const ComputingSystem& system, QuotientGraph& q,
                                     VertexId v, const std::vector<char>& candidates) {
  MergeChoice best;
  std::vector<VertexId> partners;
  for (const auto& [x, vol] : q.parents(v)) partners.push_back(x);
  for (const auto& [x, vol] : q.children(v)) partners.push_back(x);
  std::sort(partners.begin(), partners.end());
  partners.erase(std::unique(partners.begin(), partners.end()), partners.end());
  for (VertexId partner : partners) {
    if (partner >= candidates.size() || !candidates[partner]) continue;
    const auto proc = q.vertex(partner).proc;
    if (!proc) continue;
    VertexId m = q.merge(v, partner);
    VertexId top = m;
    std::optional<VertexId> third;
    if (auto cycle = q.find_cycle_through(m)) {
      if (cycle->size() != 2) {
        q.unmerge(m);
        continue;
      }
      third = (*cycle)[1];
      top = q.merge(m, *third);
      if (q.find_cycle_through(top)) {
        q.unmerge(top);
        q.unmerge(m);
        continue;
      }
    }
    q.vertex(top).proc = proc;
    if (detail::vertex_requirement(dag, q, top) <= system.processor(*proc).memory) {
      double mu = makespan(q, system);
      if (mu <= best.makespan) best = {mu, partner, third};
    }
    if (top != m) q.unmerge(top);
    q.unmerge(m);
  }
  return best;
}

struct MergeStats {
  std::size_t merges = 0;
  std::size_t reinsertions = 0;
  std::size_t examinations = 0;
};

/// Step 3: merge every unassigned vertex onto an assigned one, preferring
/// partners off the critical path. Returns the blocking task on failure.
inline std::optional<Infeasible> merge_unassigned_to_assigned(const WorkflowDag& dag, const ComputingSystem& system,
                                                              QuotientGraph& q, MergeStats* stats = nullptr) {
  MergeStats local;
  auto& st = stats ? *stats : local;
  std::vector<char> assigned(q.slot_count(), 0), pending(q.slot_count(), 0);
  std::deque<VertexId> todo;
  for (VertexId v : q.topological_order()) {
    if (q.vertex(v).proc) {
      assigned[v] = 1;
    } else {
      pending[v] = 1;
      todo.push_back(v);
    }
  }
  if (todo.empty()) return std::nullopt;
  auto on_path = [&] {
    std::vector<char> mark(q.slot_count(), 0);
    for (auto v : bottom_weights(q, system).critical_path) mark[v] = 1;
    return mark;
  };
  auto path = on_path();

  while (!todo.empty()) {
    VertexId v = todo.front();
    todo.pop_front();
    if (!q.alive(v) || !pending[v]) continue;
    pending[v] = 0;
    ++st.examinations;

    auto off_path = assigned;
    for (std::size_t i = 0; i < off_path.size() && i < path.size(); ++i)
      if (path[i]) off_path[i] = 0;
    auto choice = find_ms_opt_merge(dag, system, q, v, off_path);
    if (!choice.partner) choice = find_ms_opt_merge(dag, system, q, v, assigned);

    if (choice.partner) {
      auto proc = q.vertex(*choice.partner).proc;
      VertexId m = q.merge(v, *choice.partner);
      if (choice.third) m = q.merge(m, *choice.third);
      q.commit();
      auto& data = q.vertex(m);
      data.proc = proc;
      data.reinsert_counter = 0;
      detail::vertex_requirement(dag, q, m);
      assigned.resize(q.slot_count(), 0);
      pending.resize(q.slot_count(), 0);
      assigned[*choice.partner] = 0;
      if (choice.third) {
        assigned[*choice.third] = 0;
        pending[*choice.third] = 0;
      }
      assigned[m] = 1;
      path = on_path();
      ++st.merges;
      continue;
    }

    bool waits_on_neighbour = false;
    for (const auto* adj : {&q.parents(v), &q.children(v)})
      for (const auto& [x, vol] : *adj)
        if (x < pending.size() && pending[x]) waits_on_neighbour = true;
    auto& counter = q.vertex(v).reinsert_counter;
    if (waits_on_neighbour && counter <= 1) {
      ++counter;
      pending[v] = 1;
      todo.push_back(v);
      ++st.reinsertions;
      continue;
    }
    TaskIndex first = q.vertex(v).members.front();
    return Infeasible{"no memory-feasible merge for the block containing task " + dag.task(first).id + " (" +
                          std::to_string(q.vertex(v).members.size()) + " tasks)",
                      first};
  }
  return std::nullopt;
}

namespace detail {

// Makespan of a fully assigned quotient graph whose structure is fixed, so a
// single topological order serves every evaluation.
class FixedMakespan {
 public:
  FixedMakespan(const QuotientGraph& q, const ComputingSystem& system)
      : q_(q), system_(system), order_(q.topological_order()), bottom_(q.slot_count(), 0.0) {}

  double operator()() {
    double mu = 0;
    const double beta = system_.bandwidth();
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      double tail = 0;
      for (const auto& [c, vol] : q_.children(*it)) tail = std::max(tail, vol / beta + bottom_[c]);
      bottom_[*it] = q_.vertex(*it).weight / vertex_speed(q_, *it, system_) + tail;
      mu = std::max(mu, bottom_[*it]);
    }
    return mu;
  }

 private:
  const QuotientGraph& q_;
  const ComputingSystem& system_;
  std::vector<VertexId> order_;
  std::vector<double> bottom_;
};

inline bool improves(double candidate, double current) {
  return candidate < current - 1e-12 * std::max(1.0, std::abs(current));
}

}  // namespace detail

/// Step 4a: repeatedly execute the best makespan-improving swap of two
/// blocks' processors among the memory-feasible ones. Appends the makespan
/// after each executed swap to `history`.
inline std::size_t swap_until_best(const WorkflowDag& dag, QuotientGraph& q, const ComputingSystem& system,
                                   std::vector<double>& history) {
  auto vs = q.vertices();
  for (auto v : vs) detail::vertex_requirement(dag, q, v);
  detail::FixedMakespan eval(q, system);
  double current = eval();
  std::size_t swaps = 0;
  while (true) {
    double best = current;
    std::optional<std::pair<VertexId, VertexId>> pick;
    for (std::size_t i = 0; i < vs.size(); ++i) {
      for (std::size_t j = i + 1; j < vs.size(); ++j) {
        auto& a = q.vertex(vs[i]);
        auto& b = q.vertex(vs[j]);
        if (a.requirement > system.processor(*b.proc).memory || b.requirement > system.processor(*a.proc).memory)
          continue;
        std::swap(a.proc, b.proc);
        double mu = eval();
        std::swap(a.proc, b.proc);
        if (detail::improves(mu, best)) {
          best = mu;
          pick = {vs[i], vs[j]};
        }
      }
    }
    if (!pick) return swaps;
    std::swap(q.vertex(pick->first).proc, q.vertex(pick->second).proc);
    current = best;
    history.push_back(current);
    ++swaps;
  }
}

/// Step 4b: walk the critical path and move each block to the fastest idle
/// processor that is strictly faster and large enough.
inline std::size_t move_to_idle(const WorkflowDag& dag, QuotientGraph& q, const ComputingSystem& system,
                                std::vector<double>& history) {
  std::vector<char> busy(system.size(), 0);
  for (auto v : q.vertices()) busy[*q.vertex(v).proc] = 1;
  if (std::find(busy.begin(), busy.end(), 0) == busy.end()) return 0;
  auto procs = sort_by_memory_desc(system);
  std::vector<char> considered(q.slot_count(), 0);
  std::size_t moves = 0;
  while (true) {
    auto path = bottom_weights(q, system).critical_path;
    auto next = std::find_if(path.begin(), path.end(), [&](VertexId v) { return !considered[v]; });
    if (next == path.end()) return moves;
    VertexId v = *next;
    considered[v] = 1;
    auto& data = q.vertex(v);
    double need = detail::vertex_requirement(dag, q, v);
    double speed = system.processor(*data.proc).speed;
    std::optional<ProcIndex> target;
    for (ProcIndex p : procs) {
      const auto& cand = system.processor(p);
      if (busy[p] || cand.memory < need || cand.speed <= speed) continue;
      if (!target || cand.speed > system.processor(*target).speed) target = p;
    }
    if (!target) continue;
    busy[*data.proc] = 0;
    busy[*target] = 1;
    data.proc = target;
    history.push_back(makespan(q, system));
    ++moves;
  }
}

namespace detail {

inline QuotientGraph quotient_of(const WorkflowDag& dag, std::vector<WorkBlock>& blocks) {
  std::sort(blocks.begin(), blocks.end(),
            [](const WorkBlock& a, const WorkBlock& b) { return a.members.front() < b.members.front(); });
  std::vector<std::vector<TaskIndex>> members;
  for (const auto& b : blocks) members.push_back(b.members);
  auto q = build_quotient(dag, Partition::from_blocks(dag.size(), std::move(members)));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    auto& data = q.vertex(static_cast<VertexId>(i));
    data.proc = blocks[i].proc;
    data.requirement = blocks[i].requirement;
  }
  return q;
}

inline std::optional<Infeasible> oversized_task(const WorkflowDag& dag, const ComputingSystem& system) {
  for (TaskIndex u = 0; u < dag.size(); ++u) {
    auto r = task_memory_requirement(dag, u);
    if (r > system.max_memory()) {
      return Infeasible{"task " + dag.task(u).id + " needs " + format_real(r) +
                            " memory, more than any processor offers (" + format_real(system.max_memory()) + ")",
                        u};
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// Steps 2 to 4 starting from a given initial partition.
inline MappingOutcome daghetpart_from_partition(const WorkflowDag& dag, const ComputingSystem& system,
                                                std::vector<std::vector<TaskIndex>> initial,
                                                const HetPartOptions& opt = {}) {
  if (auto bad = detail::oversized_task(dag, system)) return *bad;
  auto partitioner = opt.partitioner ? opt.partitioner : builtin_partitioner();
  std::vector<StepEvent> trace;
  const auto parts = initial.size();
  trace.push_back({"partition", std::to_string(parts) + " parts", std::numeric_limits<double>::quiet_NaN()});

  auto step2 = biggest_assign(dag, std::move(initial), system, *partitioner, opt);
  std::size_t placed = 0;
  for (const auto& b : step2.blocks) placed += b.proc.has_value();
  auto q = detail::quotient_of(dag, step2.blocks);
  double mu = makespan(q, system);
  trace.push_back({"assign",
                   std::to_string(placed) + " of " + std::to_string(step2.blocks.size()) + " blocks placed, " +
                       std::to_string(step2.splits) + " splits",
                   mu});

  MergeStats stats;
  if (auto fail = merge_unassigned_to_assigned(dag, system, q, &stats)) return *fail;
  q.compact();
  mu = makespan(q, system);
  trace.push_back({"merge",
                   std::to_string(stats.merges) + " merges, " + std::to_string(stats.reinsertions) + " reinsertions",
                   mu});

  std::vector<double> history{mu};
  if (opt.local_search) {
    auto swaps = swap_until_best(dag, q, system, history);
    trace.push_back({"swap", std::to_string(swaps) + " swaps", history.back()});
    auto moves = move_to_idle(dag, q, system, history);
    trace.push_back({"move", std::to_string(moves) + " moves to idle processors", history.back()});
  }

  std::vector<PlacedBlock> blocks;
  for (auto v : q.vertices()) blocks.push_back({q.vertex(v).members, *q.vertex(v).proc, std::nullopt});
  auto result = finalize_mapping(dag, system, std::move(blocks), "hetpart");
  result.trace = std::move(trace);
  result.local_search_makespans = std::move(history);
  result.parts_requested = parts;
  return result;
}

/// Part counts evaluated by the sweep.
inline std::vector<std::size_t> sweep_part_counts(std::size_t k, std::size_t stride) {
  std::vector<std::size_t> out;
  if (k == 0) return out;
  stride = std::max<std::size_t>(stride, 1);
  for (std::size_t kp = 1; kp <= k; kp += stride) out.push_back(kp);
  if (out.back() != k) out.push_back(k);
  return out;
}

/// Full heuristic: partition into k' parts for each k' up to the processor
/// count, run Steps 2 to 4 for each, keep the smallest makespan (ties go to
/// the smaller k').
inline MappingOutcome daghetpart(const WorkflowDag& dag, const ComputingSystem& system,
                                 const HetPartOptions& opt = {}) {
  require_valid(dag);
  if (dag.size() == 0) return Infeasible{"workflow has no tasks", std::nullopt};
  if (auto bad = detail::oversized_task(dag, system)) return *bad;
  auto partitioner = opt.partitioner ? opt.partitioner : builtin_partitioner();
  std::vector<TaskIndex> all(dag.size());
  for (TaskIndex u = 0; u < dag.size(); ++u) all[u] = u;

  std::optional<MappingResult> best;
  std::optional<Infeasible> last_failure;
  std::size_t feasible_candidates = 0, tried = 0;
  for (auto kp : sweep_part_counts(std::min(system.size(), dag.size()), opt.stride)) {
    ++tried;
    PartitionRequest req{kp, opt.epsilon, WeightKind::Work, opt.seed};
    auto initial = partitioner->partition(dag, all, req).parts;
    auto outcome = daghetpart_from_partition(dag, system, std::move(initial), opt);
    if (auto* r = std::get_if<MappingResult>(&outcome)) {
      ++feasible_candidates;
      if (!best || detail::improves(r->makespan, best->makespan)) best = std::move(*r);
    } else {
      last_failure = std::get<Infeasible>(std::move(outcome));
    }
  }
  if (!best) return *last_failure;
  best->trace.push_back({"sweep",
                         std::to_string(feasible_candidates) + " of " + std::to_string(tried) +
                             " part counts feasible, best k'=" + std::to_string(best->parts_requested),
                         best->makespan});
  return std::move(*best);
}

}  // namespace wfmap
