#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace wfmap {

using TaskIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

// Orders ids so that embedded digit runs compare numerically ("t2" < "t10").
inline bool natural_less(std::string_view a, std::string_view b) {
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t i0 = i, j0 = j;
      while (i < a.size() && is_digit(a[i])) ++i;
      while (j < b.size() && is_digit(b[j])) ++j;
      auto da = a.substr(i0, i - i0), db = b.substr(j0, j - j0);
      auto strip = [](std::string_view s) {
        std::size_t k = 0;
        while (k + 1 < s.size() && s[k] == '0') ++k;
        return s.substr(k);
      };
      auto sa = strip(da), sb = strip(db);
      if (sa.size() != sb.size()) return sa.size() < sb.size();
      if (sa != sb) return sa < sb;
      if (da.size() != db.size()) return da.size() < db.size();
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
  return a < b;
}

struct Task {
  std::string id;
  double work = 1.0;
  double memory = 0.0;
};

/// An edge as written in an input file: endpoints are task ids.
struct EdgeSpec {
  std::string tail;
  std::string head;
  double volume = 0.0;
};

struct Edge {
  TaskIndex tail;
  TaskIndex head;
  double volume;
};

class CycleError : public std::runtime_error {
 public:
  CycleError(const std::string& what, std::vector<std::string> cycle)
      : std::runtime_error(what), cycle_(std::move(cycle)) {}
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

struct Violation {
  enum class Kind { Cycle, DanglingEndpoint, NegativeWeight, SelfLoop, DuplicateEdge };
  Kind kind;
  std::string message;
  std::vector<std::string> tasks;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(Violation::Kind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
  }
  std::string summary() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.message;
    }
    return out;
  }
};

/// Weighted workflow DAG.
///
/// Tasks are re-indexed at construction in natural id order, so dense indices
/// double as the "ascending task id" tie-breaker used throughout. Edges that
/// cannot be represented (dangling endpoints, self loops, duplicates) are kept
/// aside and surface through validate(); they never enter the adjacency.
class WorkflowDag {
 public:
  WorkflowDag() = default;

  WorkflowDag(std::vector<Task> tasks, std::vector<EdgeSpec> edges) {
    std::sort(tasks.begin(), tasks.end(),
              [](const Task& a, const Task& b) { return natural_less(a.id, b.id); });
    tasks_ = std::move(tasks);
    index_.reserve(tasks_.size());
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (!index_.emplace(tasks_[i].id, static_cast<TaskIndex>(i)).second) {
        throw std::invalid_argument("duplicate task id '" + tasks_[i].id + "'");
      }
    }
    out_.resize(tasks_.size());
    in_.resize(tasks_.size());

    std::unordered_map<std::uint64_t, EdgeIndex> seen;
    seen.reserve(edges.size());
    for (auto& edge : edges) {
      auto t = index_of(edge.tail);
      auto h = index_of(edge.head);
      if (!t || !h) {
        rejected_.push_back({Violation::Kind::DanglingEndpoint,
                             "edge " + edge.tail + " -> " + edge.head + " references unknown task '" +
                                 (!t ? edge.tail : edge.head) + "'",
                             {!t ? edge.tail : edge.head}});
        continue;
      }
      if (*t == *h) {
        rejected_.push_back({Violation::Kind::SelfLoop, "self loop on task '" + edge.tail + "'", {edge.tail}});
        continue;
      }
      std::uint64_t key = (std::uint64_t{*t} << 32) | *h;
      if (!seen.emplace(key, static_cast<EdgeIndex>(edges_.size())).second) {
        rejected_.push_back({Violation::Kind::DuplicateEdge,
                             "duplicate edge " + edge.tail + " -> " + edge.head,
                             {edge.tail, edge.head}});
        continue;
      }
      auto e = static_cast<EdgeIndex>(edges_.size());
      edges_.push_back({*t, *h, edge.volume});
      out_[*t].push_back(e);
      in_[*h].push_back(e);
    }
    for (auto& list : out_) {
      std::sort(list.begin(), list.end(),
                [this](EdgeIndex a, EdgeIndex b) { return edges_[a].head < edges_[b].head; });
    }
    for (auto& list : in_) {
      std::sort(list.begin(), list.end(),
                [this](EdgeIndex a, EdgeIndex b) { return edges_[a].tail < edges_[b].tail; });
    }
  }

  std::size_t size() const noexcept { return tasks_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const Task& task(TaskIndex u) const { return tasks_.at(u); }
  const std::vector<Task>& tasks() const noexcept { return tasks_; }
  const Edge& edge(EdgeIndex e) const { return edges_.at(e); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const EdgeIndex> out_edges(TaskIndex u) const { return out_.at(u); }
  std::span<const EdgeIndex> in_edges(TaskIndex u) const { return in_.at(u); }

  std::optional<TaskIndex> index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  TaskIndex require(std::string_view id) const {
    auto idx = index_of(id);
    if (!idx) throw std::out_of_range("unknown task id '" + std::string(id) + "'");
    return *idx;
  }

  const std::vector<Violation>& rejected_edges() const noexcept { return rejected_; }

  double total_work() const {
    double s = 0;
    for (const auto& t : tasks_) s += t.work;
    return s;
  }

 private:
  std::vector<Task> tasks_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeIndex>> out_;
  std::vector<std::vector<EdgeIndex>> in_;
  std::unordered_map<std::string, TaskIndex> index_;
  std::vector<Violation> rejected_;
};

namespace detail {

// Kahn's algorithm with smallest-index-first tie-breaking. Returns the order
// (possibly partial when cyclic).
inline std::vector<TaskIndex> kahn_order(const WorkflowDag& dag) {
  std::vector<std::size_t> indeg(dag.size());
  for (const auto& e : dag.edges()) ++indeg[e.head];
  std::priority_queue<TaskIndex, std::vector<TaskIndex>, std::greater<>> ready;
  for (TaskIndex u = 0; u < dag.size(); ++u)
    if (indeg[u] == 0) ready.push(u);
  std::vector<TaskIndex> order;
  order.reserve(dag.size());
  while (!ready.empty()) {
    TaskIndex u = ready.top();
    ready.pop();
    order.push_back(u);
    for (EdgeIndex e : dag.out_edges(u)) {
      TaskIndex v = dag.edge(e).head;
      if (--indeg[v] == 0) ready.push(v);
    }
  }
  return order;
}

// Given a Kahn prefix that stopped early, walk predecessors inside the
// unprocessed remainder until a task repeats; the repeated stretch is a cycle.
inline std::vector<TaskIndex> cycle_witness(const WorkflowDag& dag, const std::vector<TaskIndex>& prefix) {
  std::vector<char> done(dag.size(), 0);
  for (TaskIndex u : prefix) done[u] = 1;
  TaskIndex start = 0;
  while (start < dag.size() && done[start]) ++start;
  std::vector<std::size_t> seen_at(dag.size(), SIZE_MAX);
  std::vector<TaskIndex> walk;
  TaskIndex u = start;
  while (seen_at[u] == SIZE_MAX) {
    seen_at[u] = walk.size();
    walk.push_back(u);
    for (EdgeIndex e : dag.in_edges(u)) {
      TaskIndex p = dag.edge(e).tail;
      if (!done[p]) {
        u = p;
        break;
      }
    }
  }
  std::vector<TaskIndex> cycle(walk.begin() + static_cast<std::ptrdiff_t>(seen_at[u]), walk.end());
  std::reverse(cycle.begin(), cycle.end());
  return cycle;
}

inline std::vector<std::string> names(const WorkflowDag& dag, const std::vector<TaskIndex>& ids) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TaskIndex u : ids) out.push_back(dag.task(u).id);
  return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

}  // namespace detail

/// Lists every invariant violation; an empty report means the DAG is usable.
inline ValidationReport validate(const WorkflowDag& dag) {
  ValidationReport report;
  for (const auto& t : dag.tasks()) {
    if (!(t.work >= 0) || !(t.memory >= 0)) {
      report.violations.push_back({Violation::Kind::NegativeWeight,
                                   "task '" + t.id + "' has a negative or non-finite weight", {t.id}});
    }
  }
  for (const auto& e : dag.edges()) {
    if (!(e.volume >= 0)) {
      const auto& a = dag.task(e.tail).id;
      const auto& b = dag.task(e.head).id;
      report.violations.push_back(
          {Violation::Kind::NegativeWeight, "edge " + a + " -> " + b + " has a negative volume", {a, b}});
    }
  }
  for (const auto& v : dag.rejected_edges()) report.violations.push_back(v);

  auto order = detail::kahn_order(dag);
  if (order.size() != dag.size()) {
    auto cycle = detail::names(dag, detail::cycle_witness(dag, order));
    report.violations.push_back(
        {Violation::Kind::Cycle, "cycle through tasks {" + detail::join(cycle, ", ") + "}", cycle});
  }
  return report;
}

inline void require_valid(const WorkflowDag& dag) {
  auto report = validate(dag);
  if (!report.ok()) throw std::invalid_argument("invalid workflow: " + report.summary());
}

/// r_u: incoming volumes + outgoing volumes + the task's own memory.
inline double task_memory_requirement(const WorkflowDag& dag, TaskIndex u) {
  if (u >= dag.size()) throw std::out_of_range("task index out of range");
  // Grouped as m + (inputs + outputs), the same association the block
  // memory sweep uses, so a singleton block reproduces r_u bit for bit.
  double in = 0.0, out = 0.0;
  for (EdgeIndex e : dag.in_edges(u)) in += dag.edge(e).volume;
  for (EdgeIndex e : dag.out_edges(u)) out += dag.edge(e).volume;
  return dag.task(u).memory + (in + out);
}

inline double task_memory_requirement(const WorkflowDag& dag, std::string_view id) {
  return task_memory_requirement(dag, dag.require(id));
}

/// Deterministic topological order; ties go to the smaller task id.
inline std::vector<TaskIndex> topological_order(const WorkflowDag& dag) {
  auto order = detail::kahn_order(dag);
  if (order.size() != dag.size()) {
    auto cycle = detail::names(dag, detail::cycle_witness(dag, order));
    throw CycleError("workflow contains a cycle through {" + detail::join(cycle, ", ") + "}", cycle);
  }
  return order;
}

}  // namespace wfmap
