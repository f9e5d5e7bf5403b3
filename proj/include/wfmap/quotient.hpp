#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/workflow.hpp"

namespace wfmap {

using BlockId = std::uint32_t;
using VertexId = std::uint32_t;

/// Partition F of the tasks into non-empty blocks.
struct Partition {
  std::vector<BlockId> block_of;
  std::vector<std::vector<TaskIndex>> blocks;

  std::size_t size() const noexcept { return blocks.size(); }

  static Partition from_blocks(std::size_t task_count, std::vector<std::vector<TaskIndex>> blocks) {
    Partition p;
    constexpr auto kUnset = std::numeric_limits<BlockId>::max();
    p.block_of.assign(task_count, kUnset);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (blocks[b].empty()) throw std::invalid_argument("partition contains an empty block");
      std::sort(blocks[b].begin(), blocks[b].end());
      for (TaskIndex u : blocks[b]) {
        if (u >= task_count) throw std::invalid_argument("partition references an unknown task");
        if (p.block_of[u] != kUnset) throw std::invalid_argument("task assigned to two blocks");
        p.block_of[u] = static_cast<BlockId>(b);
      }
    }
    for (auto b : p.block_of)
      if (b == kUnset) throw std::invalid_argument("partition does not cover every task");
    p.blocks = std::move(blocks);
    return p;
  }

  static Partition from_assignment(const std::vector<BlockId>& block_of) {
    BlockId count = 0;
    for (auto b : block_of) count = std::max<BlockId>(count, b + 1);
    std::vector<std::vector<TaskIndex>> blocks(count);
    for (std::size_t u = 0; u < block_of.size(); ++u) blocks[block_of[u]].push_back(static_cast<TaskIndex>(u));
    return from_blocks(block_of.size(), std::move(blocks));
  }
};

struct QuotientVertex {
  std::vector<TaskIndex> members;  // sorted
  double weight = 0.0;
  std::optional<ProcIndex> proc;
  int reinsert_counter = 0;
  // Block memory requirement, NaN until someone computes it.
  double requirement = std::numeric_limits<double>::quiet_NaN();

  bool operator==(const QuotientVertex& o) const {
    auto same_req = (std::isnan(requirement) && std::isnan(o.requirement)) || requirement == o.requirement;
    return members == o.members && weight == o.weight && proc == o.proc && reinsert_counter == o.reinsert_counter &&
           same_req;
  }
};

using Adjacency = std::vector<std::pair<VertexId, double>>;  // sorted by vertex id

/// Quotient graph with a merge journal. Merges are undone in LIFO order and
/// restore the previous graph exactly, including vertex ids.
class QuotientGraph {
 public:
  QuotientGraph() = default;

  VertexId add_vertex(QuotientVertex v) {
    if (!journal_.empty()) throw std::logic_error("cannot add vertices while merges are pending");
    std::sort(v.members.begin(), v.members.end());
    slots_.push_back({std::move(v), true, {}, {}});
    ++alive_count_;
    return static_cast<VertexId>(slots_.size() - 1);
  }

  void add_edge_volume(VertexId from, VertexId to, double volume) {
    if (from == to) throw std::invalid_argument("quotient self edge");
    add_to(slots_.at(from).out, to, volume);
    add_to(slots_.at(to).in, from, volume);
  }

  std::size_t slot_count() const noexcept { return slots_.size(); }
  std::size_t vertex_count() const noexcept { return alive_count_; }
  bool alive(VertexId v) const { return v < slots_.size() && slots_[v].alive; }

  std::vector<VertexId> vertices() const {
    std::vector<VertexId> out;
    out.reserve(alive_count_);
    for (VertexId v = 0; v < slots_.size(); ++v)
      if (slots_[v].alive) out.push_back(v);
    return out;
  }

  const QuotientVertex& vertex(VertexId v) const { return checked(v).data; }
  QuotientVertex& vertex(VertexId v) { return checked(v).data; }
  const Adjacency& children(VertexId v) const { return checked(v).out; }
  const Adjacency& parents(VertexId v) const { return checked(v).in; }

  double edge_volume(VertexId from, VertexId to) const {
    const auto& out = checked(from).out;
    auto it = find(out, to);
    return it != out.end() && it->first == to ? it->second : 0.0;
  }

  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& s : slots_)
      if (s.alive) n += s.out.size();
    return n;
  }

  double total_weight() const {
    double w = 0;
    for (const auto& s : slots_)
      if (s.alive) w += s.data.weight;
    return w;
  }

  /// Contracts a and b into a new vertex; parallel edges are summed and edges
  /// between a and b disappear.
  VertexId merge(VertexId a, VertexId b) {
    if (a == b) throw std::invalid_argument("cannot merge a vertex with itself");
    checked(a);
    checked(b);
    auto m = static_cast<VertexId>(slots_.size());
    Slot merged;
    merged.alive = true;
    std::merge(slots_[a].data.members.begin(), slots_[a].data.members.end(), slots_[b].data.members.begin(),
               slots_[b].data.members.end(), std::back_inserter(merged.data.members));
    merged.data.weight = slots_[a].data.weight + slots_[b].data.weight;
    merged.out = combine(slots_[a].out, slots_[b].out, a, b);
    merged.in = combine(slots_[a].in, slots_[b].in, a, b);
    for (const auto& [x, vol] : merged.out) {
      erase(slots_[x].in, a);
      erase(slots_[x].in, b);
      add_to(slots_[x].in, m, vol);
    }
    for (const auto& [x, vol] : merged.in) {
      erase(slots_[x].out, a);
      erase(slots_[x].out, b);
      add_to(slots_[x].out, m, vol);
    }
    slots_[a].alive = false;
    slots_[b].alive = false;
    slots_.push_back(std::move(merged));
    --alive_count_;
    journal_.push_back({m, a, b});
    return m;
  }

  /// Reverts the most recent merge, which must be the one that produced m.
  void unmerge(VertexId m) {
    if (journal_.empty() || journal_.back().merged != m) {
      throw std::logic_error("vertex is not the latest merge product");
    }
    auto [merged, a, b] = journal_.back();
    journal_.pop_back();
    auto& ms = slots_[merged];
    for (const auto& [x, vol] : ms.out) erase(slots_[x].in, merged);
    for (const auto& [x, vol] : ms.in) erase(slots_[x].out, merged);
    for (VertexId part : {a, b}) {
      for (const auto& [x, vol] : slots_[part].out)
        if (x != a && x != b) add_to(slots_[x].in, part, vol);
      for (const auto& [x, vol] : slots_[part].in)
        if (x != a && x != b) add_to(slots_[x].out, part, vol);
      slots_[part].alive = true;
    }
    slots_.pop_back();
    ++alive_count_;
  }

  bool is_merge_product(VertexId v) const {
    return std::any_of(journal_.begin(), journal_.end(), [v](const auto& j) { return j.merged == v; });
  }
  std::size_t pending_merges() const noexcept { return journal_.size(); }

  /// Makes every pending merge permanent; unmerge is no longer possible.
  void commit() noexcept { journal_.clear(); }

  /// Drops dead slots (after commit). Returns the old-id -> new-id map, with
  /// nullopt for dead ids.
  std::vector<std::optional<VertexId>> compact() {
    if (!journal_.empty()) throw std::logic_error("cannot compact while merges are pending");
    std::vector<std::optional<VertexId>> remap(slots_.size());
    std::vector<Slot> kept;
    kept.reserve(alive_count_);
    for (VertexId v = 0; v < slots_.size(); ++v) {
      if (slots_[v].alive) {
        remap[v] = static_cast<VertexId>(kept.size());
        kept.push_back(std::move(slots_[v]));
      }
    }
    for (auto& s : kept) {
      for (auto* adj : {&s.out, &s.in}) {
        for (auto& [x, vol] : *adj) x = *remap[x];
        std::sort(adj->begin(), adj->end());
      }
    }
    slots_ = std::move(kept);
    return remap;
  }

  /// Shortest cycle through v (v first), if one exists.
  std::optional<std::vector<VertexId>> find_cycle_through(VertexId v) const {
    checked(v);
    constexpr auto kNone = std::numeric_limits<VertexId>::max();
    std::vector<VertexId> pred(slots_.size(), kNone);
    std::deque<VertexId> frontier;
    for (const auto& [c, vol] : slots_[v].out) {
      if (pred[c] == kNone) {
        pred[c] = v;
        frontier.push_back(c);
      }
    }
    while (!frontier.empty()) {
      auto x = frontier.front();
      frontier.pop_front();
      if (x == v) {
        std::vector<VertexId> cycle;
        for (auto y = pred[v]; y != v; y = pred[y]) cycle.push_back(y);
        cycle.push_back(v);
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      for (const auto& [c, vol] : slots_[x].out) {
        if (pred[c] == kNone) {
          pred[c] = x;
          frontier.push_back(c);
        }
      }
    }
    return std::nullopt;
  }

  /// Kahn order of the alive vertices, smallest id first among ready ones.
  /// Shorter than vertex_count() iff the graph is cyclic.
  std::vector<VertexId> topological_order() const {
    std::vector<std::uint32_t> indeg(slots_.size(), 0);
    std::vector<VertexId> ready;
    for (VertexId v = 0; v < slots_.size(); ++v) {
      if (!slots_[v].alive) continue;
      indeg[v] = static_cast<std::uint32_t>(slots_[v].in.size());
      if (indeg[v] == 0) ready.push_back(v);
    }
    std::vector<VertexId> order;
    order.reserve(alive_count_);
    std::make_heap(ready.begin(), ready.end(), std::greater<>{});
    while (!ready.empty()) {
      std::pop_heap(ready.begin(), ready.end(), std::greater<>{});
      auto v = ready.back();
      ready.pop_back();
      order.push_back(v);
      for (const auto& [c, vol] : slots_[v].out) {
        if (--indeg[c] == 0) {
          ready.push_back(c);
          std::push_heap(ready.begin(), ready.end(), std::greater<>{});
        }
      }
    }
    return order;
  }

  /// Structural equality: same alive ids, vertex data and edges.
  bool operator==(const QuotientGraph& o) const {
    if (vertices() != o.vertices()) return false;
    for (auto v : vertices()) {
      if (!(slots_[v].data == o.slots_[v].data)) return false;
      if (slots_[v].out != o.slots_[v].out || slots_[v].in != o.slots_[v].in) return false;
    }
    return true;
  }

 private:
  struct Slot {
    QuotientVertex data;
    bool alive = false;
    Adjacency out;
    Adjacency in;
  };
  struct JournalEntry {
    VertexId merged, a, b;
  };

  const Slot& checked(VertexId v) const {
    if (!alive(v)) throw std::out_of_range("no such quotient vertex");
    return slots_[v];
  }
  Slot& checked(VertexId v) {
    if (!alive(v)) throw std::out_of_range("no such quotient vertex");
    return slots_[v];
  }

  static Adjacency::const_iterator find(const Adjacency& adj, VertexId v) {
    return std::lower_bound(adj.begin(), adj.end(), v, [](const auto& p, VertexId x) { return p.first < x; });
  }
  static void add_to(Adjacency& adj, VertexId v, double vol) {
    auto it = std::lower_bound(adj.begin(), adj.end(), v, [](const auto& p, VertexId x) { return p.first < x; });
    if (it != adj.end() && it->first == v)
      it->second += vol;
    else
      adj.insert(it, {v, vol});
  }
  static void erase(Adjacency& adj, VertexId v) {
    auto it = std::lower_bound(adj.begin(), adj.end(), v, [](const auto& p, VertexId x) { return p.first < x; });
    if (it != adj.end() && it->first == v) adj.erase(it);
  }
  static Adjacency combine(const Adjacency& x, const Adjacency& y, VertexId a, VertexId b) {
    Adjacency out;
    out.reserve(x.size() + y.size());
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
      std::pair<VertexId, double> next;
      if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
        next = x[i++];
      } else if (i == x.size() || y[j].first < x[i].first) {
        next = y[j++];
      } else {
        next = {x[i].first, x[i].second + y[j].second};
        ++i;
        ++j;
      }
      if (next.first != a && next.first != b) out.push_back(next);
    }
    return out;
  }

  std::vector<Slot> slots_;
  std::vector<JournalEntry> journal_;
  std::size_t alive_count_ = 0;
};

/// Vertex i of the result corresponds to partition block i.
inline QuotientGraph build_quotient(const WorkflowDag& dag, const Partition& partition) {
  QuotientGraph q;
  for (const auto& members : partition.blocks) {
    QuotientVertex v;
    v.members = members;
    for (TaskIndex u : members) v.weight += dag.task(u).work;
    q.add_vertex(std::move(v));
  }
  std::vector<std::tuple<BlockId, BlockId, double>> cut;
  for (const auto& e : dag.edges()) {
    auto a = partition.block_of.at(e.tail), b = partition.block_of.at(e.head);
    if (a != b) cut.emplace_back(a, b, e.volume);
  }
  std::sort(cut.begin(), cut.end(),
            [](const auto& x, const auto& y) { return std::tie(std::get<0>(x), std::get<1>(x)) < std::tie(std::get<0>(y), std::get<1>(y)); });
  for (std::size_t i = 0; i < cut.size();) {
    auto [a, b, vol] = cut[i];
    double sum = 0;
    std::size_t j = i;
    for (; j < cut.size() && std::get<0>(cut[j]) == a && std::get<1>(cut[j]) == b; ++j) sum += std::get<2>(cut[j]);
    q.add_edge_volume(a, b, sum);
    i = j;
  }
  return q;
}

struct AcyclicityReport {
  bool acyclic = true;
  std::vector<VertexId> cycle;  // shortest cycle found when cyclic
};

inline AcyclicityReport is_acyclic(const QuotientGraph& q) {
  auto order = q.topological_order();
  if (order.size() == q.vertex_count()) return {};
  std::vector<char> ordered(q.slot_count(), 0);
  for (auto v : order) ordered[v] = 1;
  AcyclicityReport report{false, {}};
  for (auto v : q.vertices()) {
    if (ordered[v]) continue;
    auto c = q.find_cycle_through(v);
    if (c && (report.cycle.empty() || c->size() < report.cycle.size())) report.cycle = std::move(*c);
    if (report.cycle.size() == 2) break;
  }
  return report;
}

}  // namespace wfmap
