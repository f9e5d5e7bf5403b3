#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "wfmap/dot.hpp"
#include "wfmap/quotient.hpp"
#include "wfmap/workflow.hpp"

namespace wfmap {

enum class WeightKind { Work, MemoryRequirement };

struct PartitionRequest {
  std::size_t target_parts = 2;
  double epsilon = 0.1;  // max part weight <= (1 + epsilon) * total / k
  WeightKind weight = WeightKind::Work;
  std::uint64_t seed = 0;
};

struct SubPartition {
  std::vector<std::vector<TaskIndex>> parts;  // each sorted; parts in topological order
  double edge_cut = 0.0;
};

class PartitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sum of volumes of edges whose endpoints are in different parts. Edges
/// leaving the vertex set are ignored.
inline double edge_cut(const WorkflowDag& dag, const std::vector<std::vector<TaskIndex>>& parts) {
  std::unordered_map<TaskIndex, std::size_t> part_of;
  for (std::size_t p = 0; p < parts.size(); ++p)
    for (TaskIndex u : parts[p]) part_of[u] = p;
  double cut = 0.0;
  for (const auto& e : dag.edges()) {
    auto a = part_of.find(e.tail), b = part_of.find(e.head);
    if (a != part_of.end() && b != part_of.end() && a->second != b->second) cut += e.volume;
  }
  return cut;
}

struct PartitionCheck {
  bool ok = true;
  std::string message;
  std::vector<TaskIndex> cycle_witness;  // one task per part on the cycle
};

/// Coverage, disjointness, non-emptiness and acyclicity of the parts over
/// the given vertex set.
inline PartitionCheck check_subpartition(const WorkflowDag& dag, std::span<const TaskIndex> vertices,
                                         const std::vector<std::vector<TaskIndex>>& parts) {
  PartitionCheck r;
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::unordered_map<TaskIndex, std::uint32_t> part_of;
  for (TaskIndex u : vertices) part_of[u] = kUnset;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (parts[p].empty()) return {false, "part " + std::to_string(p) + " is empty", {}};
    for (TaskIndex u : parts[p]) {
      auto it = part_of.find(u);
      if (it == part_of.end()) return {false, "task " + dag.task(u).id + " is not in the input vertex set", {}};
      if (it->second != kUnset) return {false, "task " + dag.task(u).id + " appears in two parts", {}};
      it->second = static_cast<std::uint32_t>(p);
    }
  }
  for (const auto& [u, p] : part_of)
    if (p == kUnset) return {false, "task " + dag.task(u).id + " is not assigned to any part", {}};

  QuotientGraph q;
  for (const auto& members : parts) q.add_vertex(QuotientVertex{members, 0.0, {}, 0, 0.0});
  for (const auto& e : dag.edges()) {
    auto a = part_of.find(e.tail), b = part_of.find(e.head);
    if (a != part_of.end() && b != part_of.end() && a->second != b->second)
      q.add_edge_volume(a->second, b->second, e.volume);
  }
  auto acyclic = is_acyclic(q);
  if (!acyclic.acyclic) {
    r.ok = false;
    std::string parts_text;
    for (auto v : acyclic.cycle) {
      r.cycle_witness.push_back(parts[v].front());
      parts_text += (parts_text.empty() ? "" : " -> ") + std::string("part ") + std::to_string(v) + " (" +
                    dag.task(parts[v].front()).id + ")";
    }
    r.message = "quotient graph is cyclic: " + parts_text;
  }
  return r;
}

class Partitioner {
 public:
  virtual ~Partitioner() = default;
  /// Splits the subgraph induced by `vertices` into acyclic parts.
  virtual SubPartition partition(const WorkflowDag& dag, std::span<const TaskIndex> vertices,
                                 const PartitionRequest& request) const = 0;
  virtual std::string name() const = 0;
};

/// Cuts a depth-first topological order into k contiguous chunks of balanced
/// weight, then moves single vertices between neighbouring chunks while the
/// cut volume drops. Edges only ever run from a chunk to itself or a later
/// one, which keeps the quotient acyclic throughout.
class TopologicalChunkPartitioner final : public Partitioner {
 public:
  explicit TopologicalChunkPartitioner(int refinement_passes = 8) : passes_(refinement_passes) {}

  std::string name() const override { return "builtin"; }

  SubPartition partition(const WorkflowDag& dag, std::span<const TaskIndex> vertices,
                         const PartitionRequest& request) const override {
    const std::size_t n = vertices.size();
    const std::size_t k = request.target_parts;
    if (k == 0) throw PartitionError("target part count must be at least 1");
    if (k > n) {
      throw PartitionError("cannot split " + std::to_string(n) + " tasks into " + std::to_string(k) + " parts");
    }
    Local g(dag, vertices);
    auto order = g.topological_order();
    if (order.size() != n) throw PartitionError("input subgraph is cyclic");

    std::vector<double> weight(n);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i) {
      weight[i] = request.weight == WeightKind::Work ? dag.task(g.members[i]).work
                                                     : task_memory_requirement(dag, g.members[i]);
      total += weight[i];
    }
    if (!(total > 0)) {
      std::fill(weight.begin(), weight.end(), 1.0);
      total = static_cast<double>(n);
    }

    std::vector<std::uint32_t> part(n);
    chunk(order, weight, total, k, part);
    if (k > 1) refine(g, order, weight, total, k, request, part);

    SubPartition out;
    out.parts.resize(k);
    for (std::size_t i = 0; i < n; ++i) out.parts[part[i]].push_back(g.members[i]);
    for (const auto& e : g.edges)
      if (part[e.tail] != part[e.head]) out.edge_cut += e.volume;
    return out;
  }

 private:
  struct LocalEdge {
    std::uint32_t tail, head;
    double volume;
  };
  struct Local {
    std::vector<TaskIndex> members;  // sorted
    std::vector<LocalEdge> edges;
    std::vector<std::vector<std::uint32_t>> out, in;  // edge ids

    Local(const WorkflowDag& dag, std::span<const TaskIndex> vertices) : members(vertices.begin(), vertices.end()) {
      std::sort(members.begin(), members.end());
      members.erase(std::unique(members.begin(), members.end()), members.end());
      out.resize(members.size());
      in.resize(members.size());
      auto local = [&](TaskIndex u) -> std::int64_t {
        auto it = std::lower_bound(members.begin(), members.end(), u);
        return it != members.end() && *it == u ? it - members.begin() : -1;
      };
      for (std::uint32_t i = 0; i < members.size(); ++i) {
        for (EdgeIndex e : dag.out_edges(members[i])) {
          auto h = local(dag.edge(e).head);
          if (h < 0) continue;
          auto id = static_cast<std::uint32_t>(edges.size());
          edges.push_back({i, static_cast<std::uint32_t>(h), dag.edge(e).volume});
          out[i].push_back(id);
          in[h].push_back(id);
        }
      }
    }

    // Depth-first flavoured Kahn order: the smallest freshly ready child runs next.
    std::vector<std::uint32_t> topological_order() const {
      std::vector<std::uint32_t> indeg(members.size());
      std::vector<std::uint32_t> stack;
      for (std::uint32_t i = 0; i < members.size(); ++i) indeg[i] = static_cast<std::uint32_t>(in[i].size());
      for (auto i = static_cast<std::int64_t>(members.size()) - 1; i >= 0; --i)
        if (indeg[i] == 0) stack.push_back(static_cast<std::uint32_t>(i));
      std::vector<std::uint32_t> order;
      order.reserve(members.size());
      std::vector<std::uint32_t> fresh;
      while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        order.push_back(u);
        fresh.clear();
        for (auto e : out[u])
          if (--indeg[edges[e].head] == 0) fresh.push_back(edges[e].head);
        std::sort(fresh.begin(), fresh.end(), std::greater<>{});
        stack.insert(stack.end(), fresh.begin(), fresh.end());
      }
      return order;
    }
  };

  static void chunk(const std::vector<std::uint32_t>& order, const std::vector<double>& weight, double total,
                    std::size_t k, std::vector<std::uint32_t>& part) {
    const std::size_t n = order.size();
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + weight[order[i]];
    std::vector<std::size_t> bound(k + 1, 0);
    bound[k] = n;
    for (std::size_t c = 1; c < k; ++c) {
      double target = total * static_cast<double>(c) / static_cast<double>(k);
      auto i = static_cast<std::size_t>(std::lower_bound(prefix.begin(), prefix.end(), target) - prefix.begin());
      if (i > 0 && i <= n && target - prefix[i - 1] < prefix[i] - target) --i;
      i = std::clamp(i, bound[c - 1] + 1, n - (k - c));
      bound[c] = i;
    }
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t t = bound[c]; t < bound[c + 1]; ++t) part[order[t]] = static_cast<std::uint32_t>(c);
  }

  void refine(const Local& g, std::vector<std::uint32_t> visit, const std::vector<double>& weight, double total,
              std::size_t k, const PartitionRequest& request, std::vector<std::uint32_t>& part) const {
    const double cap = (1.0 + request.epsilon) * total / static_cast<double>(k);
    std::vector<double> load(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < part.size(); ++i) {
      load[part[i]] += weight[i];
      ++count[part[i]];
    }
    if (request.seed != 0) {
      std::mt19937_64 rng(request.seed);
      for (std::size_t i = visit.size(); i > 1; --i) std::swap(visit[i - 1], visit[rng() % i]);
    }
    for (int pass = 0; pass < passes_; ++pass) {
      bool moved = false;
      for (auto u : visit) {
        const auto p = part[u];
        if (count[p] == 1) continue;
        // volume to the current part, to the one before and to the one after
        double here = 0, before = 0, after = 0;
        bool can_down = p > 0, can_up = p + 1 < k;
        for (auto e : g.in[u]) {
          auto q = part[g.edges[e].tail];
          if (q == p) here += g.edges[e].volume;
          if (q + 1 == p) before += g.edges[e].volume;
          if (q >= p) can_down = false;
        }
        for (auto e : g.out[u]) {
          auto q = part[g.edges[e].head];
          if (q == p) here += g.edges[e].volume;
          if (q == p + 1) after += g.edges[e].volume;
          if (q < p + 1) can_up = false;
        }
        double gain_down = can_down && load[p - 1] + weight[u] <= cap ? before - here : 0.0;
        double gain_up = can_up && load[p + 1] + weight[u] <= cap ? after - here : 0.0;
        constexpr double kMinGain = 1e-12;
        if (gain_down <= kMinGain && gain_up <= kMinGain) continue;
        auto target = gain_down >= gain_up ? p - 1 : p + 1;
        load[p] -= weight[u];
        --count[p];
        load[target] += weight[u];
        ++count[target];
        part[u] = target;
        moved = true;
      }
      if (!moved) break;
    }
  }

  int passes_;
};

struct ExternalPartitionerConfig {
  std::filesystem::path executable;
  std::filesystem::path work_dir;  // defaults to the system temp directory
};

/// Runs an external program as `<exe> <in.dot> <k> <out.txt>`. The program
/// reads the subgraph in the workflow DOT format and writes one line
/// "<task id> <part id>" per task. Part ids are arbitrary integers; parts are
/// renumbered in topological order of the result.
class ExternalPartitioner final : public Partitioner {
 public:
  explicit ExternalPartitioner(ExternalPartitionerConfig config) : config_(std::move(config)) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_regular_file(config_.executable, ec)) {
      throw ConfigurationError("external partitioner not found: " + config_.executable.string());
    }
    auto perms = fs::status(config_.executable, ec).permissions();
    if ((perms & (fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec)) == fs::perms::none) {
      throw ConfigurationError("external partitioner is not executable: " + config_.executable.string());
    }
    if (config_.work_dir.empty()) config_.work_dir = fs::temp_directory_path();
  }

  std::string name() const override { return "external:" + config_.executable.filename().string(); }

  SubPartition partition(const WorkflowDag& dag, std::span<const TaskIndex> vertices,
                         const PartitionRequest& request) const override {
    if (request.target_parts == 0 || request.target_parts > vertices.size()) {
      throw PartitionError("cannot split " + std::to_string(vertices.size()) + " tasks into " +
                           std::to_string(request.target_parts) + " parts");
    }
    auto stem = "wfmap-part-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "-" +
                std::to_string(calls_++);
    auto in_path = config_.work_dir / (stem + ".dot");
    auto out_path = config_.work_dir / (stem + ".txt");
    {
      std::ofstream in(in_path);
      if (!in) throw PartitionError("cannot write " + in_path.string());
      std::vector<TaskIndex> subset(vertices.begin(), vertices.end());
      write_workflow(in, dag, &subset);
    }
    auto command = "\"" + config_.executable.string() + "\" \"" + in_path.string() + "\" " +
                   std::to_string(request.target_parts) + " \"" + out_path.string() + "\"";
    int status = std::system(command.c_str());
    std::filesystem::remove(in_path);
    if (status != 0) {
      std::filesystem::remove(out_path);
      throw PartitionError("external partitioner exited with status " + std::to_string(status));
    }
    std::ifstream result(out_path);
    if (!result) throw PartitionError("external partitioner produced no output file");
    std::stringstream text;
    text << result.rdbuf();
    result.close();
    std::filesystem::remove(out_path);
    return read_parts(dag, vertices, text.str());
  }

  /// Parses and validates the exchange file contents.
  static SubPartition read_parts(const WorkflowDag& dag, std::span<const TaskIndex> vertices,
                                 const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::pair<long long, TaskIndex>> labels;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::istringstream fields(line);
      std::string id;
      long long part = 0;
      if (!(fields >> id)) continue;
      if (!(fields >> part)) {
        throw PartitionError("external partitioner output line " + std::to_string(line_no) + ": missing part id");
      }
      auto u = dag.index_of(id);
      if (!u) throw PartitionError("external partitioner output names unknown task '" + id + "'");
      labels.emplace_back(part, *u);
    }
    std::sort(labels.begin(), labels.end());
    std::vector<std::vector<TaskIndex>> parts;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i == 0 || labels[i].first != labels[i - 1].first) parts.emplace_back();
      parts.back().push_back(labels[i].second);
    }
    for (auto& p : parts) std::sort(p.begin(), p.end());
    auto check = check_subpartition(dag, vertices, parts);
    if (!check.ok) throw PartitionError("external partitioner output rejected: " + check.message);
    // renumber parts along a topological order of the quotient
    QuotientGraph q;
    for (const auto& members : parts) q.add_vertex(QuotientVertex{members, 0.0, {}, 0, 0.0});
    std::unordered_map<TaskIndex, std::uint32_t> part_of;
    for (std::uint32_t p = 0; p < parts.size(); ++p)
      for (TaskIndex u : parts[p]) part_of[u] = p;
    SubPartition out;
    for (const auto& e : dag.edges()) {
      auto a = part_of.find(e.tail), b = part_of.find(e.head);
      if (a != part_of.end() && b != part_of.end() && a->second != b->second) {
        q.add_edge_volume(a->second, b->second, e.volume);
        out.edge_cut += e.volume;
      }
    }
    for (auto v : q.topological_order()) out.parts.push_back(parts[v]);
    return out;
  }

 private:
  ExternalPartitionerConfig config_;
  mutable std::uint64_t calls_ = 0;
};

inline std::shared_ptr<const Partitioner> register_external_partitioner(ExternalPartitionerConfig config) {
  return std::make_shared<ExternalPartitioner>(std::move(config));
}

inline std::shared_ptr<const Partitioner> builtin_partitioner() {
  static const auto instance = std::make_shared<TopologicalChunkPartitioner>();
  return instance;
}

}  // namespace wfmap
