#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "wfmap/workflow.hpp"

namespace wfmap {

using ProcIndex = std::uint32_t;

struct Processor {
  std::string id;
  double memory = 0.0;
  double speed = 0.0;
  std::string kind;
};

/// Processors sharing one uniform bandwidth.
class ComputingSystem {
 public:
  ComputingSystem(std::vector<Processor> processors, double bandwidth)
      : processors_(std::move(processors)), bandwidth_(bandwidth) {
    if (processors_.empty()) throw std::invalid_argument("computing system needs at least one processor");
    if (!(bandwidth_ > 0)) throw std::invalid_argument("bandwidth must be positive");
    for (const auto& p : processors_) {
      if (!(p.memory > 0) || !(p.speed > 0)) {
        throw std::invalid_argument("processor '" + p.id + "' needs positive memory and speed");
      }
    }
    std::set<std::string_view> ids;
    for (const auto& p : processors_)
      if (!ids.insert(p.id).second) throw std::invalid_argument("processor id '" + p.id + "' appears twice");
  }

  std::size_t size() const noexcept { return processors_.size(); }
  const Processor& processor(ProcIndex p) const { return processors_.at(p); }
  const std::vector<Processor>& processors() const noexcept { return processors_; }
  double bandwidth() const noexcept { return bandwidth_; }

  std::optional<ProcIndex> index_of(std::string_view id) const {
    for (std::size_t i = 0; i < processors_.size(); ++i)
      if (processors_[i].id == id) return static_cast<ProcIndex>(i);
    return std::nullopt;
  }

  double max_memory() const {
    double m = 0;
    for (const auto& p : processors_) m = std::max(m, p.memory);
    return m;
  }
  double min_memory() const {
    double m = processors_.front().memory;
    for (const auto& p : processors_) m = std::min(m, p.memory);
    return m;
  }
  double max_speed() const {
    double s = 0;
    for (const auto& p : processors_) s = std::max(s, p.speed);
    return s;
  }

  ComputingSystem with_bandwidth(double bandwidth) const { return ComputingSystem(processors_, bandwidth); }

 private:
  std::vector<Processor> processors_;
  double bandwidth_;
};

enum class Preset { Default, Small, Large, MoreHet, LessHet, NoHet };

inline std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "default") return Preset::Default;
  if (name == "small") return Preset::Small;
  if (name == "large") return Preset::Large;
  if (name == "morehet") return Preset::MoreHet;
  if (name == "lesshet") return Preset::LessHet;
  if (name == "nohet") return Preset::NoHet;
  return std::nullopt;
}

inline std::string_view preset_name(Preset p) {
  switch (p) {
    case Preset::Default: return "default";
    case Preset::Small: return "small";
    case Preset::Large: return "large";
    case Preset::MoreHet: return "morehet";
    case Preset::LessHet: return "lesshet";
    case Preset::NoHet: return "nohet";
  }
  return "default";
}

namespace detail {

struct MachineKind {
  const char* name;
  double speed;
  double memory;
};

// (name, speed, memory) of the six machine kinds, per heterogeneity level.
inline constexpr MachineKind kDefaultKinds[] = {
    {"local", 4, 16}, {"A1", 32, 32}, {"A2", 6, 64}, {"N1", 12, 16}, {"N2", 8, 8}, {"C2", 32, 192}};
inline constexpr MachineKind kMoreHetKinds[] = {
    {"local*", 2, 8}, {"A1*", 64, 64}, {"A2*", 3, 128}, {"N1*", 24, 8}, {"N2*", 4, 4}, {"C2*", 64, 384}};
inline constexpr MachineKind kLessHetKinds[] = {
    {"local'", 8, 64}, {"A1'", 16, 64}, {"A2'", 12, 128}, {"N1'", 12, 64}, {"N2'", 16, 32}, {"C2'", 16, 192}};

inline std::vector<Processor> replicate(std::span<const MachineKind> kinds, int copies) {
  std::vector<Processor> out;
  for (const auto& k : kinds) {
    for (int i = 0; i < copies; ++i) {
      out.push_back({std::string(k.name) + "-" + std::to_string(i), k.memory, k.speed, k.name});
    }
  }
  return out;
}

}  // namespace detail

inline ComputingSystem preset(Preset which, double bandwidth) {
  using namespace detail;
  switch (which) {
    case Preset::Default: return {replicate(kDefaultKinds, 6), bandwidth};
    case Preset::Small: return {replicate(kDefaultKinds, 3), bandwidth};
    case Preset::Large: return {replicate(kDefaultKinds, 10), bandwidth};
    case Preset::MoreHet: return {replicate(kMoreHetKinds, 6), bandwidth};
    case Preset::LessHet: return {replicate(kLessHetKinds, 6), bandwidth};
    case Preset::NoHet: {
      const MachineKind c2[] = {kDefaultKinds[5]};
      return {replicate(c2, 36), bandwidth};
    }
  }
  throw std::invalid_argument("unknown preset");
}

inline ComputingSystem preset(std::string_view name, double bandwidth) {
  auto p = parse_preset(name);
  if (!p) throw std::invalid_argument("unknown cluster preset '" + std::string(name) + "'");
  return preset(*p, bandwidth);
}

/// Descending memory; equal memories fall back to descending speed, then id.
inline std::vector<ProcIndex> sort_by_memory_desc(const ComputingSystem& system) {
  std::vector<ProcIndex> order(system.size());
  std::iota(order.begin(), order.end(), ProcIndex{0});
  std::stable_sort(order.begin(), order.end(), [&](ProcIndex a, ProcIndex b) {
    const auto& pa = system.processor(a);
    const auto& pb = system.processor(b);
    if (pa.memory != pb.memory) return pa.memory > pb.memory;
    if (pa.speed != pb.speed) return pa.speed > pb.speed;
    return natural_less(pa.id, pb.id);
  });
  return order;
}

/// Scales every memory by the same factor so the most demanding task fits the
/// largest processor. Systems that already fit are returned unchanged.
inline ComputingSystem scale_memories_to_fit(const ComputingSystem& system, const WorkflowDag& dag) {
  double need = 0;
  for (TaskIndex u = 0; u < dag.size(); ++u) need = std::max(need, task_memory_requirement(dag, u));
  double factor = need / system.max_memory();
  if (factor <= 1.0) return system;
  auto procs = system.processors();
  for (auto& p : procs) p.memory *= factor;
  // Rounding in the product must not leave the largest task just outside.
  for (auto& p : procs)
    if (p.memory < need && p.memory * (1 + 1e-12) >= need) p.memory = need;
  return {std::move(procs), system.bandwidth()};
}

}  // namespace wfmap
