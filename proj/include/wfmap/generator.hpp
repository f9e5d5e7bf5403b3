#pragma once

// Synthetic workflow families. Structure and weights come from a
// std::mt19937_64 stream, whose output sequence is fixed by the standard, and
// the integer draws below do not depend on library distributions, so a seed
// yields the same workflow on every platform.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wfmap/workflow.hpp"

namespace wfmap {

enum class Family { ForkJoin, ChainOfStages, Fanout, DiamondMesh };

inline constexpr Family kAllFamilies[] = {Family::ForkJoin, Family::ChainOfStages, Family::Fanout,
                                          Family::DiamondMesh};

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::ForkJoin: return "fork-join";
    case Family::ChainOfStages: return "chain-of-stages";
    case Family::Fanout: return "fanout";
    case Family::DiamondMesh: return "diamond-mesh";
  }
  return "?";
}

inline std::optional<Family> parse_family(std::string_view name) {
  for (auto f : kAllFamilies)
    if (family_name(f) == name) return f;
  return std::nullopt;
}

struct WeightRanges {
  int work_min = 1, work_max = 1000;
  int memory_min = 1, memory_max = 192;
  int volume_min = 1, volume_max = 10;
};

namespace detail {

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  // Uniform integer in [lo, hi] by rejection sampling.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw std::invalid_argument("empty range");
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(rng_());
    auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do x = rng_();
    while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

 private:
  std::mt19937_64 rng_;
};

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

inline EdgeList fork_join(std::size_t n, Draw& draw) {
  EdgeList edges;
  std::size_t current = 0, next = 1;
  while (next < n) {
    std::size_t remaining = n - next;
    if (remaining == 1) {
      edges.emplace_back(current, next);
      current = next++;
      continue;
    }
    auto width = std::min<std::size_t>(static_cast<std::size_t>(draw.between(2, 16)), remaining - 1);
    std::size_t join = next + width;
    for (std::size_t i = next; i < join; ++i) {
      edges.emplace_back(current, i);
      edges.emplace_back(i, join);
    }
    current = join;
    next = join + 1;
  }
  return edges;
}

inline EdgeList chain_of_stages(std::size_t n, Draw& draw) {
  EdgeList edges;
  std::vector<std::size_t> previous{0};
  std::size_t next = 1;
  while (next < n) {
    auto width = std::min<std::size_t>(static_cast<std::size_t>(draw.between(1, 4)), n - next);
    std::vector<std::size_t> layer;
    for (std::size_t i = 0; i < width; ++i, ++next) {
      auto parents = std::min<std::size_t>(static_cast<std::size_t>(draw.between(1, 2)), previous.size());
      auto first = static_cast<std::size_t>(draw.between(0, static_cast<std::int64_t>(previous.size()) - 1));
      for (std::size_t p = 0; p < parents; ++p) edges.emplace_back(previous[(first + p) % previous.size()], next);
      layer.push_back(next);
    }
    previous = std::move(layer);
  }
  return edges;
}

// One split task feeding parallel lanes of 1 to 3 tasks, all collected by a
// single gather task.
inline EdgeList fanout(std::size_t n, Draw& draw) {
  EdgeList edges;
  if (n == 1) return edges;
  const std::size_t sink = n - 1;
  std::size_t next = 1;
  if (next == sink) edges.emplace_back(0, sink);
  while (next < sink) {
    auto length = std::min<std::size_t>(static_cast<std::size_t>(draw.between(1, 3)), sink - next);
    edges.emplace_back(0, next);
    for (std::size_t i = 1; i < length; ++i) edges.emplace_back(next + i - 1, next + i);
    edges.emplace_back(next + length - 1, sink);
    next += length;
  }
  return edges;
}

inline EdgeList diamond_mesh(std::size_t n, Draw& /*unused*/) {
  EdgeList edges;
  auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  for (std::size_t v = 0; v < n; ++v) {
    if ((v % cols) + 1 < cols && v + 1 < n) edges.emplace_back(v, v + 1);
    if (v + cols < n) edges.emplace_back(v, v + cols);
  }
  return edges;
}

}  // namespace detail

inline WorkflowDag generate_workflow(Family family, std::size_t n, std::uint64_t seed, const WeightRanges& w = {}) {
  if (n == 0) throw std::invalid_argument("a workflow needs at least one task");
  detail::Draw draw(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(family) + 1);
  detail::EdgeList structure;
  switch (family) {
    case Family::ForkJoin: structure = detail::fork_join(n, draw); break;
    case Family::ChainOfStages: structure = detail::chain_of_stages(n, draw); break;
    case Family::Fanout: structure = detail::fanout(n, draw); break;
    case Family::DiamondMesh: structure = detail::diamond_mesh(n, draw); break;
  }
  std::vector<Task> tasks;
  tasks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double work = static_cast<double>(draw.between(w.work_min, w.work_max));
    double memory = static_cast<double>(draw.between(w.memory_min, w.memory_max));
    tasks.push_back({"t" + std::to_string(i), work, memory});
  }
  std::vector<EdgeSpec> edges;
  edges.reserve(structure.size());
  for (auto [a, b] : structure) {
    edges.push_back({tasks[a].id, tasks[b].id, static_cast<double>(draw.between(w.volume_min, w.volume_max))});
  }
  return WorkflowDag(std::move(tasks), std::move(edges));
}

}  // namespace wfmap
