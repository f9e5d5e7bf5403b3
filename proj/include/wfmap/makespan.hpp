#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/quotient.hpp"

namespace wfmap {

struct BottomWeights {
  std::vector<double> bottom;  // indexed by vertex id; NaN for dead slots
  double makespan = 0.0;
  double bandwidth = 1.0;
  std::vector<VertexId> critical_path;

  double at(VertexId v) const { return bottom.at(v); }
};

class CyclicQuotientError : public std::runtime_error {
 public:
  explicit CyclicQuotientError(std::vector<VertexId> cycle)
      : std::runtime_error("quotient graph is cyclic"), cycle_(std::move(cycle)) {}
  const std::vector<VertexId>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<VertexId> cycle_;
};

/// Speed of the processor a vertex runs on; unassigned vertices count as 1.
inline double vertex_speed(const QuotientGraph& q, VertexId v, const ComputingSystem& system) {
  const auto& p = q.vertex(v).proc;
  return p ? system.processor(*p).speed : 1.0;
}

inline std::vector<VertexId> critical_path(const BottomWeights& bw, const QuotientGraph& q);

/// Bottom weight of every vertex: own compute time plus the heaviest
/// (transfer + bottom weight) over its children. The makespan is the largest
/// bottom weight.
inline BottomWeights bottom_weights(const QuotientGraph& q, const ComputingSystem& system) {
  auto order = q.topological_order();
  if (order.size() != q.vertex_count()) throw CyclicQuotientError(is_acyclic(q).cycle);
  BottomWeights bw;
  bw.bandwidth = system.bandwidth();
  bw.bottom.assign(q.slot_count(), std::numeric_limits<double>::quiet_NaN());
  const double beta = system.bandwidth();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    double tail = 0.0;
    for (const auto& [c, vol] : q.children(v)) tail = std::max(tail, vol / beta + bw.bottom[c]);
    bw.bottom[v] = q.vertex(v).weight / vertex_speed(q, v, system) + tail;
  }
  for (VertexId v : order) bw.makespan = std::max(bw.makespan, bw.bottom[v]);
  bw.critical_path = critical_path(bw, q);
  return bw;
}

/// Argmax chain: start at the vertex with the largest bottom weight and keep
/// following the child that realizes the max. Ties go to the smaller id.
inline std::vector<VertexId> critical_path(const BottomWeights& bw, const QuotientGraph& q) {
  std::vector<VertexId> path;
  auto vs = q.vertices();
  if (vs.empty()) return path;
  VertexId cur = vs.front();
  for (VertexId v : vs)
    if (bw.bottom[v] > bw.bottom[cur]) cur = v;
  path.push_back(cur);
  while (!q.children(cur).empty()) {
    const auto& kids = q.children(cur);
    VertexId best = kids.front().first;
    double best_term = kids.front().second / bw.bandwidth + bw.bottom[best];
    for (const auto& [c, vol] : kids) {
      double term = vol / bw.bandwidth + bw.bottom[c];
      if (term > best_term) {
        best_term = term;
        best = c;
      }
    }
    cur = best;
    path.push_back(cur);
  }
  return path;
}

inline double makespan(const QuotientGraph& q, const ComputingSystem& system) {
  return bottom_weights(q, system).makespan;
}

}  // namespace wfmap
