#pragma once

// Benchmark harness: both mappers on generated workflows, per-row results and
// the geometric mean of the makespan ratio (partitioning heuristic over the
// memory-driven baseline) on the rows where both succeed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "wfmap/cluster.hpp"
#include "wfmap/dot.hpp"
#include "wfmap/generator.hpp"
#include "wfmap/hetmem.hpp"
#include "wfmap/hetpart.hpp"
#include "wfmap/json_io.hpp"

namespace wfmap {

/// Average makespan ratio published for the original study, printed next to
/// ours for context only.
inline constexpr double kPublishedReferenceRatio = 0.41;

struct BenchConfig {
  std::vector<Family> families{std::begin(kAllFamilies), std::end(kAllFamilies)};
  std::vector<std::size_t> sizes{200, 1000};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<Preset> presets{Preset::Default};  // used round-robin over instances
  std::vector<double> bandwidths{1.0};
  bool fit_memories = true;
  HetPartOptions hetpart;
};

struct BenchRow {
  std::string family;
  std::size_t size = 0;
  std::uint64_t seed = 0;
  std::string preset;
  double bandwidth = 1.0;
  std::string algorithm;
  bool feasible = false;
  std::size_t blocks = 0;  // blocks in the mapping (k used)
  double makespan = std::numeric_limits<double>::quiet_NaN();
  double runtime_seconds = 0.0;
  std::string note;  // infeasibility reason
  std::vector<std::string> violations;
  std::vector<double> local_search_makespans;
};

struct InstanceKey {
  std::string family;
  std::size_t size;
  std::uint64_t seed;
  std::string preset;
  auto operator<=>(const InstanceKey&) const = default;
};

struct BenchReport {
  std::vector<BenchRow> rows;  // sorted by instance, bandwidth, algorithm
  std::map<double, double> geomean_ratio;          // per bandwidth
  std::map<double, std::size_t> compared_instances;  // per bandwidth

  /// Ratio per instance and bandwidth where both algorithms are feasible.
  std::map<InstanceKey, std::map<double, double>> ratios() const {
    std::map<std::tuple<InstanceKey, double>, std::pair<std::optional<double>, std::optional<double>>> pairs;
    for (const auto& r : rows) {
      if (!r.feasible) continue;
      auto& slot = pairs[{InstanceKey{r.family, r.size, r.seed, r.preset}, r.bandwidth}];
      (r.algorithm == "hetpart" ? slot.first : slot.second) = r.makespan;
    }
    std::map<InstanceKey, std::map<double, double>> out;
    for (const auto& [key, pr] : pairs)
      if (pr.first && pr.second && *pr.second > 0) out[std::get<0>(key)][std::get<1>(key)] = *pr.first / *pr.second;
    return out;
  }
};

inline double geometric_mean(const std::vector<double>& xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  double s = 0;
  for (double x : xs) s += std::log(x);
  return std::exp(s / static_cast<double>(xs.size()));
}

inline void aggregate(BenchReport& report) {
  std::map<double, std::vector<double>> per_bw;
  for (const auto& [key, by_bw] : report.ratios())
    for (const auto& [bw, ratio] : by_bw) per_bw[bw].push_back(ratio);
  report.geomean_ratio.clear();
  report.compared_instances.clear();
  for (const auto& [bw, xs] : per_bw) {
    report.geomean_ratio[bw] = geometric_mean(xs);
    report.compared_instances[bw] = xs.size();
  }
}

inline BenchRow run_one(const std::string& algorithm, const WorkflowDag& dag, const ComputingSystem& system,
                        const HetPartOptions& opt) {
  BenchRow row;
  row.algorithm = algorithm;
  auto start = std::chrono::steady_clock::now();
  auto outcome = algorithm == "hetpart" ? daghetpart(dag, system, opt) : daghetmem(dag, system);
  row.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (auto* r = std::get_if<MappingResult>(&outcome)) {
    row.feasible = true;
    row.blocks = r->blocks.size();
    row.makespan = r->makespan;
    row.violations = check_mapping(dag, system, *r);
    row.local_search_makespans = r->local_search_makespans;
  } else {
    row.note = std::get<Infeasible>(outcome).reason;
  }
  return row;
}

/// Runs every (family, size, seed) instance on its preset and every bandwidth.
/// `progress` is called after each instance when set.
template <class Progress = std::nullptr_t>
BenchReport run_bench(const BenchConfig& cfg, Progress progress = nullptr) {
  BenchReport report;
  std::size_t instance = 0;
  for (auto family : cfg.families) {
    for (auto size : cfg.sizes) {
      for (auto seed : cfg.seeds) {
        auto preset_kind = cfg.presets[instance++ % cfg.presets.size()];
        auto dag = generate_workflow(family, size, seed);
        for (double bw : cfg.bandwidths) {
          auto system = preset(preset_kind, bw);
          if (cfg.fit_memories) system = scale_memories_to_fit(system, dag);
          for (const char* algorithm : {"hetmem", "hetpart"}) {
            auto row = run_one(algorithm, dag, system, cfg.hetpart);
            row.family = std::string(family_name(family));
            row.size = size;
            row.seed = seed;
            row.preset = std::string(preset_name(preset_kind));
            row.bandwidth = bw;
            report.rows.push_back(std::move(row));
          }
        }
        if constexpr (!std::is_same_v<Progress, std::nullptr_t>) progress(report);
      }
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const BenchRow& a, const BenchRow& b) {
    return std::tie(a.family, a.size, a.seed, a.preset, a.bandwidth, a.algorithm) <
           std::tie(b.family, b.size, b.seed, b.preset, b.bandwidth, b.algorithm);
  });
  aggregate(report);
  return report;
}

inline Json report_to_json(const BenchReport& report) {
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row = {{"family", r.family},      {"size", r.size},           {"seed", r.seed},
                {"preset", r.preset},      {"bandwidth", r.bandwidth}, {"algorithm", r.algorithm},
                {"feasible", r.feasible},  {"blocks", r.blocks},       {"runtime_seconds", r.runtime_seconds},
                {"violations", r.violations}};
    row["makespan"] = r.feasible ? Json(r.makespan) : Json(nullptr);
    if (!r.note.empty()) row["note"] = r.note;
    rows.push_back(row);
  }
  Json agg = Json::array();
  for (const auto& [bw, ratio] : report.geomean_ratio) {
    agg.push_back({{"bandwidth", bw},
                   {"geomean_ratio", ratio},
                   {"compared_instances", report.compared_instances.at(bw)}});
  }
  return {{"format", kFormatVersion},
          {"rows", rows},
          {"aggregate", agg},
          {"published_reference_ratio", kPublishedReferenceRatio}};
}

inline void write_rows_csv(std::ostream& out, const BenchReport& report) {
  out << "family,size,seed,preset,bandwidth,algorithm,feasible,blocks,makespan,runtime_seconds\n";
  for (const auto& r : report.rows) {
    out << r.family << ',' << r.size << ',' << r.seed << ',' << r.preset << ',' << format_real(r.bandwidth) << ','
        << r.algorithm << ',' << (r.feasible ? 1 : 0) << ',' << r.blocks << ','
        << (r.feasible ? format_real(r.makespan) : std::string()) << ',' << r.runtime_seconds << '\n';
  }
}

/// One line per instance, one ratio column per bandwidth (empty when either
/// algorithm failed).
inline void write_ratios_csv(std::ostream& out, const BenchReport& report, const std::vector<double>& bandwidths) {
  out << "family,size,seed,preset";
  for (double bw : bandwidths) out << ",ratio_bw_" << format_real(bw);
  out << '\n';
  auto ratios = report.ratios();
  std::vector<InstanceKey> keys;
  for (const auto& r : report.rows) keys.push_back({r.family, r.size, r.seed, r.preset});
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (const auto& k : keys) {
    out << k.family << ',' << k.size << ',' << k.seed << ',' << k.preset;
    auto it = ratios.find(k);
    for (double bw : bandwidths) {
      out << ',';
      if (it != ratios.end() && it->second.count(bw)) out << format_real(it->second.at(bw));
    }
    out << '\n';
  }
}

}  // namespace wfmap
