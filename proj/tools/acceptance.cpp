// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wfmap/wfmap.hpp"

using namespace wfmap;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

struct Verdict {
  int id;
  std::string title;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  verdicts.push_back({id, title, pass, detail});
  std::printf("criterion %d: %s  %s  [%s]\n", id, pass ? "PASS" : "FAIL", title.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << x;
  return ss.str();
}

void criterion_worked_example() {
  std::vector<Processor> procs;
  for (int i = 0; i < 4; ++i) procs.push_back({"unit-" + std::to_string(i), 100.0, 1.0, "unit"});
  ComputingSystem system(procs, 1.0);
  QuotientGraph q;
  const double weights[] = {4, 1, 3, 1};
  for (int i = 0; i < 4; ++i) {
    QuotientVertex v;
    v.members = {static_cast<TaskIndex>(i)};
    v.weight = weights[i];
    v.proc = static_cast<ProcIndex>(i);
    q.add_vertex(v);
  }
  q.add_edge_volume(0, 1, 1);
  q.add_edge_volume(0, 2, 2);
  q.add_edge_volume(1, 2, 1);
  q.add_edge_volume(1, 3, 1);
  q.add_edge_volume(2, 3, 1);

  auto start = Clock::now();
  auto bw = bottom_weights(q, system);
  double elapsed = seconds_since(start);
  bool exact = bw.at(0) == 12 && bw.at(1) == 7 && bw.at(2) == 5 && bw.at(3) == 1 && bw.makespan == 12;
  report(1, "worked-example bottom weights", exact && elapsed < 1e-3,
         "b=(" + fmt(bw.at(0)) + "," + fmt(bw.at(1)) + "," + fmt(bw.at(2)) + "," + fmt(bw.at(3)) +
             ") mu=" + fmt(bw.makespan) + ", " + fmt(elapsed * 1e6, 3) + " us (limit 1 ms)");
}

void criterion_makespan_oracle() {
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  std::size_t mismatches = 0;
  double worst = 0;
  auto start = Clock::now();
  for (int trial = 0; trial < 500; ++trial) {
    auto system = random_system(10, rng);
    auto q = random_quotient(size(rng), system, rng);
    double fast = makespan(q, system);
    double slow = oracle_makespan(q, system);
    double rel = std::fabs(fast - slow) / std::max(1.0, std::fabs(slow));
    worst = std::max(worst, rel);
    if (!close_rel(fast, slow, 1e-9)) ++mismatches;
  }
  double elapsed = seconds_since(start);
  report(2, "makespan equals exhaustive path enumeration", mismatches == 0 && elapsed < 10,
         "500 quotients, " + std::to_string(mismatches) + " mismatches, worst rel diff " + fmt(worst) + ", " +
             fmt(elapsed, 3) + " s (limit 10 s)");
}

void criterion_memory_oracle() {
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<std::size_t> chain_len(1, 10), dag_size(2, 14), block_size(1, 10);
  std::size_t below = 0, chain_mismatch = 0, singleton_mismatch = 0, chains = 0, singletons = 0, general = 0;
  auto start = Clock::now();
  for (int trial = 0; trial < 500; ++trial) {
    switch (trial % 3) {
      case 0: {
        auto len = chain_len(rng);
        auto dag = random_chain_with_context(len, rng);
        std::vector<TaskIndex> members(len);
        for (std::size_t i = 0; i < len; ++i) members[i] = dag.require("c" + std::to_string(i));
        auto view = BlockView::of(dag, members);
        double peak = block_memory_requirement(view, dag).peak;
        double best = oracle_block_memory(view, dag);
        ++chains;
        if (!close_rel(peak, best, 1e-9)) ++chain_mismatch;
        if (peak < best * (1 - 1e-12)) ++below;
        break;
      }
      case 1: {
        auto dag = random_dag(dag_size(rng), rng);
        auto u = static_cast<TaskIndex>(std::uniform_int_distribution<std::size_t>(0, dag.size() - 1)(rng));
        auto view = BlockView::of(dag, {u});
        double peak = block_memory_requirement(view, dag).peak;
        ++singletons;
        if (peak != task_memory_requirement(dag, u)) ++singleton_mismatch;
        if (peak < oracle_block_memory(view, dag) * (1 - 1e-12)) ++below;
        break;
      }
      default: {
        auto dag = random_dag(dag_size(rng), rng);
        std::vector<TaskIndex> all(dag.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<TaskIndex>(i);
        std::shuffle(all.begin(), all.end(), rng);
        all.resize(std::min(all.size(), block_size(rng)));
        auto view = BlockView::of(dag, all);
        ++general;
        if (block_memory_requirement(view, dag).peak < oracle_block_memory(view, dag) * (1 - 1e-12)) ++below;
      }
    }
  }
  double elapsed = seconds_since(start);
  bool pass = below == 0 && chain_mismatch == 0 && singleton_mismatch == 0 && elapsed < 30;
  report(3, "block memory versus exact minimum", pass,
         std::to_string(chains) + " chains, " + std::to_string(singletons) + " singletons, " + std::to_string(general) +
             " general blocks; below oracle " + std::to_string(below) + ", chain mismatches " +
             std::to_string(chain_mismatch) + ", singleton mismatches " + std::to_string(singleton_mismatch) + ", " +
             fmt(elapsed, 3) + " s (limit 30 s)");
}

struct SuiteInstance {
  Family family;
  std::size_t size;
  std::uint64_t seed;
  Preset preset;
};

std::vector<SuiteInstance> feasibility_suite() {
  // 4 families x 3 sizes = 12 combinations; 17 seeds for the first eight and
  // 16 for the rest gives 200 instances.
  const std::size_t sizes[] = {50, 200, 1000};
  const Preset presets[] = {Preset::Default, Preset::Small, Preset::MoreHet};
  std::vector<SuiteInstance> out;
  std::size_t combo = 0;
  for (auto family : kAllFamilies) {
    for (auto size : sizes) {
      std::uint64_t seeds = combo++ < 8 ? 17 : 16;
      for (std::uint64_t s = 1; s <= seeds; ++s) out.push_back({family, size, s, presets[out.size() % 3]});
    }
  }
  return out;
}

struct RunRecord {
  BenchRow row;
  std::string json;  // result document, compared byte for byte across runs
};

RunRecord run_recorded(const std::string& algorithm, const WorkflowDag& dag, const ComputingSystem& system) {
  RunRecord rec;
  rec.row.algorithm = algorithm;
  auto start = Clock::now();
  auto outcome = algorithm == "hetpart" ? daghetpart(dag, system, {}) : daghetmem(dag, system);
  rec.row.runtime_seconds = seconds_since(start);
  if (auto* r = std::get_if<MappingResult>(&outcome)) {
    rec.row.feasible = true;
    rec.row.blocks = r->blocks.size();
    rec.row.makespan = r->makespan;
    rec.row.violations = check_mapping(dag, system, *r);
    rec.row.local_search_makespans = r->local_search_makespans;
  } else {
    rec.row.note = std::get<Infeasible>(outcome).reason;
  }
  rec.json = dump(result_to_json(dag, system, outcome, algorithm));
  return rec;
}

struct SuiteRun {
  std::vector<RunRecord> records;
  double seconds = 0;
};

SuiteRun run_suite(const std::vector<SuiteInstance>& suite, double bandwidth, bool progress) {
  SuiteRun run;
  auto start = Clock::now();
  std::size_t done = 0;
  for (const auto& inst : suite) {
    auto dag = generate_workflow(inst.family, inst.size, inst.seed);
    auto system = scale_memories_to_fit(preset(inst.preset, bandwidth), dag);
    for (const char* algorithm : {"hetmem", "hetpart"}) {
      auto rec = run_recorded(algorithm, dag, system);
      rec.row.family = std::string(family_name(inst.family));
      rec.row.size = inst.size;
      rec.row.seed = inst.seed;
      rec.row.preset = std::string(preset_name(inst.preset));
      rec.row.bandwidth = bandwidth;
      run.records.push_back(std::move(rec));
    }
    if (progress) std::fprintf(stderr, "\r  %zu/%zu instances", ++done, suite.size());
  }
  if (progress) std::fprintf(stderr, "\n");
  run.seconds = seconds_since(start);
  return run;
}

BenchReport as_report(const std::vector<const SuiteRun*>& runs) {
  BenchReport report;
  for (const auto* run : runs)
    for (const auto& rec : run->records) report.rows.push_back(rec.row);
  aggregate(report);
  return report;
}

std::vector<std::string> documents(const SuiteRun& run) {
  std::vector<std::string> out;
  for (const auto& rec : run.records) out.push_back(rec.json);
  return out;
}

}  // namespace

int main() {
  std::printf("acceptance run\n");
  criterion_worked_example();
  criterion_makespan_oracle();
  criterion_memory_oracle();

  auto suite = feasibility_suite();
  std::fprintf(stderr, "feasibility suite (%zu instances)\n", suite.size());
  auto first = run_suite(suite, 1.0, true);
  std::size_t feasible[2] = {0, 0}, violations = 0, both = 0;
  std::string first_violation;
  for (const auto& rec : first.records) {
    if (rec.row.feasible) ++feasible[rec.row.algorithm == "hetpart"];
    violations += rec.row.violations.size();
    if (first_violation.empty() && !rec.row.violations.empty())
      first_violation = "; first: " + rec.row.family + "/" + std::to_string(rec.row.size) + "/" +
                        std::to_string(rec.row.seed) + " " + rec.row.algorithm + ": " + rec.row.violations.front();
  }
  report(4, "feasible mappings pass independent checks", violations == 0 && first.seconds < 300,
         std::to_string(suite.size()) + " instances, feasible hetmem " + std::to_string(feasible[0]) + " hetpart " +
             std::to_string(feasible[1]) + ", violations " + std::to_string(violations) + ", " +
             fmt(first.seconds, 4) + " s (limit 300 s)" + first_violation);

  std::size_t sequences = 0, increases = 0;
  for (const auto& rec : first.records) {
    if (rec.row.algorithm != "hetpart" || !rec.row.feasible) continue;
    ++sequences;
    const auto& seq = rec.row.local_search_makespans;
    for (std::size_t i = 1; i < seq.size(); ++i)
      if (seq[i] > seq[i - 1]) ++increases;
  }
  report(5, "local search makespans never increase", increases == 0,
         std::to_string(sequences) + " sequences, " + std::to_string(increases) + " increases");

  auto suite_report = as_report({&first});
  for (const auto& [key, by_bw] : suite_report.ratios()) both += by_bw.size();
  double ratio = suite_report.geomean_ratio.count(1.0) ? suite_report.geomean_ratio.at(1.0) : NAN;
  report(6, "geometric mean makespan ratio below 0.9", both > 0 && ratio < 0.9,
         "ratio " + fmt(ratio) + " over " + std::to_string(both) + " instances feasible for both (published " +
             fmt(kPublishedReferenceRatio, 2) + ")");

  std::vector<SuiteInstance> fanout;
  for (std::uint64_t s = 1; s <= 3; ++s) fanout.push_back({Family::Fanout, 1000, s, Preset::Default});
  std::fprintf(stderr, "bandwidth trend\n");
  auto low = run_suite(fanout, 0.1, true);
  auto high = run_suite(fanout, 5.0, true);
  auto trend = as_report({&low, &high});
  double r_low = trend.geomean_ratio.count(0.1) ? trend.geomean_ratio.at(0.1) : NAN;
  double r_high = trend.geomean_ratio.count(5.0) ? trend.geomean_ratio.at(5.0) : NAN;
  report(7, "ratio at bandwidth 5 not above ratio at 0.1", r_high <= r_low,
         "bandwidth 0.1: " + fmt(r_low) + " over " +
             std::to_string(trend.compared_instances.count(0.1) ? trend.compared_instances.at(0.1) : 0) +
             ", bandwidth 5: " + fmt(r_high) + " over " +
             std::to_string(trend.compared_instances.count(5.0) ? trend.compared_instances.at(5.0) : 0));

  std::fprintf(stderr, "10000-task fanout\n");
  auto big_dag = generate_workflow(Family::Fanout, 10000, 1);
  auto big_system = scale_memories_to_fit(preset(Preset::Default, 1.0), big_dag);
  auto big = run_recorded("hetpart", big_dag, big_system);
  report(8, "10000-task fanout mapped in under 120 s",
         big.row.feasible && big.row.violations.empty() && big.row.runtime_seconds < 120,
         std::string(big.row.feasible ? "feasible" : "infeasible: " + big.row.note) + ", " +
             std::to_string(big.row.blocks) + " blocks, makespan " + fmt(big.row.makespan, 8) + ", violations " +
             std::to_string(big.row.violations.size()) + ", " + fmt(big.row.runtime_seconds, 3) + " s");

  std::fprintf(stderr, "determinism rerun\n");
  auto again = run_suite(suite, 1.0, true);
  auto low2 = run_suite(fanout, 0.1, false);
  auto high2 = run_suite(fanout, 5.0, false);
  auto big2 = run_recorded("hetpart", big_dag, big_system);
  std::size_t compared = 0, differing = 0;
  auto compare = [&](const SuiteRun& a, const SuiteRun& b) {
    auto fa = documents(a), fb = documents(b);
    compared += fa.size();
    if (fa.size() != fb.size()) {
      differing += std::max(fa.size(), fb.size());
      return;
    }
    for (std::size_t i = 0; i < fa.size(); ++i) differing += fa[i] != fb[i];
  };
  compare(first, again);
  compare(low, low2);
  compare(high, high2);
  ++compared;
  differing += big.json != big2.json;
  report(9, "identical result JSON on rerun", differing == 0,
         std::to_string(compared) + " result documents compared, " + std::to_string(differing) + " differ");

  std::size_t failed = 0;
  for (const auto& v : verdicts) failed += !v.pass;
  std::printf("%zu/%zu criteria passed\n", verdicts.size() - failed, verdicts.size());
  return failed == 0 ? 0 : 1;
}
