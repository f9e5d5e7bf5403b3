// Command-line front end: map, bench, check, generate, preset.
//
// Exit status: 0 success (feasible mapping / valid result), 1 a checked
// result has violations, 2 bad input or usage, 3 no feasible mapping.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfmap/wfmap.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;
constexpr int kInfeasible = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

wfmap::ComputingSystem load_cluster(const std::string& cluster_file, const std::string& preset_name,
                                    std::optional<double> bandwidth) {
  if (!cluster_file.empty()) {
    auto system = wfmap::load_system(cluster_file);
    return bandwidth ? system.with_bandwidth(*bandwidth) : system;
  }
  auto p = wfmap::parse_preset(preset_name);
  if (!p) throw InputError("unknown preset '" + preset_name + "' (default, small, large, morehet, lesshet, nohet)");
  return wfmap::preset(*p, bandwidth.value_or(1.0));
}

template <class T>
std::vector<T> split_list(const std::string& text, T (*convert)(const std::string&)) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(convert(item));
  }
  if (out.empty()) throw InputError("empty list '" + text + "'");
  return out;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw InputError("not a number: '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InputError("not a number: '" + s + "'");
  }
}

std::size_t to_size(const std::string& s) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used != s.size()) throw InputError("not an integer: '" + s + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw InputError("not an integer: '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s) { return to_size(s); }

wfmap::Family to_family(const std::string& s) {
  auto f = wfmap::parse_family(s);
  if (!f) throw InputError("unknown family '" + s + "' (fork-join, chain-of-stages, fanout, diamond-mesh)");
  return *f;
}

wfmap::Preset to_preset(const std::string& s) {
  auto p = wfmap::parse_preset(s);
  if (!p) throw InputError("unknown preset '" + s + "'");
  return *p;
}

struct MapArgs {
  std::string workflow, cluster, preset = "default", algorithm = "hetpart", output, partitioner;
  std::optional<double> bandwidth;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  std::size_t stride = 1;
  bool fit_memories = false, include_runtime = false;
};

int run_map(const MapArgs& a) {
  auto dag = wfmap::parse_workflow(a.workflow);
  auto system = load_cluster(a.cluster, a.preset, a.bandwidth);
  if (a.fit_memories) system = wfmap::scale_memories_to_fit(system, dag);
  wfmap::HetPartOptions opt;
  opt.seed = a.seed;
  opt.epsilon = a.epsilon;
  opt.stride = a.stride;
  if (!a.partitioner.empty()) opt.partitioner = wfmap::register_external_partitioner({a.partitioner, {}});

  auto start = std::chrono::steady_clock::now();
  auto outcome = a.algorithm == "hetmem" ? wfmap::daghetmem(dag, system) : wfmap::daghetpart(dag, system, opt);
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "runtime: " << seconds << " s\n";

  auto json = wfmap::result_to_json(dag, system, outcome, a.algorithm,
                                    a.include_runtime ? std::optional<double>(seconds) : std::nullopt);
  write_text(a.output, wfmap::dump(json));
  if (auto* bad = std::get_if<wfmap::Infeasible>(&outcome)) {
    std::cerr << "infeasible: " << bad->reason << "\n";
    return kInfeasible;
  }
  const auto& r = std::get<wfmap::MappingResult>(outcome);
  std::cerr << "makespan: " << r.makespan << " with " << r.blocks.size() << " blocks\n";
  return kOk;
}

int run_check(const std::string& workflow, const std::string& result_path) {
  auto dag = wfmap::parse_workflow(workflow);
  auto doc = wfmap::read_json_file(result_path);
  if (!doc.contains("system")) throw InputError("result document has no system description");
  auto system = wfmap::system_from_json(doc.at("system"));
  if (!doc.value("feasible", false)) {
    std::cerr << "result is an infeasible outcome: " << doc.value("reason", std::string("?")) << "\n";
    return kInfeasible;
  }
  std::vector<std::string> bad;
  wfmap::MappingResult r;
  try {
    r = wfmap::result_from_json(dag, system, doc);
  } catch (const std::exception& e) {
    bad.push_back(e.what());
  }
  if (bad.empty()) {
    bad = wfmap::check_mapping(dag, system, r);
    const auto& assignment = doc.value("assignment", wfmap::Json::object());
    for (const auto& b : r.blocks) {
      for (auto u : b.members) {
        auto it = assignment.find(dag.task(u).id);
        if (it == assignment.end() || it->get<std::string>() != system.processor(b.proc).id)
          bad.push_back("assignment entry for task " + dag.task(u).id + " disagrees with its block");
      }
    }
  }
  for (const auto& msg : bad) std::cerr << "violation: " << msg << "\n";
  if (!bad.empty()) return kCheckFailed;
  std::cerr << "ok: " << r.blocks.size() << " blocks, makespan " << r.makespan << " confirmed\n";
  return kOk;
}

struct BenchArgs {
  std::string families = "fork-join,chain-of-stages,fanout,diamond-mesh", sizes = "200,1000", seeds = "1,2,3",
              presets = "default", bandwidths = "1", report, csv, ratios_csv;
  std::uint64_t seed = 0;
  double epsilon = 0.1;
  std::size_t stride = 1;
  bool no_fit = false, quiet = false;
};

int run_bench(const BenchArgs& a) {
  wfmap::BenchConfig cfg;
  cfg.families = split_list<wfmap::Family>(a.families, to_family);
  cfg.sizes = split_list<std::size_t>(a.sizes, to_size);
  cfg.seeds = split_list<std::uint64_t>(a.seeds, to_u64);
  cfg.presets = split_list<wfmap::Preset>(a.presets, to_preset);
  cfg.bandwidths = split_list<double>(a.bandwidths, to_double);
  for (double b : cfg.bandwidths)
    if (!(b > 0)) throw InputError("bandwidths must be positive");
  cfg.fit_memories = !a.no_fit;
  cfg.hetpart.seed = a.seed;
  cfg.hetpart.epsilon = a.epsilon;
  cfg.hetpart.stride = a.stride;

  std::size_t total = cfg.families.size() * cfg.sizes.size() * cfg.seeds.size(), done = 0;
  auto report = wfmap::run_bench(cfg, [&](const wfmap::BenchReport&) {
    if (!a.quiet) std::cerr << "\rinstances: " << ++done << "/" << total << std::flush;
  });
  if (!a.quiet) std::cerr << "\n";

  if (!a.report.empty()) write_text(a.report, wfmap::dump(wfmap::report_to_json(report)));
  if (!a.csv.empty()) {
    std::ostringstream ss;
    wfmap::write_rows_csv(ss, report);
    write_text(a.csv, ss.str());
  }
  if (!a.ratios_csv.empty()) {
    std::ostringstream ss;
    wfmap::write_ratios_csv(ss, report, cfg.bandwidths);
    write_text(a.ratios_csv, ss.str());
  }
  std::size_t infeasible[2] = {0, 0}, violations = 0;
  for (const auto& r : report.rows) {
    if (!r.feasible) ++infeasible[r.algorithm == "hetpart"];
    violations += r.violations.size();
  }
  std::cout << "rows: " << report.rows.size() << " (infeasible: hetmem " << infeasible[0] << ", hetpart "
            << infeasible[1] << "), mapping violations: " << violations << "\n";
  for (const auto& [bw, ratio] : report.geomean_ratio) {
    std::cout << "bandwidth " << bw << ": geometric mean makespan ratio hetpart/hetmem = " << ratio << " over "
              << report.compared_instances.at(bw) << " instances\n";
  }
  std::cout << "published reference ratio: " << wfmap::kPublishedReferenceRatio << "\n";
  return violations ? kCheckFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory-constrained workflow mapping onto heterogeneous processors"};
  app.require_subcommand(1);

  MapArgs map_args;
  auto* map = app.add_subcommand("map", "Map a workflow onto a computing system");
  map->add_option("--workflow", map_args.workflow, "Workflow in DOT format")->required();
  auto* cluster_opt = map->add_option("--cluster", map_args.cluster, "Cluster description (JSON)");
  map->add_option("--preset", map_args.preset, "Cluster preset: default, small, large, morehet, lesshet, nohet")
      ->excludes(cluster_opt);
  map->add_option("--algorithm", map_args.algorithm, "hetpart or hetmem")
      ->check(CLI::IsMember({"hetpart", "hetmem"}));
  map->add_option("--bandwidth", map_args.bandwidth, "Bandwidth (overrides the cluster file)");
  map->add_option("--seed", map_args.seed, "Partitioner seed");
  map->add_option("--epsilon", map_args.epsilon, "Partition balance tolerance");
  map->add_option("--stride", map_args.stride, "Evaluate every n-th part count (plus the last)");
  map->add_option("--partitioner", map_args.partitioner, "External partitioner executable");
  map->add_flag("--fit-memories", map_args.fit_memories,
                "Scale processor memories so the largest task fits the largest processor");
  map->add_flag("--include-runtime", map_args.include_runtime, "Record the runtime in the result document");
  map->add_option("--output", map_args.output, "Result JSON file (default: standard output)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Compare both algorithms on generated workflows");
  bench->add_option("--families", bench_args.families, "Comma-separated families");
  bench->add_option("--sizes", bench_args.sizes, "Comma-separated task counts");
  bench->add_option("--seeds", bench_args.seeds, "Comma-separated generator seeds");
  bench->add_option("--preset", bench_args.presets, "Comma-separated presets, used round-robin");
  bench->add_option("--bandwidth-sweep", bench_args.bandwidths, "Comma-separated bandwidths");
  bench->add_option("--report", bench_args.report, "Report JSON file");
  bench->add_option("--csv", bench_args.csv, "Per-row CSV file");
  bench->add_option("--ratios-csv", bench_args.ratios_csv, "Per-instance ratio CSV, one column per bandwidth");
  bench->add_option("--seed", bench_args.seed, "Partitioner seed");
  bench->add_option("--epsilon", bench_args.epsilon, "Partition balance tolerance");
  bench->add_option("--stride", bench_args.stride, "Evaluate every n-th part count (plus the last)");
  bench->add_flag("--no-fit-memories", bench_args.no_fit, "Use preset memories unscaled");
  bench->add_flag("--quiet", bench_args.quiet, "No progress output");

  std::string check_workflow, check_result;
  auto* check = app.add_subcommand("check", "Re-verify a result document against its workflow");
  check->add_option("--workflow", check_workflow, "Workflow in DOT format")->required();
  check->add_option("--result", check_result, "Result JSON produced by map")->required();

  std::string gen_family = "fanout", gen_output;
  std::size_t gen_tasks = 100;
  std::uint64_t gen_seed = 1;
  auto* generate = app.add_subcommand("generate", "Write a synthetic workflow in DOT format");
  generate->add_option("--family", gen_family, "fork-join, chain-of-stages, fanout or diamond-mesh");
  generate->add_option("--tasks", gen_tasks, "Number of tasks")->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen_seed, "Generator seed");
  generate->add_option("--output", gen_output, "DOT file (default: standard output)");

  std::string preset_arg = "default";
  double preset_bw = 1.0;
  auto* preset_cmd = app.add_subcommand("preset", "Print a cluster preset as JSON");
  preset_cmd->add_option("name", preset_arg, "Preset name");
  preset_cmd->add_option("--bandwidth", preset_bw, "Bandwidth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (*map) return run_map(map_args);
    if (*bench) return run_bench(bench_args);
    if (*check) return run_check(check_workflow, check_result);
    if (*generate) {
      auto dag = wfmap::generate_workflow(to_family(gen_family), gen_tasks, gen_seed);
      write_text(gen_output, wfmap::workflow_to_dot(dag));
      return kOk;
    }
    if (*preset_cmd) {
      if (!(preset_bw > 0)) throw InputError("bandwidth must be positive");
      write_text("", wfmap::dump(wfmap::system_to_json(wfmap::preset(to_preset(preset_arg), preset_bw))));
      return kOk;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const wfmap::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const wfmap::ConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
