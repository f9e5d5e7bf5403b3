#pragma once

// JSON forms of computing systems and mapping results (nlohmann::json).
//
// Cluster:
//   {"bandwidth": 1.0,
//    "processors": [{"id": "C2-0", "memory": 192, "speed": 32, "kind": "C2"}, ...]}
//
// Result ("format": 1): algorithm, feasible, makespan, parts_requested,
// system (cluster form above), assignment (task id -> processor id), blocks
// (processor, tasks, order, requirement, memory, fits, work), critical_path
// (block indices), trace and local_search_makespans. Infeasible results carry
// reason and, when known, task instead of the mapping fields.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <variant>
#include <string>

#include <json.hpp>

#include "wfmap/cluster.hpp"
#include "wfmap/mapping.hpp"
#include "wfmap/workflow.hpp"

namespace wfmap {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline Json system_to_json(const ComputingSystem& system) {
  Json procs = Json::array();
  for (const auto& p : system.processors()) {
    procs.push_back({{"id", p.id}, {"memory", p.memory}, {"speed", p.speed}, {"kind", p.kind}});
  }
  return {{"bandwidth", system.bandwidth()}, {"processors", procs}};
}

inline ComputingSystem system_from_json(const Json& j) {
  try {
    std::vector<Processor> procs;
    for (const auto& p : j.at("processors")) {
      Processor proc;
      proc.id = p.at("id").get<std::string>();
      proc.memory = p.at("memory").get<double>();
      proc.speed = p.at("speed").get<double>();
      proc.kind = p.contains("kind") ? p.at("kind").get<std::string>() : proc.id;
      procs.push_back(std::move(proc));
    }
    return ComputingSystem(std::move(procs), j.at("bandwidth").get<double>());
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed cluster description: ") + e.what());
  }
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

inline ComputingSystem load_system(const std::string& path) { return system_from_json(read_json_file(path)); }

inline Json result_to_json(const WorkflowDag& dag, const ComputingSystem& system, const MappingOutcome& outcome,
                           const std::string& algorithm, std::optional<double> runtime_seconds = std::nullopt) {
  Json j;
  j["format"] = kFormatVersion;
  j["algorithm"] = algorithm;
  j["system"] = system_to_json(system);
  if (auto* bad = std::get_if<Infeasible>(&outcome)) {
    j["feasible"] = false;
    j["reason"] = bad->reason;
    if (bad->task) j["task"] = dag.task(*bad->task).id;
  } else {
    const auto& r = std::get<MappingResult>(outcome);
    j["feasible"] = true;
    j["makespan"] = r.makespan;
    j["parts_requested"] = r.parts_requested;
    Json assignment = Json::object();
    Json blocks = Json::array();
    for (const auto& b : r.blocks) {
      Json tasks = Json::array(), order = Json::array();
      for (auto u : b.members) {
        tasks.push_back(dag.task(u).id);
        assignment[dag.task(u).id] = system.processor(b.proc).id;
      }
      for (auto u : b.order) order.push_back(dag.task(u).id);
      blocks.push_back({{"processor", system.processor(b.proc).id},
                        {"tasks", tasks},
                        {"order", order},
                        {"requirement", b.requirement},
                        {"memory", b.capacity},
                        {"fits", b.fits},
                        {"work", b.work}});
    }
    j["assignment"] = assignment;
    j["blocks"] = blocks;
    j["critical_path"] = r.critical_path;
    Json trace = Json::array();
    for (const auto& ev : r.trace) {
      Json e = {{"step", ev.step}, {"detail", ev.detail}};
      e["makespan"] = std::isnan(ev.makespan) ? Json(nullptr) : Json(ev.makespan);
      trace.push_back(e);
    }
    j["trace"] = trace;
    j["local_search_makespans"] = r.local_search_makespans;
  }
  if (runtime_seconds) j["runtime_seconds"] = *runtime_seconds;
  return j;
}

/// Rebuilds the mapping part of a result document so it can be re-checked.
inline MappingResult result_from_json(const WorkflowDag& dag, const ComputingSystem& system, const Json& j) {
  try {
    if (j.at("format").get<int>() != kFormatVersion) throw std::invalid_argument("unsupported result format");
    if (!j.at("feasible").get<bool>()) throw std::invalid_argument("result describes an infeasible run");
    MappingResult r;
    r.algorithm = j.at("algorithm").get<std::string>();
    r.makespan = j.at("makespan").get<double>();
    r.block_of.assign(dag.size(), std::numeric_limits<std::uint32_t>::max());
    for (const auto& jb : j.at("blocks")) {
      BlockReport b;
      auto proc = system.index_of(jb.at("processor").get<std::string>());
      if (!proc) throw std::invalid_argument("unknown processor " + jb.at("processor").get<std::string>());
      b.proc = *proc;
      for (const auto& id : jb.at("tasks")) b.members.push_back(dag.require(id.get<std::string>()));
      for (const auto& id : jb.at("order")) b.order.push_back(dag.require(id.get<std::string>()));
      std::sort(b.members.begin(), b.members.end());
      b.requirement = jb.at("requirement").get<double>();
      b.capacity = jb.at("memory").get<double>();
      b.fits = jb.at("fits").get<bool>();
      b.work = jb.at("work").get<double>();
      for (auto u : b.members) r.block_of.at(u) = static_cast<std::uint32_t>(r.blocks.size());
      r.blocks.push_back(std::move(b));
    }
    r.critical_path = j.at("critical_path").get<std::vector<std::uint32_t>>();
    r.local_search_makespans = j.value("local_search_makespans", std::vector<double>{});
    r.parts_requested = j.value("parts_requested", std::size_t{0});
    return r;
  } catch (const Json::exception& e) {
    throw std::invalid_argument(std::string("malformed result document: ") + e.what());
  }
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace wfmap
