#pragma once

#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "nestor/arch.hpp"
#include "nestor/evaluator.hpp"
#include "nestor/mapper.hpp"
#include "nestor/mapping.hpp"
#include "nestor/oracle.hpp"
#include "nestor/workload.hpp"

namespace nestor {

struct MappingChoice {
  bool found = false;
  Mapping mapping;
  WorkloadCost cost;
  uint64_t considered = 0, pruned = 0, evaluated = 0;
};

inline double workload_objective(const WorkloadCost& c, DesignGoal goal) {
  switch (goal) {
    case DesignGoal::Throughput: return c.cycles;
    case DesignGoal::Energy: return c.energy_pj;
    case DesignGoal::EDP: return c.energy_pj * c.cycles;
  }
  return 0;
}

// Walks the full mapping space of one workload and keeps the best candidate
// under the goal. Ties fall to lower energy, then fewer accesses at the
// outermost memory, then earliest construction order.
inline MappingChoice find_optimal_mapping(const IntraLayerWorkload& w,
                                          const HardwareDescription& hw, DesignGoal goal,
                                          const MappingConstraints& cons, const CostTable& ct,
                                          const std::map<int, uint64_t>& live_cache_bytes = {}) {
  MappingChoice best;
  double best_key0 = 0, best_key1 = 0, best_key2 = 0;
  construct_mappings(
      w, hw, cons,
      [&](const Mapping& m) {
        best.considered++;
        if (mapping_pruned(m, w, hw, goal, cons)) {
          best.pruned++;
          return true;
        }
        best.evaluated++;
        WorkloadCost c = evaluate_workload(m, w, hw, ct);
        double k0 = workload_objective(c, goal);
        double k1 = c.energy_pj;
        double k2 = c.levels.back().reads + c.levels.back().writes;
        bool take = !best.found || k0 < best_key0 ||
                    (k0 == best_key0 && (k1 < best_key1 || (k1 == best_key1 && k2 < best_key2)));
        if (take) {
          best.found = true;
          best.mapping = m;
          best.cost = std::move(c);
          best_key0 = k0;
          best_key1 = k1;
          best_key2 = k2;
        }
        return true;
      },
      live_cache_bytes);
  return best;
}

struct ArchResult {
  HardwareDescription hw;
  bool feasible = false;
  std::string reject_reason;
  std::vector<MappingChoice> per_workload;

  double compute_cycles = 0;     // sum of per-workload cycle counts
  double preprocess_cycles = 0;  // tensor reshaping between layers
  double norm_cycles = 0;        // fixed delay per normalization pass
  double cycles = 0;             // total

  double dynamic_pj = 0;     // mapped workload energy
  double preprocess_pj = 0;  // reshaping traffic energy
  double static_pj = 0;      // leakage of pinned activations
  double energy_pj = 0;      // total

  double area_um2 = 0;
  double edp_pj_s = 0;
  double objective = 0;
  uint64_t mappings_considered = 0, mappings_pruned = 0;
};

inline double arch_objective(const ArchResult& r, DesignGoal goal) {
  switch (goal) {
    case DesignGoal::Throughput: return r.cycles;
    case DesignGoal::Energy: return r.energy_pj;
    case DesignGoal::EDP: return r.edp_pj_s;
  }
  return 0;
}

// Maps every workload of the network onto one candidate machine and totals
// cost across the whole run, including inter-layer reshaping, pinned
// activations and normalization stalls. Any unmappable workload rejects the
// machine.
inline ArchResult evaluate_architecture(const HardwareDescription& hw,
                                        const std::vector<IntraLayerWorkload>& workloads,
                                        const InterLayerWork& inter, const NetworkSpec& net,
                                        DesignGoal goal, const MappingConstraints& cons,
                                        const CostTable& ct) {
  ArchResult r;
  r.hw = hw;
  const size_t n = workloads.size();
  const int outermost = static_cast<int>(hw.levels.size()) - 1;
  const bool bounded_top = !hw.outermost().unbounded();

  r.per_workload.reserve(n);
  for (size_t i = 0; i < n; i++) {
    std::map<int, uint64_t> live;
    if (bounded_top) {
      uint64_t bytes = 0;
      for (const auto& e : inter.cache_entries)
        if (e.created_at <= static_cast<int>(i) && static_cast<int>(i) <= e.freed_at)
          bytes += e.bytes(hw.precision_bits);
      if (bytes > 0) live[outermost] = bytes;
    }
    MappingChoice mc = find_optimal_mapping(workloads[i], hw, goal, cons, ct, live);
    r.mappings_considered += mc.considered;
    r.mappings_pruned += mc.pruned;
    if (!mc.found) {
      r.reject_reason = "no feasible mapping for workload " + std::to_string(i) + " (" +
                        phase_name(workloads[i].phase) + " of layer " +
                        std::to_string(workloads[i].layer_index) + ")";
      r.per_workload.push_back(std::move(mc));
      return r;
    }
    r.per_workload.push_back(std::move(mc));
  }

  // schedule: each workload preceded by its reshaping ops
  std::vector<double> pre_at(n, 0.0);
  for (const auto& op : inter.preprocess) {
    pre_at[op.sequence_position] += preprocess_cycles(op, hw, ct);
    r.preprocess_pj += preprocess_energy_pj(op, hw, ct);
  }
  std::vector<double> start_at(n, 0.0), end_at(n, 0.0);
  double acc = 0;
  for (size_t i = 0; i < n; i++) {
    acc += pre_at[i];
    r.preprocess_cycles += pre_at[i];
    start_at[i] = acc;
    acc += r.per_workload[i].cost.cycles;
    end_at[i] = acc;
    r.compute_cycles += r.per_workload[i].cost.cycles;
    r.dynamic_pj += r.per_workload[i].cost.energy_pj;
  }
  r.norm_cycles = ct.norm_delay_cycles * static_cast<double>(net.norm_layer_count()) *
                  (net.training() ? 2.0 : 1.0);
  r.cycles = r.compute_cycles + r.preprocess_cycles + r.norm_cycles;

  for (const auto& e : inter.cache_entries) {
    double seconds = (end_at[e.freed_at] - start_at[e.created_at]) / ct.clock_hz;
    r.static_pj += cache_static_energy_pj(e.bytes(hw.precision_bits), seconds, hw, ct);
  }
  r.energy_pj = r.dynamic_pj + r.preprocess_pj + r.static_pj;
  r.area_um2 = total_area_um2(hw, ct);
  r.edp_pj_s = r.energy_pj * (r.cycles / ct.clock_hz);
  r.objective = arch_objective(r, goal);
  r.feasible = true;
  return r;
}

struct ExploreResult {
  std::vector<ArchResult> archs;  // enumeration order
  int best = -1;
  uint64_t feasible_count = 0;
};

// Evaluates every candidate machine, optionally across threads; results are
// byte-identical regardless of job count since each index lands in its own
// slot and the final scan is sequential.
inline ExploreResult explore(const std::vector<HardwareDescription>& archs,
                             const std::vector<IntraLayerWorkload>& workloads,
                             const InterLayerWork& inter, const NetworkSpec& net, DesignGoal goal,
                             const MappingConstraints& cons, const CostTable& ct, int jobs = 1) {
  ExploreResult out;
  out.archs.resize(archs.size());
  auto run = [&](size_t begin, size_t step) {
    for (size_t i = begin; i < archs.size(); i += step)
      out.archs[i] = evaluate_architecture(archs[i], workloads, inter, net, goal, cons, ct);
  };
  int threads = std::max(1, std::min<int>(jobs, static_cast<int>(archs.size())));
  if (threads <= 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int k = 0; k < threads; k++) pool.emplace_back(run, k, threads);
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < out.archs.size(); i++) {
    const ArchResult& r = out.archs[i];
    if (!r.feasible) continue;
    out.feasible_count++;
    if (out.best < 0) {
      out.best = static_cast<int>(i);
      continue;
    }
    const ArchResult& b = out.archs[out.best];
    if (r.objective < b.objective ||
        (r.objective == b.objective &&
         (r.energy_pj < b.energy_pj ||
          (r.energy_pj == b.energy_pj && r.area_um2 < b.area_um2))))
      out.best = static_cast<int>(i);
  }
  return out;
}

// --- reporting --------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(12) << v;
  return os.str();
}

inline nlohmann::json level_json(const LevelSpec& l) {
  nlohmann::json j;
  j["name"] = l.name;
  switch (l.kind) {
    case LevelKind::Compute:
      j["kind"] = "compute";
      j["pe_count"] = l.pe_count;
      break;
    case LevelKind::Memory:
      j["kind"] = "memory";
      j["mem_type"] = mem_type_name(l.mem_type);
      j["size_bytes"] = l.size_bytes;
      j["usage"] = usage_name(l.usage);
      break;
    case LevelKind::Routing:
      j["kind"] = "routing";
      j["topology"] = topology_name(l.topology);
      j["size_x"] = l.size_x;
      j["size_y"] = l.size_y;
      break;
  }
  return j;
}

}  // namespace detail

inline nlohmann::json arch_result_json(const ArchResult& r,
                                       const std::vector<IntraLayerWorkload>& workloads,
                                       bool with_mappings) {
  nlohmann::json j;
  j["index"] = r.hw.index;
  j["feasible"] = r.feasible;
  if (!r.feasible) {
    j["reject_reason"] = r.reject_reason;
    return j;
  }
  j["cycles"] = r.cycles;
  j["compute_cycles"] = r.compute_cycles;
  j["preprocess_cycles"] = r.preprocess_cycles;
  j["norm_cycles"] = r.norm_cycles;
  j["energy_pj"] = r.energy_pj;
  j["dynamic_pj"] = r.dynamic_pj;
  j["preprocess_pj"] = r.preprocess_pj;
  j["static_pj"] = r.static_pj;
  j["area_um2"] = r.area_um2;
  j["edp_pj_s"] = r.edp_pj_s;
  j["objective"] = r.objective;
  j["mappings_considered"] = r.mappings_considered;
  j["mappings_pruned"] = r.mappings_pruned;
  if (with_mappings) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : r.hw.levels) levels.push_back(detail::level_json(l));
    j["levels"] = levels;
    nlohmann::json wl = nlohmann::json::array();
    for (size_t i = 0; i < r.per_workload.size(); i++) {
      const MappingChoice& mc = r.per_workload[i];
      nlohmann::json e;
      e["workload"] = i;
      e["layer"] = workloads[i].layer_index;
      e["phase"] = phase_name(workloads[i].phase);
      e["cycles"] = mc.cost.cycles;
      e["energy_pj"] = mc.cost.energy_pj;
      e["macs"] = mc.cost.macs;
      e["active_pes"] = mc.mapping.active_pes();
      e["mapping"] = mapping_to_json(mc.mapping, r.hw);
      nlohmann::json lv = nlohmann::json::array();
      for (const auto& b : mc.cost.levels)
        lv.push_back({{"name", b.name},
                      {"reads", b.reads},
                      {"writes", b.writes},
                      {"noc_events", b.noc_events},
                      {"energy_pj", b.energy_pj},
                      {"cycles", b.cycles}});
      e["per_level"] = lv;
      wl.push_back(std::move(e));
    }
    j["workloads"] = wl;
  }
  return j;
}

inline nlohmann::json report_json(const ExploreResult& res,
                                  const std::vector<IntraLayerWorkload>& workloads,
                                  DesignGoal goal) {
  nlohmann::json j;
  j["goal"] = goal_name(goal);
  j["architectures"] = res.archs.size();
  j["feasible"] = res.feasible_count;
  uint64_t considered = 0, pruned = 0;
  for (const auto& r : res.archs) {
    considered += r.mappings_considered;
    pruned += r.mappings_pruned;
  }
  j["mappings_considered"] = considered;
  j["mappings_pruned"] = pruned;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : res.archs) rows.push_back(arch_result_json(r, workloads, false));
  j["results"] = rows;
  if (res.best >= 0) j["best"] = arch_result_json(res.archs[res.best], workloads, true);
  return j;
}

inline std::string summary_csv(const ExploreResult& res) {
  std::ostringstream os;
  os << "index,feasible,cycles,energy_pj,edp_pj_s,area_um2,objective,reject_reason\n";
  for (const auto& r : res.archs) {
    os << r.hw.index << ',' << (r.feasible ? 1 : 0) << ',';
    if (r.feasible)
      os << detail::fmt(r.cycles) << ',' << detail::fmt(r.energy_pj) << ','
         << detail::fmt(r.edp_pj_s) << ',' << detail::fmt(r.area_um2) << ','
         << detail::fmt(r.objective) << ',';
    else
      os << ",,,,,\"" << r.reject_reason << '"';
    os << '\n';
  }
  return os.str();
}

// Per-workload table for the winning machine: how busy the array is and where
// the cycles go.
inline std::string pe_activity_csv(const ArchResult& r,
                                   const std::vector<IntraLayerWorkload>& workloads) {
  std::ostringstream os;
  os << "workload,layer,phase,macs,active_pes,pe_utilization,cycles,energy_pj\n";
  for (size_t i = 0; i < r.per_workload.size(); i++) {
    const MappingChoice& mc = r.per_workload[i];
    os << i << ',' << workloads[i].layer_index << ',' << phase_name(workloads[i].phase) << ','
       << detail::fmt(mc.cost.macs) << ',' << mc.mapping.active_pes() << ','
       << detail::fmt(static_cast<double>(mc.mapping.active_pes()) /
                      static_cast<double>(r.hw.total_pes()))
       << ',' << detail::fmt(mc.cost.cycles) << ',' << detail::fmt(mc.cost.energy_pj) << '\n';
  }
  return os.str();
}

inline std::string levels_csv(const ArchResult& r,
                              const std::vector<IntraLayerWorkload>& workloads) {
  std::ostringstream os;
  os << "workload,layer,phase,level,reads,writes,noc_events,energy_pj,cycles\n";
  for (size_t i = 0; i < r.per_workload.size(); i++)
    for (const auto& b : r.per_workload[i].cost.levels)
      os << i << ',' << workloads[i].layer_index << ',' << phase_name(workloads[i].phase) << ','
         << b.name << ',' << detail::fmt(b.reads) << ',' << detail::fmt(b.writes) << ','
         << detail::fmt(b.noc_events) << ',' << detail::fmt(b.energy_pj) << ','
         << detail::fmt(b.cycles) << '\n';
  return os.str();
}

}  // namespace nestor
