// Command-line front end: workload inspection, single-workload mapping,
// mapping evaluation, full design-space exploration, and a brute-force
// cross-check of the analytical cost model.
//
// Exit codes: 0 success, 2 bad input (parse or validation), 3 no feasible
// result, 4 model cross-check mismatch.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nestor/activity.hpp"
#include "nestor/arch.hpp"
#include "nestor/evaluator.hpp"
#include "nestor/explorer.hpp"
#include "nestor/mapper.hpp"
#include "nestor/mapping.hpp"
#include "nestor/oracle.hpp"
#include "nestor/types.hpp"
#include "nestor/workload.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitMismatch = 4;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

struct TaskBundle {
  nestor::NetworkSpec net;
  std::vector<nestor::IntraLayerWorkload> workloads;
  nestor::InterLayerWork inter;
};

TaskBundle load_task(const std::string& path) {
  TaskBundle t;
  t.net = nestor::parse_network(slurp(path));
  t.workloads = nestor::generate_workloads_with_zeros(t.net);
  t.inter = nestor::generate_inter_workloads(t.net);
  return t;
}

std::vector<nestor::HardwareDescription> load_archs(const std::string& path) {
  nestor::ParameterSweep sweep = nestor::parse_sweep(slurp(path));
  std::vector<nestor::HardwareDescription> archs = nestor::enumerate_architectures(sweep);
  if (archs.empty()) throw std::runtime_error("hardware file yields no valid machine: " + path);
  return archs;
}

nestor::HardwareDescription load_single_arch(const std::string& path, int arch_index) {
  std::vector<nestor::HardwareDescription> archs = load_archs(path);
  if (arch_index < 0) {
    if (archs.size() > 1)
      throw std::runtime_error(path + " describes " + std::to_string(archs.size()) +
                               " machines; pick one with --arch-index");
    arch_index = 0;
  }
  if (arch_index >= static_cast<int>(archs.size()))
    throw std::runtime_error("--arch-index out of range (have " + std::to_string(archs.size()) +
                             ")");
  return archs[arch_index];
}

nestor::MappingConstraints load_constraints(const std::string& path) {
  if (path.empty()) return {};
  return nestor::parse_constraints(slurp(path));
}

nestor::CostTable load_costs(const std::string& path) {
  if (path.empty()) return {};
  return nestor::parse_cost_table(slurp(path));
}

nlohmann::json workload_json(const nestor::IntraLayerWorkload& w, size_t index) {
  nlohmann::json j;
  j["index"] = index;
  j["layer"] = w.layer_index;
  j["phase"] = nestor::phase_name(w.phase);
  nlohmann::json b;
  for (nestor::Dim d : nestor::kAllDims) b[std::string(1, nestor::dim_letter(d))] = w.bounds[d];
  j["bounds"] = b;
  j["strides"] = {w.strides.u, w.strides.v};
  j["has_filter"] = w.has_filter;
  j["macs"] = w.macs();
  j["input_elements"] = w.input_elements();
  j["filter_elements"] = w.filter_elements();
  j["output_elements"] = w.output_elements();
  if (w.input_zero_fraction > 0) j["input_zero_fraction"] = w.input_zero_fraction;
  if (w.filter_zero_fraction > 0) j["filter_zero_fraction"] = w.filter_zero_fraction;
  return j;
}

int cmd_workloads(const std::string& task_path, const std::string& out_path) {
  TaskBundle t = load_task(task_path);
  nlohmann::json j;
  j["network"] = {{"layers", t.net.layers.size()},
                  {"batch", t.net.batch},
                  {"training", t.net.training()}};
  nlohmann::json wl = nlohmann::json::array();
  for (size_t i = 0; i < t.workloads.size(); i++) wl.push_back(workload_json(t.workloads[i], i));
  j["workloads"] = wl;
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& op : t.inter.preprocess)
    ops.push_back({{"kind", nestor::preprocess_kind_name(op.kind)},
                   {"layer", op.layer_index},
                   {"before_workload", op.sequence_position},
                   {"in_elements", op.in_elements},
                   {"out_elements", op.out_elements},
                   {"nonzero_elements", op.nonzero_elements},
                   {"zero_fraction", nestor::structural_zero_fraction(op)},
                   {"note", op.note}});
  j["preprocess"] = ops;
  nlohmann::json caches = nlohmann::json::array();
  for (const auto& e : t.inter.cache_entries)
    caches.push_back({{"layer", e.layer_index},
                      {"elements", e.elements},
                      {"live_from_workload", e.created_at},
                      {"live_to_workload", e.freed_at}});
  j["cached_activations"] = caches;
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    spit(out_path, text);
  return kExitOk;
}

int cmd_map(const std::string& task_path, int workload_index, const std::string& hw_path,
            int arch_index, const std::string& cons_path, const std::string& costs_path,
            const std::string& goal_str, const std::string& out_path) {
  TaskBundle t = load_task(task_path);
  if (workload_index < 0 || workload_index >= static_cast<int>(t.workloads.size()))
    throw std::runtime_error("--workload out of range (have " +
                             std::to_string(t.workloads.size()) + ")");
  nestor::HardwareDescription hw = load_single_arch(hw_path, arch_index);
  nestor::MappingConstraints cons = load_constraints(cons_path);
  nestor::CostTable ct = load_costs(costs_path);
  nestor::DesignGoal goal = nestor::goal_from_string(goal_str);

  nestor::MappingChoice mc =
      nestor::find_optimal_mapping(t.workloads[workload_index], hw, goal, cons, ct);
  if (!mc.found) {
    std::cerr << "no feasible mapping (considered " << mc.considered << ", pruned " << mc.pruned
              << ")\n";
    return kExitInfeasible;
  }
  nlohmann::json j;
  j["workload"] = workload_json(t.workloads[workload_index], workload_index);
  j["goal"] = nestor::goal_name(goal);
  j["considered"] = mc.considered;
  j["pruned"] = mc.pruned;
  j["evaluated"] = mc.evaluated;
  j["cycles"] = mc.cost.cycles;
  j["energy_pj"] = mc.cost.energy_pj;
  j["macs"] = mc.cost.macs;
  j["active_pes"] = mc.mapping.active_pes();
  j["mapping"] = nestor::mapping_to_json(mc.mapping, hw);
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    spit(out_path, text);
  return kExitOk;
}

int cmd_evaluate(const std::string& task_path, int workload_index, const std::string& hw_path,
                 int arch_index, const std::string& mapping_path, const std::string& costs_path,
                 const std::string& out_path) {
  TaskBundle t = load_task(task_path);
  if (workload_index < 0 || workload_index >= static_cast<int>(t.workloads.size()))
    throw std::runtime_error("--workload out of range (have " +
                             std::to_string(t.workloads.size()) + ")");
  const nestor::IntraLayerWorkload& w = t.workloads[workload_index];
  nestor::HardwareDescription hw = load_single_arch(hw_path, arch_index);
  nestor::CostTable ct = load_costs(costs_path);
  nlohmann::json mj = nlohmann::json::parse(slurp(mapping_path));
  if (mj.is_object() && mj.contains("mapping")) mj = mj["mapping"];
  nestor::Mapping m = nestor::mapping_from_json(mj, hw);
  if (auto err = nestor::check_mapping_structure(m, w, hw))
    throw std::runtime_error("invalid mapping: " + *err);
  if (auto bad = nestor::validate_mapping(m, w, hw)) {
    std::ostringstream os;
    os << "mapping does not fit: level " << bad->level_name << " needs " << bad->required
       << " bytes, has " << bad->available;
    throw std::runtime_error(os.str());
  }
  nestor::WorkloadCost c = nestor::evaluate_workload(m, w, hw, ct);
  nlohmann::json j;
  j["workload"] = workload_json(w, workload_index);
  j["cycles"] = c.cycles;
  j["energy_pj"] = c.energy_pj;
  j["macs"] = c.macs;
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& b : c.levels)
    lv.push_back({{"name", b.name},
                  {"reads", b.reads},
                  {"writes", b.writes},
                  {"noc_events", b.noc_events},
                  {"energy_pj", b.energy_pj},
                  {"cycles", b.cycles}});
  j["per_level"] = lv;
  std::string text = j.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    spit(out_path, text);
  return kExitOk;
}

int cmd_explore(const std::string& task_path, const std::string& hw_path,
                const std::string& cons_path, const std::string& costs_path,
                const std::string& goal_str, const std::string& out_dir, int jobs,
                bool plot_data) {
  TaskBundle t = load_task(task_path);
  std::vector<nestor::HardwareDescription> archs = load_archs(hw_path);
  nestor::MappingConstraints cons = load_constraints(cons_path);
  nestor::CostTable ct = load_costs(costs_path);
  nestor::DesignGoal goal = nestor::goal_from_string(goal_str);

  nestor::ExploreResult res =
      nestor::explore(archs, t.workloads, t.inter, t.net, goal, cons, ct, jobs);

  if (!out_dir.empty()) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    spit(dir / "report.json", nestor::report_json(res, t.workloads, goal).dump(2) + "\n");
    spit(dir / "summary.csv", nestor::summary_csv(res));
    if (plot_data && res.best >= 0) {
      std::filesystem::create_directories(dir / "plots");
      spit(dir / "plots" / "architectures.csv", nestor::summary_csv(res));
      spit(dir / "plots" / "pe_activity.csv",
           nestor::pe_activity_csv(res.archs[res.best], t.workloads));
      spit(dir / "plots" / "level_traffic.csv",
           nestor::levels_csv(res.archs[res.best], t.workloads));
    }
  }

  std::cout << "architectures: " << res.archs.size() << ", feasible: " << res.feasible_count
            << "\n";
  if (res.best < 0) {
    std::cerr << "no feasible architecture\n";
    return kExitInfeasible;
  }
  const nestor::ArchResult& b = res.archs[res.best];
  std::cout << "best: index " << b.hw.index << " (" << nestor::goal_name(goal) << " "
            << b.objective << ", cycles " << b.cycles << ", energy_pj " << b.energy_pj
            << ", area_um2 " << b.area_um2 << ")\n";
  return kExitOk;
}

int cmd_validate_oracle(const std::string& task_path, const std::string& hw_path, int arch_index,
                        uint64_t pairs, uint64_t seed, uint64_t max_iterations) {
  TaskBundle t = load_task(task_path);
  nestor::HardwareDescription hw = load_single_arch(hw_path, arch_index);
  std::mt19937_64 rng(seed);

  uint64_t checked = 0, skipped = 0;
  for (size_t wi = 0; wi < t.workloads.size() && checked < pairs; wi++) {
    const nestor::IntraLayerWorkload& w = t.workloads[wi];
    // count, then sample uniformly so every region of the space is exercised
    uint64_t total = nestor::construct_mappings(w, hw, {}, [](const nestor::Mapping&) {
      return true;
    });
    if (total == 0) continue;
    uint64_t want = std::min<uint64_t>((pairs - checked + t.workloads.size() - 1 - wi) /
                                           (t.workloads.size() - wi),
                                       total);
    std::set<uint64_t> picks;
    std::uniform_int_distribution<uint64_t> dist(0, total - 1);
    while (picks.size() < want) picks.insert(dist(rng));
    uint64_t idx = 0;
    bool mismatch = false;
    nestor::construct_mappings(w, hw, {}, [&](const nestor::Mapping& m) {
      if (picks.count(idx++) == 0) return true;
      nestor::SimLog log = nestor::simulate(m, w, hw, max_iterations);
      if (!log.completed) {
        skipped++;
        return true;
      }
      nestor::ActivityCounts fast = nestor::analyze_activity(m, w, hw);
      checked++;
      if (!(fast == log.counts)) {
        std::cerr << "model mismatch on workload " << wi << ", mapping #" << (idx - 1) << "\n"
                  << nestor::mapping_to_json(m, hw).dump(2) << "\n";
        mismatch = true;
        return false;
      }
      return true;
    });
    if (mismatch) return kExitMismatch;
  }
  std::cout << "cross-checked " << checked << " mappings, skipped " << skipped
            << " (iteration guard), all counts equal\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Design-space exploration for convolution accelerators"};
  app.require_subcommand(1);

  std::string task_path, hw_path, cons_path, costs_path, mapping_path, out_path, goal = "edp";
  int workload_index = 0, arch_index = -1, jobs = 1;
  bool plot_data = false;
  uint64_t pairs = 50, seed = 1, max_iterations = 4'000'000;

  auto* wcmd = app.add_subcommand("workloads", "List the loop nests a network expands into");
  wcmd->add_option("--task", task_path, "network description json")->required();
  wcmd->add_option("--out", out_path, "write json here instead of stdout");

  auto* mcmd = app.add_subcommand("map", "Find the best mapping of one workload");
  mcmd->add_option("--task", task_path)->required();
  mcmd->add_option("--workload", workload_index, "workload index (see `workloads`)");
  mcmd->add_option("--hardware", hw_path, "machine description json")->required();
  mcmd->add_option("--arch-index", arch_index, "pick one machine out of a sweep file");
  mcmd->add_option("--constraints", cons_path);
  mcmd->add_option("--costs", costs_path);
  mcmd->add_option("--goal", goal, "throughput|energy|edp");
  mcmd->add_option("--out", out_path);

  auto* ecmd = app.add_subcommand("evaluate", "Cost a given mapping without searching");
  ecmd->add_option("--task", task_path)->required();
  ecmd->add_option("--workload", workload_index);
  ecmd->add_option("--hardware", hw_path)->required();
  ecmd->add_option("--arch-index", arch_index);
  ecmd->add_option("--mapping", mapping_path, "mapping json (same shape `map` emits)")
      ->required();
  ecmd->add_option("--costs", costs_path);
  ecmd->add_option("--out", out_path);

  auto* xcmd = app.add_subcommand("explore", "Sweep machines and pick the best");
  xcmd->add_option("--task", task_path)->required();
  xcmd->add_option("--hardware", hw_path, "machine sweep json")->required();
  xcmd->add_option("--constraints", cons_path);
  xcmd->add_option("--costs", costs_path);
  xcmd->add_option("--goal", goal, "throughput|energy|edp");
  xcmd->add_option("--out", out_path, "output directory (report.json, summary.csv)");
  xcmd->add_option("--jobs", jobs, "worker threads");
  xcmd->add_flag("--plot-data", plot_data, "also write per-level and per-workload csv tables");

  auto* vcmd = app.add_subcommand(
      "validate-oracle", "Replay sampled mappings step by step and compare against the model");
  vcmd->add_option("--task", task_path)->required();
  vcmd->add_option("--hardware", hw_path)->required();
  vcmd->add_option("--arch-index", arch_index);
  vcmd->add_option("--pairs", pairs, "how many mappings to replay");
  vcmd->add_option("--seed", seed);
  vcmd->add_option("--max-iterations", max_iterations, "replay size guard");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (wcmd->parsed()) return cmd_workloads(task_path, out_path);
    if (mcmd->parsed())
      return cmd_map(task_path, workload_index, hw_path, arch_index, cons_path, costs_path, goal,
                     out_path);
    if (ecmd->parsed())
      return cmd_evaluate(task_path, workload_index, hw_path, arch_index, mapping_path,
                          costs_path, out_path);
    if (xcmd->parsed())
      return cmd_explore(task_path, hw_path, cons_path, costs_path, goal, out_path, jobs,
                         plot_data);
    if (vcmd->parsed())
      return cmd_validate_oracle(task_path, hw_path, arch_index, pairs, seed, max_iterations);
  } catch (const nestor::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitOk;
}
