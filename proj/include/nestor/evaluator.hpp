#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "nestor/activity.hpp"
#include "nestor/arch.hpp"
#include "nestor/mapping.hpp"
#include "nestor/types.hpp"
#include "nestor/workload.hpp"

namespace nestor {

struct MemCost {
  double read_energy_pj = 1.0;
  double write_energy_pj = 1.0;
  double static_power_uw_per_byte = 0.0;
  double area_um2_per_byte = 0.0;
  double read_bw = 1.0;   // elements/cycle per instance
  double write_bw = 1.0;
};

struct RouteCost {
  double hop_energy_pj = 1.0;
  double accumulate_energy_pj = 1.0;
  double multicast_alpha = 0.25;  // extra fraction of hop energy per added leaf
  double bandwidth = 1.0;         // elements/cycle
  double router_area_um2 = 0.0;
};

struct CostTable {
  double clock_hz = 1e9;
  double mac_energy_pj = 1.0;
  double pe_area_um2 = 0.0;
  double pe_pipeline_stages = 1.0;
  double norm_delay_cycles = 0.0;
  bool skip_identity_preprocess = true;
  std::map<MemType, MemCost> mem;
  std::map<Topology, RouteCost> route;

  CostTable() {
    for (MemType t : {MemType::Register, MemType::Scratchpad, MemType::SRAM, MemType::DRAM})
      mem[t] = MemCost{};
    for (Topology t : {Topology::Bus, Topology::TwoLevelBus, Topology::Mesh})
      route[t] = RouteCost{};
  }
};

inline CostTable parse_cost_table(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  CostTable ct;
  ct.clock_hz = doc.value("clock_hz", ct.clock_hz);
  ct.mac_energy_pj = doc.value("mac_energy_pj", ct.mac_energy_pj);
  ct.pe_area_um2 = doc.value("pe_area_um2", ct.pe_area_um2);
  ct.pe_pipeline_stages = doc.value("pe_pipeline_stages", ct.pe_pipeline_stages);
  ct.norm_delay_cycles = doc.value("norm_delay_cycles", ct.norm_delay_cycles);
  ct.skip_identity_preprocess =
      doc.value("skip_identity_preprocess", ct.skip_identity_preprocess);
  if (doc.contains("mem_types"))
    for (auto it = doc["mem_types"].begin(); it != doc["mem_types"].end(); ++it) {
      MemCost& mc = ct.mem[detail::mem_type_from_string(it.key())];
      const auto& j = it.value();
      mc.read_energy_pj = j.value("read_energy_pj", mc.read_energy_pj);
      mc.write_energy_pj = j.value("write_energy_pj", mc.write_energy_pj);
      mc.static_power_uw_per_byte = j.value("static_power_uw_per_byte", mc.static_power_uw_per_byte);
      mc.area_um2_per_byte = j.value("area_um2_per_byte", mc.area_um2_per_byte);
      mc.read_bw = j.value("read_bw", mc.read_bw);
      mc.write_bw = j.value("write_bw", mc.write_bw);
      if (mc.read_bw <= 0 || mc.write_bw <= 0)
        throw std::runtime_error("memory bandwidth must be positive: " + it.key());
    }
  if (doc.contains("routing"))
    for (auto it = doc["routing"].begin(); it != doc["routing"].end(); ++it) {
      RouteCost& rc = ct.route[detail::topology_from_string(it.key())];
      const auto& j = it.value();
      rc.hop_energy_pj = j.value("hop_energy_pj", rc.hop_energy_pj);
      rc.accumulate_energy_pj = j.value("accumulate_energy_pj", rc.accumulate_energy_pj);
      rc.multicast_alpha = j.value("multicast_alpha", rc.multicast_alpha);
      rc.bandwidth = j.value("bandwidth", rc.bandwidth);
      rc.router_area_um2 = j.value("router_area_um2", rc.router_area_um2);
      if (rc.bandwidth <= 0)
        throw std::runtime_error("routing bandwidth must be positive: " + it.key());
    }
  return ct;
}

namespace detail {

// Level the zero-gating logic sits at: traffic strictly inside it, and reads
// it serves, shrink by the operand's zero fraction. Defaults to the
// outermost bounded memory.
inline int skip_boundary_index(const HardwareDescription& hw) {
  if (!hw.zero_skip_below.empty()) {
    for (size_t i = 0; i < hw.levels.size(); i++)
      if (hw.levels[i].name == hw.zero_skip_below) return static_cast<int>(i);
    return -1;
  }
  int best = -1;
  for (size_t i = 1; i < hw.levels.size(); i++)
    if (hw.levels[i].kind == LevelKind::Memory && !hw.levels[i].unbounded())
      best = static_cast<int>(i);
  if (best < 0)
    for (size_t i = 1; i < hw.levels.size(); i++)
      if (hw.levels[i].kind == LevelKind::Memory) return static_cast<int>(i);
  return best;
}

inline double effective_read_bw(const LevelSpec& l, const CostTable& ct) {
  double bw = l.read_bw > 0 ? l.read_bw : ct.mem.at(l.mem_type).read_bw;
  return bw * l.ports;
}
inline double effective_write_bw(const LevelSpec& l, const CostTable& ct) {
  double bw = l.write_bw > 0 ? l.write_bw : ct.mem.at(l.mem_type).write_bw;
  return bw * l.ports;
}
inline double effective_noc_bw(const LevelSpec& l, const CostTable& ct) {
  double bw = l.read_bw > 0 ? l.read_bw : ct.route.at(l.topology).bandwidth;
  return bw * l.ports;
}

}  // namespace detail

struct LevelBreakdown {
  std::string name;
  double reads = 0, writes = 0;  // element accesses after zero skipping
  double noc_events = 0;
  double energy_pj = 0;
  double cycles = 0;
};

struct WorkloadCost {
  double cycles = 0;
  double energy_pj = 0;  // dynamic energy of this workload
  double macs = 0;       // multiplies issued after zero skipping
  std::vector<LevelBreakdown> levels;
  ActivityCounts activity;  // unscaled integer counts
};

// Scale factor for one tensor's traffic at one level under zero skipping.
// `inside` levels see only nonzero operands; the boundary level serves
// nonzero reads but still stores the full tile.
inline double zero_skip_scale(const HardwareDescription& hw, const IntraLayerWorkload& w,
                              Tensor t, int level, bool is_read) {
  if (!hw.zero_skip || t == Tensor::Outputs) return 1.0;
  double f = t == Tensor::Inputs ? w.input_zero_fraction : w.filter_zero_fraction;
  if (f <= 0.0) return 1.0;
  int boundary = detail::skip_boundary_index(hw);
  if (boundary < 0) return 1.0;
  if (level < boundary || (level == boundary && is_read)) return 1.0 - f;
  return 1.0;
}

inline double zero_skip_mac_scale(const HardwareDescription& hw, const IntraLayerWorkload& w) {
  if (!hw.zero_skip) return 1.0;
  double s = 1.0;
  if (w.input_zero_fraction > 0) s *= 1.0 - w.input_zero_fraction;
  if (w.has_filter && w.filter_zero_fraction > 0) s *= 1.0 - w.filter_zero_fraction;
  return s;
}

inline WorkloadCost evaluate_workload(const Mapping& m, const IntraLayerWorkload& w,
                                      const HardwareDescription& hw, const CostTable& ct) {
  const int L = static_cast<int>(hw.levels.size());
  WorkloadCost out;
  out.activity = analyze_activity(m, w, hw);
  out.macs = static_cast<double>(out.activity.macs) * zero_skip_mac_scale(hw, w);
  out.levels.resize(L);

  std::vector<uint64_t> active_instances(L, 1);
  {
    uint64_t acc = 1;
    for (int li = L - 1; li >= 0; li--) {
      active_instances[li] = acc;
      acc *= m.per_level[li].spatial_product();
    }
  }

  for (int li = 0; li < L; li++) {
    const LevelSpec& l = hw.levels[li];
    LevelBreakdown& b = out.levels[li];
    b.name = l.name;
    switch (l.kind) {
      case LevelKind::Compute: {
        b.energy_pj = out.macs * ct.mac_energy_pj;
        double stages = l.pipeline_stages > 0 ? l.pipeline_stages : ct.pe_pipeline_stages;
        b.cycles = out.macs / (static_cast<double>(m.active_pes()) * stages);
        break;
      }
      case LevelKind::Memory: {
        const MemCost& mc = ct.mem.at(l.mem_type);
        for (Tensor t : kAllTensors) {
          const TensorTraffic& tt = out.activity.at(li, t);
          b.reads += static_cast<double>(tt.reads) * zero_skip_scale(hw, w, t, li, true);
          b.writes += static_cast<double>(tt.writes) * zero_skip_scale(hw, w, t, li, false);
        }
        b.energy_pj = b.reads * mc.read_energy_pj + b.writes * mc.write_energy_pj;
        b.cycles = (b.reads / detail::effective_read_bw(l, ct) +
                    b.writes / detail::effective_write_bw(l, ct)) /
                   static_cast<double>(active_instances[li]);
        break;
      }
      case LevelKind::Routing: {
        const RouteCost& rc = ct.route.at(l.topology);
        for (Tensor t : kAllTensors) {
          const NocTraffic& nt = out.activity.noc[li][static_cast<int>(t)];
          double s = zero_skip_scale(hw, w, t, li, true);
          double events = static_cast<double>(nt.unicast) * s;
          double energy = static_cast<double>(nt.unicast) * s * rc.hop_energy_pj;
          for (const auto& [fanout, count] : nt.multicast) {
            double c = static_cast<double>(count) * s;
            events += c;
            energy += c * rc.hop_energy_pj *
                      (1.0 + rc.multicast_alpha * static_cast<double>(fanout - 1));
          }
          for (const auto& [fanin, count] : nt.accumulate) {
            double c = static_cast<double>(count) * s;
            events += c;
            energy += c * rc.accumulate_energy_pj;
          }
          b.noc_events += events;
          b.energy_pj += energy;
        }
        b.cycles = b.noc_events / detail::effective_noc_bw(l, ct);
        break;
      }
    }
    out.energy_pj += b.energy_pj;
    out.cycles = std::max(out.cycles, b.cycles);
  }
  return out;
}

// --- inter-layer costs ------------------------------------------------------

inline bool is_identity_preprocess(const PreprocessOp& op) {
  return (op.kind == PreprocessKind::Pad || op.kind == PreprocessKind::Upsample) &&
         op.in_elements == op.out_elements;
}

// Reshaping runs at the outermost memory: stream the source in, write the
// rearranged result back.
inline double preprocess_cycles(const PreprocessOp& op, const HardwareDescription& hw,
                                const CostTable& ct) {
  if (ct.skip_identity_preprocess && is_identity_preprocess(op)) return 0.0;
  return static_cast<double>(op.out_elements) /
         detail::effective_read_bw(hw.outermost(), ct);
}

inline double preprocess_energy_pj(const PreprocessOp& op, const HardwareDescription& hw,
                                   const CostTable& ct) {
  if (ct.skip_identity_preprocess && is_identity_preprocess(op)) return 0.0;
  const MemCost& mc = ct.mem.at(hw.outermost().mem_type);
  return static_cast<double>(op.in_elements) * mc.read_energy_pj +
         static_cast<double>(op.out_elements) * mc.write_energy_pj;
}

// Leakage of one pinned activation: bytes held for a stretch of wall time at
// the outermost memory. uW * s = uJ = 1e6 pJ.
inline double cache_static_energy_pj(uint64_t bytes, double seconds, const HardwareDescription& hw,
                                     const CostTable& ct) {
  const MemCost& mc = ct.mem.at(hw.outermost().mem_type);
  return static_cast<double>(bytes) * mc.static_power_uw_per_byte * seconds * 1e6;
}

inline double total_area_um2(const HardwareDescription& hw, const CostTable& ct) {
  double area = 0;
  for (size_t i = 0; i < hw.levels.size(); i++) {
    const LevelSpec& l = hw.levels[i];
    switch (l.kind) {
      case LevelKind::Compute:
        area += static_cast<double>(l.pe_count) * ct.pe_area_um2;
        break;
      case LevelKind::Memory:
        if (!l.unbounded())
          area += static_cast<double>(l.size_bytes) * ct.mem.at(l.mem_type).area_um2_per_byte *
                  static_cast<double>(hw.instances(static_cast<int>(i)));
        break;
      case LevelKind::Routing:
        area += ct.route.at(l.topology).router_area_um2 * static_cast<double>(l.grid()) *
                static_cast<double>(hw.instances(static_cast<int>(i)));
        break;
    }
  }
  return area;
}

}  // namespace nestor
