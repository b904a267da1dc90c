#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nestor/types.hpp"

namespace nestor {

enum class LevelKind : uint8_t { Compute, Memory, Routing };
enum class MemType : uint8_t { Register, Scratchpad, SRAM, DRAM };
enum class Topology : uint8_t { Bus, TwoLevelBus, Mesh };
enum class MemUsage : uint8_t { Shared, Inputs, Filters, Outputs };

inline constexpr const char* mem_type_name(MemType t) {
  switch (t) {
    case MemType::Register: return "register";
    case MemType::Scratchpad: return "scratchpad";
    case MemType::SRAM: return "sram";
    case MemType::DRAM: return "dram";
  }
  return "?";
}

inline constexpr const char* topology_name(Topology t) {
  switch (t) {
    case Topology::Bus: return "bus";
    case Topology::TwoLevelBus: return "two_level_bus";
    case Topology::Mesh: return "mesh";
  }
  return "?";
}

inline constexpr const char* usage_name(MemUsage u) {
  switch (u) {
    case MemUsage::Shared: return "shared";
    case MemUsage::Inputs: return "inputs";
    case MemUsage::Filters: return "filters";
    case MemUsage::Outputs: return "outputs";
  }
  return "?";
}

// One level of the hardware template. A description is an ordered list of
// these, innermost (compute) first. Consecutive Memory levels with non-Shared
// usage form one hierarchy position of parallel single-tensor buffers.
struct LevelSpec {
  std::string name;
  LevelKind kind = LevelKind::Memory;

  // compute
  uint64_t pe_count = 1;
  uint32_t pipeline_stages = 1;

  // memory; size 0 means unbounded (off-chip)
  MemType mem_type = MemType::SRAM;
  uint64_t size_bytes = 0;
  MemUsage usage = MemUsage::Shared;

  // routing
  Topology topology = Topology::Bus;
  uint32_t size_x = 1, size_y = 1;

  // optional overrides of the cost-table per-type bandwidth (elements/cycle)
  double read_bw = 0.0, write_bw = 0.0;
  uint32_t ports = 1;

  bool unbounded() const { return kind == LevelKind::Memory && size_bytes == 0; }
  uint64_t grid() const { return static_cast<uint64_t>(size_x) * size_y; }
};

struct HardwareDescription {
  std::vector<LevelSpec> levels;  // innermost (compute) to outermost (main memory)
  int precision_bits = 16;
  bool zero_skip = false;
  std::string zero_skip_below;  // level name; empty = outermost on-chip buffer
  int index = 0;                // position within the enumerated space

  int element_bytes() const { return precision_bits / 8; }
  const LevelSpec& compute() const { return levels.front(); }
  const LevelSpec& outermost() const { return levels.back(); }

  uint64_t total_pes() const { return compute().pe_count; }

  // physical instances of a level: product of routing grids outside it
  uint64_t instances(int level) const {
    uint64_t n = 1;
    for (size_t i = level + 1; i < levels.size(); i++)
      if (levels[i].kind == LevelKind::Routing) n *= levels[i].grid();
    return n;
  }
};

// Checks the structural rules of a description. Returns an error message, or
// nullopt when the description is well formed.
inline std::optional<std::string> validate_description(const HardwareDescription& hw) {
  const auto& ls = hw.levels;
  if (ls.size() < 2) return "hardware needs at least a compute level and a memory level";
  if (ls.front().kind != LevelKind::Compute) return "innermost level must be compute";
  if (ls.back().kind != LevelKind::Memory) return "outermost level must be memory";
  for (size_t i = 1; i < ls.size(); i++)
    if (ls[i].kind == LevelKind::Compute) return "compute must appear exactly once, innermost";
  for (size_t i = 0; i < ls.size(); i++) {
    const auto& l = ls[i];
    if (l.kind == LevelKind::Routing) {
      if (l.size_x < 1 || l.size_y < 1) return "routing grid must be at least 1x1: " + l.name;
      if (i + 1 < ls.size() && ls[i + 1].kind == LevelKind::Routing)
        return "adjacent routing levels are not supported: " + l.name;
    }
    if (l.kind == LevelKind::Memory && !l.unbounded() && l.size_bytes < 1)
      return "memory level has no capacity: " + l.name;
    if (l.kind == LevelKind::Compute && l.pe_count < 1)
      return "pe_count must be >= 1";
  }
  if (hw.precision_bits % 8 != 0 || hw.precision_bits <= 0)
    return "precision_bits must be a positive multiple of 8";

  // split-usage groups must partition {inputs, filters, outputs}
  for (size_t i = 1; i < ls.size();) {
    if (ls[i].kind != LevelKind::Memory || ls[i].usage == MemUsage::Shared) {
      i++;
      continue;
    }
    bool has[3] = {false, false, false};
    size_t j = i;
    while (j < ls.size() && ls[j].kind == LevelKind::Memory && ls[j].usage != MemUsage::Shared) {
      int t = static_cast<int>(ls[j].usage) - 1;
      if (has[t]) return "split usage repeats " + std::string(usage_name(ls[j].usage)) +
                         " at level " + ls[j].name;
      has[t] = true;
      j++;
    }
    if (!(has[0] && has[1] && has[2]))
      return "split usage at level " + ls[i].name + " does not cover inputs, filters and outputs";
    i = j;
  }

  uint64_t grid = 1;
  for (const auto& l : ls)
    if (l.kind == LevelKind::Routing) grid *= l.grid();
  if (grid > hw.total_pes() && hw.total_pes() > 0 && grid > 1) {
    // a grid wider than the PE array cannot be fully driven; allow equality
    if (grid > hw.total_pes()) return "routing grid exceeds pe_count";
  }
  return std::nullopt;
}

// One sweepable parameter axis of the hardware space.
struct ParameterSweep {
  std::vector<int> precision_bits{16};
  std::vector<bool> zero_skip{false};
  std::string zero_skip_below;

  struct LevelAxis {
    std::string name;
    LevelKind kind = LevelKind::Memory;
    std::vector<uint64_t> pe_count{1};
    std::vector<uint32_t> pipeline_stages{1};
    std::vector<MemType> mem_type{MemType::SRAM};
    std::vector<uint64_t> size_bytes{0};
    std::vector<MemUsage> usage{MemUsage::Shared};
    std::vector<Topology> topology{Topology::Bus};
    std::vector<std::pair<uint32_t, uint32_t>> routing_size{{1, 1}};
    std::vector<double> read_bw{0.0}, write_bw{0.0};
    std::vector<uint32_t> ports{1};
  };
  std::vector<LevelAxis> levels;  // innermost first, like HardwareDescription
};

struct EnumerationStats {
  uint64_t produced = 0;
  uint64_t rejected = 0;  // structurally invalid combinations filtered out
};

// Walks the Cartesian product of all parameter axes in deterministic
// lexicographic order (outer axes vary slowest), validating each candidate.
inline EnumerationStats enumerate_architectures(
    const ParameterSweep& sweep,
    const std::function<bool(const HardwareDescription&)>& sink) {
  EnumerationStats stats;

  // collect per-level choice counts
  struct Axis {
    int level;      // -1 for global axes
    int field;      // discriminator
    size_t count;
  };
  std::vector<Axis> axes;
  axes.push_back({-1, 0, sweep.precision_bits.size()});
  axes.push_back({-1, 1, sweep.zero_skip.size()});
  for (size_t li = 0; li < sweep.levels.size(); li++) {
    const auto& ax = sweep.levels[li];
    switch (ax.kind) {
      case LevelKind::Compute:
        axes.push_back({static_cast<int>(li), 2, ax.pe_count.size()});
        axes.push_back({static_cast<int>(li), 3, ax.pipeline_stages.size()});
        break;
      case LevelKind::Memory:
        axes.push_back({static_cast<int>(li), 4, ax.mem_type.size()});
        axes.push_back({static_cast<int>(li), 5, ax.size_bytes.size()});
        axes.push_back({static_cast<int>(li), 6, ax.usage.size()});
        axes.push_back({static_cast<int>(li), 9, ax.read_bw.size()});
        axes.push_back({static_cast<int>(li), 10, ax.write_bw.size()});
        axes.push_back({static_cast<int>(li), 11, ax.ports.size()});
        break;
      case LevelKind::Routing:
        axes.push_back({static_cast<int>(li), 7, ax.topology.size()});
        axes.push_back({static_cast<int>(li), 8, ax.routing_size.size()});
        break;
    }
  }
  for (const auto& a : axes)
    if (a.count == 0) return stats;  // an empty axis empties the space

  std::vector<size_t> pick(axes.size(), 0);
  int arch_index = 0;
  while (true) {
    HardwareDescription hw;
    for (size_t k = 0; k < axes.size(); k++) {
      const Axis& a = axes[k];
      size_t c = pick[k];
      if (a.level < 0) {
        if (a.field == 0) hw.precision_bits = sweep.precision_bits[c];
        if (a.field == 1) hw.zero_skip = sweep.zero_skip[c];
        continue;
      }
      if (hw.levels.size() <= static_cast<size_t>(a.level)) hw.levels.resize(a.level + 1);
      LevelSpec& l = hw.levels[a.level];
      const auto& ax = sweep.levels[a.level];
      l.name = ax.name;
      l.kind = ax.kind;
      switch (a.field) {
        case 2: l.pe_count = ax.pe_count[c]; break;
        case 3: l.pipeline_stages = ax.pipeline_stages[c]; break;
        case 4: l.mem_type = ax.mem_type[c]; break;
        case 5: l.size_bytes = ax.size_bytes[c]; break;
        case 6: l.usage = ax.usage[c]; break;
        case 7: l.topology = ax.topology[c]; break;
        case 8:
          l.size_x = ax.routing_size[c].first;
          l.size_y = ax.routing_size[c].second;
          break;
        case 9: l.read_bw = ax.read_bw[c]; break;
        case 10: l.write_bw = ax.write_bw[c]; break;
        case 11: l.ports = ax.ports[c]; break;
      }
    }
    hw.zero_skip_below = sweep.zero_skip_below;

    if (validate_description(hw)) {
      stats.rejected++;
    } else {
      hw.index = arch_index++;
      stats.produced++;
      if (!sink(hw)) return stats;
    }

    // odometer, last axis fastest
    size_t k = axes.size();
    while (k > 0) {
      k--;
      if (++pick[k] < axes[k].count) break;
      pick[k] = 0;
      if (k == 0) return stats;
    }
  }
}

inline std::vector<HardwareDescription> enumerate_architectures(const ParameterSweep& sweep) {
  std::vector<HardwareDescription> out;
  enumerate_architectures(sweep, [&](const HardwareDescription& hw) {
    out.push_back(hw);
    return true;
  });
  return out;
}

namespace detail {

// Whether a level's usage restriction permits staging tensor t there.
inline bool level_can_hold(const LevelSpec& l, Tensor t) {
  if (l.kind != LevelKind::Memory) return false;
  if (l.usage == MemUsage::Shared) return true;
  MemUsage want = t == Tensor::Inputs    ? MemUsage::Inputs
                  : t == Tensor::Filters ? MemUsage::Filters
                                         : MemUsage::Outputs;
  return l.usage == want;
}

inline MemType mem_type_from_string(const std::string& s) {
  if (s == "register") return MemType::Register;
  if (s == "scratchpad") return MemType::Scratchpad;
  if (s == "sram") return MemType::SRAM;
  if (s == "dram") return MemType::DRAM;
  throw std::runtime_error("unknown mem_type: " + s);
}

inline Topology topology_from_string(const std::string& s) {
  if (s == "bus") return Topology::Bus;
  if (s == "two_level_bus") return Topology::TwoLevelBus;
  if (s == "mesh") return Topology::Mesh;
  throw std::runtime_error("unknown topology: " + s);
}

inline MemUsage usage_from_string(const std::string& s) {
  if (s == "shared") return MemUsage::Shared;
  if (s == "inputs") return MemUsage::Inputs;
  if (s == "filters") return MemUsage::Filters;
  if (s == "outputs") return MemUsage::Outputs;
  throw std::runtime_error("unknown usage: " + s);
}

template <typename T, typename F>
std::vector<T> list_of(const nlohmann::json& j, F&& conv) {
  std::vector<T> out;
  if (j.is_array())
    for (const auto& e : j) out.push_back(conv(e));
  else
    out.push_back(conv(j));
  return out;
}

}  // namespace detail

// Parses a hardware sweep document: {"precision_bits": [...], "levels": [...]}
// with levels listed innermost first; every scalar field may be an array of
// candidate values.
inline ParameterSweep parse_sweep(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  ParameterSweep sweep;
  if (doc.contains("precision_bits"))
    sweep.precision_bits = detail::list_of<int>(doc["precision_bits"],
                                                [](const nlohmann::json& e) { return e.get<int>(); });
  if (doc.contains("zero_skip")) {
    const auto& z = doc["zero_skip"];
    sweep.zero_skip = detail::list_of<bool>(z.value("enabled", nlohmann::json(false)),
                                            [](const nlohmann::json& e) { return e.get<bool>(); });
    sweep.zero_skip_below = z.value("below", std::string());
  }
  if (!doc.contains("levels") || !doc["levels"].is_array() || doc["levels"].empty())
    throw std::runtime_error("hardware sweep needs a non-empty levels array");

  for (const auto& jl : doc["levels"]) {
    ParameterSweep::LevelAxis ax;
    ax.name = jl.value("name", std::string("level") + std::to_string(sweep.levels.size()));
    std::string kind = jl.value("kind", std::string("memory"));
    auto u64list = [](const nlohmann::json& e) { return e.get<uint64_t>(); };
    auto u32list = [](const nlohmann::json& e) { return e.get<uint32_t>(); };
    if (kind == "compute") {
      ax.kind = LevelKind::Compute;
      if (jl.contains("pe_count")) ax.pe_count = detail::list_of<uint64_t>(jl["pe_count"], u64list);
      if (jl.contains("pipeline_stages"))
        ax.pipeline_stages = detail::list_of<uint32_t>(jl["pipeline_stages"], u32list);
    } else if (kind == "memory") {
      ax.kind = LevelKind::Memory;
      if (jl.contains("mem_type"))
        ax.mem_type = detail::list_of<MemType>(jl["mem_type"], [](const nlohmann::json& e) {
          return detail::mem_type_from_string(e.get<std::string>());
        });
      if (jl.contains("size_bytes"))
        ax.size_bytes = detail::list_of<uint64_t>(jl["size_bytes"], [](const nlohmann::json& e) {
          if (e.is_string()) {
            std::string s = e.get<std::string>();
            if (s == "unbounded") return uint64_t{0};
            return static_cast<uint64_t>(std::stoull(s));
          }
          return e.get<uint64_t>();
        });
      if (jl.contains("usage"))
        ax.usage = detail::list_of<MemUsage>(jl["usage"], [](const nlohmann::json& e) {
          return detail::usage_from_string(e.get<std::string>());
        });
      if (jl.contains("read_bw"))
        ax.read_bw = detail::list_of<double>(jl["read_bw"],
                                             [](const nlohmann::json& e) { return e.get<double>(); });
      if (jl.contains("write_bw"))
        ax.write_bw = detail::list_of<double>(jl["write_bw"],
                                              [](const nlohmann::json& e) { return e.get<double>(); });
      if (jl.contains("ports")) ax.ports = detail::list_of<uint32_t>(jl["ports"], u32list);
    } else if (kind == "routing") {
      ax.kind = LevelKind::Routing;
      if (jl.contains("topology"))
        ax.topology = detail::list_of<Topology>(jl["topology"], [](const nlohmann::json& e) {
          return detail::topology_from_string(e.get<std::string>());
        });
      if (jl.contains("routing_size"))
        ax.routing_size = detail::list_of<std::pair<uint32_t, uint32_t>>(
            jl["routing_size"], [](const nlohmann::json& e) {
              if (!e.is_array() || e.size() != 2)
                throw std::runtime_error("routing_size entries must be [x, y]");
              return std::make_pair(e[0].get<uint32_t>(), e[1].get<uint32_t>());
            });
    } else {
      throw std::runtime_error("unknown level kind: " + kind);
    }
    sweep.levels.push_back(std::move(ax));
  }
  return sweep;
}

}  // namespace nestor
