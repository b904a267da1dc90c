#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nestor/arch.hpp"
#include "nestor/types.hpp"
#include "nestor/workload.hpp"

namespace nestor {

enum class Axis : uint8_t { X = 0, Y = 1 };

struct LoopTerm {
  Dim d = Dim::N;
  uint64_t bound = 1;
  bool operator==(const LoopTerm&) const = default;
};

struct SpatialTerm {
  Dim d = Dim::N;
  uint64_t bound = 1;
  Axis axis = Axis::X;
  bool operator==(const SpatialTerm&) const = default;
};

// Sub-mapping of one hardware level. Temporal loops are ordered outermost
// first and the order is significant; spatial loops are kept in canonical
// (dim, axis) order since parallel loops have no sequence. Bound-1 loops are
// never stored: they are identity loops.
struct LevelMapping {
  std::vector<LoopTerm> temporal;
  std::vector<SpatialTerm> spatial;

  bool operator==(const LevelMapping&) const = default;

  uint64_t dim_product(Dim d) const {
    uint64_t p = 1;
    for (const auto& t : temporal)
      if (t.d == d) p *= t.bound;
    for (const auto& s : spatial)
      if (s.d == d) p *= s.bound;
    return p;
  }
  uint64_t spatial_product() const {
    uint64_t p = 1;
    for (const auto& s : spatial) p *= s.bound;
    return p;
  }
  uint64_t axis_product(Axis a) const {
    uint64_t p = 1;
    for (const auto& s : spatial)
      if (s.axis == a) p *= s.bound;
    return p;
  }
};

// A complete mapping of one workload onto one hardware description.
// per_level is aligned with HardwareDescription::levels (innermost first).
struct Mapping {
  std::vector<LevelMapping> per_level;
  // bypass[level][tensor]: the level does not stage that tensor. Only
  // intermediate memory levels may bypass.
  std::vector<std::array<bool, 3>> bypass;

  bool operator==(const Mapping&) const = default;

  uint64_t dim_product(Dim d) const {
    uint64_t p = 1;
    for (const auto& lm : per_level) p *= lm.dim_product(d);
    return p;
  }
  uint64_t active_pes() const {
    uint64_t p = 1;
    for (const auto& lm : per_level) p *= lm.spatial_product();
    return p;
  }
  bool bypassed(int level, Tensor t) const {
    return bypass[level][static_cast<int>(t)];
  }

  // cumulative bound of dim d at `level` and everything inside it
  uint64_t cum(int level, Dim d) const {
    uint64_t p = 1;
    for (int i = 0; i <= level && i < static_cast<int>(per_level.size()); i++)
      p *= per_level[i].dim_product(d);
    return p;
  }

  void canonicalize_spatial() {
    for (auto& lm : per_level)
      std::sort(lm.spatial.begin(), lm.spatial.end(), [](const SpatialTerm& a, const SpatialTerm& b) {
        if (a.d != b.d) return a.d < b.d;
        return a.axis < b.axis;
      });
  }
};

// Tile extents of `tensor` held at `level`: the index-space box spanned by all
// loops at that level and inside it. Input rows/cols are halo-inclusive.
inline uint64_t tile_elements(const Mapping& m, const IntraLayerWorkload& w, int level, Tensor t) {
  auto cum = [&](Dim d) { return m.cum(level, d); };
  switch (t) {
    case Tensor::Inputs: {
      uint64_t rows = (cum(Dim::E) - 1) * w.strides.u + cum(Dim::R);
      uint64_t cols = (cum(Dim::F) - 1) * w.strides.v + cum(Dim::S);
      return cum(Dim::N) * cum(Dim::C) * rows * cols;
    }
    case Tensor::Filters:
      if (!w.has_filter) return 0;
      return cum(Dim::M) * cum(Dim::C) * cum(Dim::R) * cum(Dim::S);
    case Tensor::Outputs:
      return cum(Dim::N) * cum(Dim::M) * cum(Dim::E) * cum(Dim::F);
  }
  return 0;
}

// Bytes of `tensor` resident at `level` under mapping m (0 when bypassed).
inline uint64_t required_footprint(const Mapping& m, const IntraLayerWorkload& w,
                                   const HardwareDescription& hw, int level, Tensor t) {
  if (hw.levels[level].kind != LevelKind::Memory) return 0;
  if (m.bypassed(level, t)) return 0;
  const LevelSpec& l = hw.levels[level];
  if (l.usage != MemUsage::Shared) {
    MemUsage want = t == Tensor::Inputs    ? MemUsage::Inputs
                    : t == Tensor::Filters ? MemUsage::Filters
                                           : MemUsage::Outputs;
    if (l.usage != want) return 0;
  }
  return tile_elements(m, w, level, t) * hw.element_bytes();
}

struct CapacityViolation {
  int level = -1;
  std::string level_name;
  uint64_t required = 0, available = 0;
};

// Capacity and structure check. live_cache_bytes maps level index -> bytes
// already pinned there (resident forward activations); those bytes are
// unavailable to the mapping.
inline std::optional<CapacityViolation> validate_mapping(
    const Mapping& m, const IntraLayerWorkload& w, const HardwareDescription& hw,
    const std::map<int, uint64_t>& live_cache_bytes = {}) {
  for (size_t i = 0; i < hw.levels.size(); i++) {
    const LevelSpec& l = hw.levels[i];
    if (l.kind != LevelKind::Memory || l.unbounded()) continue;
    uint64_t need = 0;
    for (Tensor t : kAllTensors) need += required_footprint(m, w, hw, static_cast<int>(i), t);
    auto it = live_cache_bytes.find(static_cast<int>(i));
    if (it != live_cache_bytes.end()) need += it->second;
    if (need > l.size_bytes)
      return CapacityViolation{static_cast<int>(i), l.name, need, l.size_bytes};
  }
  return std::nullopt;
}

// Structural soundness of a mapping against its workload and hardware:
// bound reconstruction, loop placement, spatial fit, bypass legality.
inline std::optional<std::string> check_mapping_structure(const Mapping& m,
                                                          const IntraLayerWorkload& w,
                                                          const HardwareDescription& hw) {
  if (m.per_level.size() != hw.levels.size() || m.bypass.size() != hw.levels.size())
    return "mapping does not cover every hardware level";
  for (Dim d : kAllDims)
    if (m.dim_product(d) != w.bounds[d])
      return std::string("bound product mismatch on ") + dim_letter(d);
  for (size_t i = 0; i < hw.levels.size(); i++) {
    const LevelSpec& l = hw.levels[i];
    const LevelMapping& lm = m.per_level[i];
    for (const auto& t : lm.temporal)
      if (t.bound < 2) return "identity temporal loop stored at " + l.name;
    for (const auto& s : lm.spatial)
      if (s.bound < 2) return "identity spatial loop stored at " + l.name;
    switch (l.kind) {
      case LevelKind::Compute:
        if (!lm.temporal.empty() || !lm.spatial.empty())
          return "compute level carries loops";
        break;
      case LevelKind::Memory:
        if (!lm.spatial.empty()) return "spatial loops on memory level " + l.name;
        break;
      case LevelKind::Routing:
        if (!lm.temporal.empty()) return "temporal loops on routing level " + l.name;
        if (lm.axis_product(Axis::X) > l.size_x || lm.axis_product(Axis::Y) > l.size_y)
          return "spatial bounds exceed routing grid at " + l.name;
        break;
    }
  }
  if (m.active_pes() > hw.total_pes()) return "active PEs exceed pe_count";

  // Bypass is a memory-level notion, and every tensor must keep its edge
  // holders: the innermost and outermost level able to stage it do stage it.
  for (size_t i = 0; i < hw.levels.size(); i++)
    for (Tensor t : kAllTensors)
      if (m.bypassed(static_cast<int>(i), t) && hw.levels[i].kind != LevelKind::Memory)
        return "bypass on a non-memory level";
  for (Tensor t : kAllTensors) {
    if (t == Tensor::Filters && !w.has_filter) continue;
    int inner = -1, outer = -1;
    for (size_t i = 0; i < hw.levels.size(); i++) {
      if (!detail::level_can_hold(hw.levels[i], t)) continue;
      if (inner < 0) inner = static_cast<int>(i);
      outer = static_cast<int>(i);
    }
    if (inner < 0) return std::string("no level can hold ") + tensor_name(t);
    if (m.bypassed(inner, t) || m.bypassed(outer, t))
      return std::string("bypass on an edge holder of ") + tensor_name(t);
  }
  return std::nullopt;
}

// Search-space constraints: pinned loops, fixed per-level factors, pruning
// thresholds. Absent thresholds fall back to goal defaults at prune time.
struct MappingConstraints {
  struct Pin {
    Dim d = Dim::N;
    std::string level;       // level name the dimension is confined to
    int position = -1;       // index in that level's temporal order, -1 = any
  };
  std::vector<Pin> pins;
  // dim -> fixed factor per slot, innermost first. Slots are the memory
  // levels plus two per routing level (x axis, then y); the list length must
  // match and the factors must multiply to the workload bound.
  std::map<Dim, std::vector<uint64_t>> factors;
  std::optional<double> pe_utilization_min;
  std::optional<double> memory_utilization_min;

  bool empty() const {
    return pins.empty() && factors.empty() && !pe_utilization_min && !memory_utilization_min;
  }
};

inline MappingConstraints parse_constraints(const std::string& text) {
  nlohmann::json doc = nlohmann::json::parse(text);
  MappingConstraints c;
  if (doc.contains("pins"))
    for (const auto& jp : doc["pins"]) {
      MappingConstraints::Pin p;
      std::string d = jp.at("dim").get<std::string>();
      p.d = dim_from_letter(d.at(0));
      p.level = jp.at("level").get<std::string>();
      p.position = jp.value("position", -1);
      c.pins.push_back(std::move(p));
    }
  if (doc.contains("factors"))
    for (auto it = doc["factors"].begin(); it != doc["factors"].end(); ++it) {
      Dim d = dim_from_letter(it.key().at(0));
      std::vector<uint64_t> fs;
      for (const auto& e : it.value()) fs.push_back(e.get<uint64_t>());
      c.factors[d] = std::move(fs);
    }
  if (doc.contains("pe_utilization_min")) c.pe_utilization_min = doc["pe_utilization_min"].get<double>();
  if (doc.contains("memory_utilization_min"))
    c.memory_utilization_min = doc["memory_utilization_min"].get<double>();
  return c;
}

// Innermost bounded non-register memory level if one exists, otherwise the
// innermost memory level; used for the low-utilization prune rule.
inline int pruning_memory_level(const HardwareDescription& hw) {
  int fallback = -1;
  for (size_t i = 1; i < hw.levels.size(); i++) {
    const LevelSpec& l = hw.levels[i];
    if (l.kind != LevelKind::Memory || l.unbounded()) continue;
    if (fallback < 0) fallback = static_cast<int>(i);
    if (l.mem_type != MemType::Register) return static_cast<int>(i);
  }
  return fallback;
}

inline double pe_utilization(const Mapping& m, const HardwareDescription& hw) {
  return static_cast<double>(m.active_pes()) / static_cast<double>(hw.total_pes());
}

inline double memory_utilization(const Mapping& m, const IntraLayerWorkload& w,
                                 const HardwareDescription& hw) {
  int level = pruning_memory_level(hw);
  if (level < 0) return 1.0;
  uint64_t used = 0;
  for (Tensor t : kAllTensors) used += required_footprint(m, w, hw, level, t);
  return static_cast<double>(used) / static_cast<double>(hw.levels[level].size_bytes);
}

// --- mapping (de)serialization -------------------------------------------

inline nlohmann::json mapping_to_json(const Mapping& m, const HardwareDescription& hw) {
  nlohmann::json levels = nlohmann::json::array();
  for (size_t i = 0; i < hw.levels.size(); i++) {
    nlohmann::json jl;
    jl["level"] = hw.levels[i].name;
    nlohmann::json temporal = nlohmann::json::array();
    for (const auto& t : m.per_level[i].temporal)
      temporal.push_back({{"dim", std::string(1, dim_letter(t.d))}, {"bound", t.bound}});
    nlohmann::json spatial = nlohmann::json::array();
    for (const auto& s : m.per_level[i].spatial)
      spatial.push_back({{"dim", std::string(1, dim_letter(s.d))},
                         {"bound", s.bound},
                         {"axis", s.axis == Axis::X ? "x" : "y"}});
    if (!temporal.empty()) jl["temporal"] = temporal;
    if (!spatial.empty()) jl["spatial"] = spatial;
    nlohmann::json byp = nlohmann::json::array();
    for (Tensor t : kAllTensors)
      if (m.bypassed(static_cast<int>(i), t)) byp.push_back(tensor_name(t));
    if (!byp.empty()) jl["bypass"] = byp;
    levels.push_back(std::move(jl));
  }
  return nlohmann::json{{"levels", levels}};
}

inline Mapping mapping_from_json(const nlohmann::json& doc, const HardwareDescription& hw) {
  Mapping m;
  m.per_level.resize(hw.levels.size());
  m.bypass.assign(hw.levels.size(), {false, false, false});
  auto level_index = [&](const std::string& name) -> int {
    for (size_t i = 0; i < hw.levels.size(); i++)
      if (hw.levels[i].name == name) return static_cast<int>(i);
    throw std::runtime_error("mapping refers to unknown level: " + name);
  };
  for (const auto& jl : doc.at("levels")) {
    int li = level_index(jl.at("level").get<std::string>());
    if (jl.contains("temporal"))
      for (const auto& jt : jl["temporal"]) {
        LoopTerm t;
        t.d = dim_from_letter(jt.at("dim").get<std::string>().at(0));
        t.bound = jt.at("bound").get<uint64_t>();
        if (t.bound > 1) m.per_level[li].temporal.push_back(t);
      }
    if (jl.contains("spatial"))
      for (const auto& js : jl["spatial"]) {
        SpatialTerm s;
        s.d = dim_from_letter(js.at("dim").get<std::string>().at(0));
        s.bound = js.at("bound").get<uint64_t>();
        s.axis = js.value("axis", "x") == "y" ? Axis::Y : Axis::X;
        if (s.bound > 1) m.per_level[li].spatial.push_back(s);
      }
    if (jl.contains("bypass"))
      for (const auto& jb : jl["bypass"]) {
        std::string name = jb.get<std::string>();
        for (Tensor t : kAllTensors)
          if (name == tensor_name(t)) m.bypass[li][static_cast<int>(t)] = true;
      }
  }
  m.canonicalize_spatial();
  return m;
}

}  // namespace nestor
