// Shared fixtures: the worked-example machine (256 PEs behind a 16x16
// two-level bus), a small 4-PE machine, and the 16x32 vector-matrix workload
// with its two walkthrough mappings.
#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "nestor/arch.hpp"
#include "nestor/mapping.hpp"
#include "nestor/workload.hpp"

namespace fixtures {

using namespace nestor;

inline HardwareDescription eyeriss_like() {
  HardwareDescription hw;
  hw.levels.resize(5);
  hw.levels[0].name = "pe";
  hw.levels[0].kind = LevelKind::Compute;
  hw.levels[0].pe_count = 256;
  hw.levels[1].name = "spad";
  hw.levels[1].kind = LevelKind::Memory;
  hw.levels[1].mem_type = MemType::Scratchpad;
  hw.levels[1].size_bytes = 520;
  hw.levels[2].name = "noc";
  hw.levels[2].kind = LevelKind::Routing;
  hw.levels[2].topology = Topology::TwoLevelBus;
  hw.levels[2].size_x = 16;
  hw.levels[2].size_y = 16;
  hw.levels[3].name = "gbuf";
  hw.levels[3].kind = LevelKind::Memory;
  hw.levels[3].mem_type = MemType::SRAM;
  hw.levels[3].size_bytes = 110592;
  hw.levels[4].name = "dram";
  hw.levels[4].kind = LevelKind::Memory;
  hw.levels[4].mem_type = MemType::DRAM;
  hw.levels[4].size_bytes = 0;
  return hw;
}

inline HardwareDescription tiny4() {
  HardwareDescription hw;
  hw.levels.resize(4);
  hw.levels[0].name = "pe";
  hw.levels[0].kind = LevelKind::Compute;
  hw.levels[0].pe_count = 4;
  hw.levels[1].name = "buf";
  hw.levels[1].kind = LevelKind::Memory;
  hw.levels[1].mem_type = MemType::Scratchpad;
  hw.levels[1].size_bytes = 256;
  hw.levels[2].name = "noc";
  hw.levels[2].kind = LevelKind::Routing;
  hw.levels[2].topology = Topology::Bus;
  hw.levels[2].size_x = 2;
  hw.levels[2].size_y = 2;
  hw.levels[3].name = "dram";
  hw.levels[3].kind = LevelKind::Memory;
  hw.levels[3].mem_type = MemType::DRAM;
  hw.levels[3].size_bytes = 0;
  return hw;
}

inline IntraLayerWorkload make_workload(uint64_t n, uint64_t m, uint64_t c, uint64_t r, uint64_t s,
                                        uint64_t e, uint64_t f, uint32_t u = 1, uint32_t v = 1,
                                        bool filter = true) {
  IntraLayerWorkload w;
  w.bounds[Dim::N] = n;
  w.bounds[Dim::M] = m;
  w.bounds[Dim::C] = c;
  w.bounds[Dim::R] = r;
  w.bounds[Dim::S] = s;
  w.bounds[Dim::E] = e;
  w.bounds[Dim::F] = f;
  w.strides = {u, v};
  w.has_filter = filter;
  return w;
}

// vector(16) x matrix(16x32)
inline IntraLayerWorkload vecmat_16x32() { return make_workload(1, 32, 16, 1, 1, 1, 1); }

inline Mapping empty_mapping(const HardwareDescription& hw) {
  Mapping m;
  m.per_level.resize(hw.levels.size());
  m.bypass.assign(hw.levels.size(), {false, false, false});
  return m;
}

// Walkthrough mapping A: output block stays put while the reduction streams.
//   dram: m(4); gbuf: m(2), c(2); noc: m(4) on y; spad: c(8)
inline Mapping vecmat_map_a(const HardwareDescription& hw) {
  Mapping m = empty_mapping(hw);
  m.per_level[1].temporal = {{Dim::C, 8}};
  m.per_level[2].spatial = {{Dim::M, 4, Axis::Y}};
  m.per_level[3].temporal = {{Dim::M, 2}, {Dim::C, 2}};
  m.per_level[4].temporal = {{Dim::M, 4}};
  return m;
}

// Walkthrough mapping B: the reduction is split across levels, so partial
// sums bounce through the global buffer.
//   dram: c(2), m(2); gbuf: c(2), m(2); noc: c(2) on x, m(2) on y; spad: c(2), m(4)
inline Mapping vecmat_map_b(const HardwareDescription& hw) {
  Mapping m = empty_mapping(hw);
  m.per_level[1].temporal = {{Dim::C, 2}, {Dim::M, 4}};
  m.per_level[2].spatial = {{Dim::M, 2, Axis::Y}, {Dim::C, 2, Axis::X}};
  m.per_level[3].temporal = {{Dim::C, 2}, {Dim::M, 2}};
  m.per_level[4].temporal = {{Dim::C, 2}, {Dim::M, 2}};
  m.canonicalize_spatial();
  return m;
}

// Single PE behind one buffer; the shape where every loop is temporal.
inline HardwareDescription three_level() {
  HardwareDescription hw;
  hw.levels.resize(3);
  hw.levels[0].name = "pe";
  hw.levels[0].kind = LevelKind::Compute;
  hw.levels[0].pe_count = 1;
  hw.levels[1].name = "buf";
  hw.levels[1].kind = LevelKind::Memory;
  hw.levels[1].mem_type = MemType::Scratchpad;
  hw.levels[1].size_bytes = 0;
  hw.levels[2].name = "dram";
  hw.levels[2].kind = LevelKind::Memory;
  hw.levels[2].mem_type = MemType::DRAM;
  hw.levels[2].size_bytes = 0;
  return hw;
}

// Two memories around a 2x2 array; the interior level can be bypassed.
inline HardwareDescription five_level() {
  HardwareDescription hw;
  hw.levels.resize(5);
  hw.levels[0].name = "pe";
  hw.levels[0].kind = LevelKind::Compute;
  hw.levels[0].pe_count = 4;
  hw.levels[1].name = "l1";
  hw.levels[1].kind = LevelKind::Memory;
  hw.levels[1].mem_type = MemType::Scratchpad;
  hw.levels[1].size_bytes = 0;
  hw.levels[2].name = "bus";
  hw.levels[2].kind = LevelKind::Routing;
  hw.levels[2].topology = Topology::Bus;
  hw.levels[2].size_x = 2;
  hw.levels[2].size_y = 2;
  hw.levels[3].name = "l2";
  hw.levels[3].kind = LevelKind::Memory;
  hw.levels[3].mem_type = MemType::SRAM;
  hw.levels[3].size_bytes = 0;
  hw.levels[4].name = "dram";
  hw.levels[4].kind = LevelKind::Memory;
  hw.levels[4].mem_type = MemType::DRAM;
  hw.levels[4].size_bytes = 0;
  return hw;
}

// Randomized (workload, machine, mapping) triples for model-vs-simulation
// comparison. Machines are kept small so a literal simulation stays cheap.

inline IntraLayerWorkload random_workload(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  bool filter = pick(0, 99) < 85;
  uint64_t n = pick(1, 4);
  uint64_t m = pick(1, 6);
  uint64_t c = filter ? pick(1, 6) : 1;  // pooling-style windows reduce nothing
  uint64_t r = pick(1, 4);
  uint64_t s = pick(1, 4);
  uint64_t e = pick(1, 5);
  uint64_t f = pick(1, 5);
  uint32_t u = static_cast<uint32_t>(pick(1, 2));
  uint32_t v = static_cast<uint32_t>(pick(1, 2));
  return make_workload(n, m, c, r, s, e, f, u, v, filter);
}

inline HardwareDescription random_machine(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
    case 0: return three_level();
    case 1: {  // buffer below a 4x2 array
      HardwareDescription hw = three_level();
      hw.levels[0].pe_count = 8;
      LevelSpec bus;
      bus.name = "bus";
      bus.kind = LevelKind::Routing;
      bus.topology = Topology::Bus;
      bus.size_x = 4;
      bus.size_y = 2;
      hw.levels.insert(hw.levels.begin() + 2, bus);
      return hw;
    }
    case 2: {  // array directly above the PEs, buffer outside it
      HardwareDescription hw = three_level();
      hw.levels[0].pe_count = 8;
      LevelSpec bus;
      bus.name = "bus";
      bus.kind = LevelKind::Routing;
      bus.topology = Topology::Bus;
      bus.size_x = 4;
      bus.size_y = 2;
      hw.levels.insert(hw.levels.begin() + 1, bus);
      return hw;
    }
    default: return five_level();
  }
}

// Scatter each prime factor of every bound over the legal loop slots, then
// shuffle loop orders and flip bypass coins. Returns nothing if the draw
// violates mapping structure (retry with fresh randomness).
inline std::optional<Mapping> random_mapping(std::mt19937_64& rng, const IntraLayerWorkload& w,
                                             const HardwareDescription& hw) {
  struct Slot {
    int level;
    bool spatial;
    Axis axis;
    uint64_t cap;
  };
  std::vector<Slot> slots;
  for (int li = 0; li < static_cast<int>(hw.levels.size()); ++li) {
    const auto& L = hw.levels[li];
    if (L.kind == LevelKind::Memory) slots.push_back({li, false, Axis::X, 0});
    if (L.kind == LevelKind::Routing) {
      slots.push_back({li, true, Axis::X, L.size_x});
      slots.push_back({li, true, Axis::Y, L.size_y});
    }
  }
  std::vector<std::array<uint64_t, 7>> fac(slots.size(), {1, 1, 1, 1, 1, 1, 1});
  auto primes_of = [](uint64_t b) {
    std::vector<uint64_t> p;
    for (uint64_t q : {2, 3, 5, 7})
      while (b % q == 0) {
        p.push_back(q);
        b /= q;
      }
    return p;
  };
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (Dim d : kAllDims) {
    for (uint64_t p : primes_of(w.bounds[d])) {
      std::vector<int> mem_slots, sp_slots;
      for (int si = 0; si < static_cast<int>(slots.size()); ++si) {
        if (!slots[si].spatial)
          mem_slots.push_back(si);
        else if (slots[si].cap >= p)
          sp_slots.push_back(si);
      }
      int chosen;
      if (!sp_slots.empty() && coin(rng) < 0.35)
        chosen = sp_slots[std::uniform_int_distribution<size_t>(0, sp_slots.size() - 1)(rng)];
      else
        chosen = mem_slots[std::uniform_int_distribution<size_t>(0, mem_slots.size() - 1)(rng)];
      fac[chosen][static_cast<int>(d)] *= p;
      if (slots[chosen].spatial) slots[chosen].cap /= p;
    }
  }
  Mapping m = empty_mapping(hw);
  for (size_t si = 0; si < slots.size(); ++si) {
    const Slot& sl = slots[si];
    for (Dim d : kAllDims) {
      uint64_t b = fac[si][static_cast<int>(d)];
      if (b == 1) continue;
      if (sl.spatial)
        m.per_level[sl.level].spatial.push_back({d, b, sl.axis});
      else
        m.per_level[sl.level].temporal.push_back({d, b});
    }
  }
  for (auto& lm : m.per_level) std::shuffle(lm.temporal.begin(), lm.temporal.end(), rng);
  m.canonicalize_spatial();
  std::vector<int> mems;
  for (int li = 0; li < static_cast<int>(hw.levels.size()); ++li)
    if (hw.levels[li].kind == LevelKind::Memory) mems.push_back(li);
  for (Tensor t : kAllTensors)
    for (size_t k = 1; k + 1 < mems.size(); ++k)
      if (coin(rng) < 0.25) m.bypass[mems[k]][static_cast<int>(t)] = true;
  if (check_mapping_structure(m, w, hw)) return std::nullopt;
  return m;
}

struct RandomCase {
  IntraLayerWorkload w;
  HardwareDescription hw;
  Mapping m;
};

inline RandomCase random_case(std::mt19937_64& rng, uint64_t max_steps = 4000) {
  for (;;) {
    IntraLayerWorkload w = random_workload(rng);
    HardwareDescription hw = random_machine(rng);
    auto m = random_mapping(rng, w, hw);
    if (!m) continue;
    uint64_t steps = 1;
    for (const auto& lm : m->per_level)
      for (const auto& t : lm.temporal) steps *= t.bound;
    if (steps > max_steps) continue;
    return {std::move(w), std::move(hw), std::move(*m)};
  }
}

}  // namespace fixtures
