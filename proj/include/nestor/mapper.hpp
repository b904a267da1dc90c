#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "nestor/arch.hpp"
#include "nestor/mapping.hpp"
#include "nestor/types.hpp"
#include "nestor/workload.hpp"

namespace nestor {

enum class DesignGoal : uint8_t { Throughput, Energy, EDP };

inline constexpr const char* goal_name(DesignGoal g) {
  switch (g) {
    case DesignGoal::Throughput: return "throughput";
    case DesignGoal::Energy: return "energy";
    case DesignGoal::EDP: return "edp";
  }
  return "?";
}

inline DesignGoal goal_from_string(const std::string& s) {
  if (s == "throughput") return DesignGoal::Throughput;
  if (s == "energy") return DesignGoal::Energy;
  if (s == "edp") return DesignGoal::EDP;
  throw std::runtime_error("unknown goal: " + s + " (throughput|energy|edp)");
}

namespace detail {

// Positions a loop bound can land on: one temporal slot per memory level, an
// x and a y slot per routing level, innermost first.
struct FactorSlot {
  int level = 0;
  bool spatial = false;
  Axis axis = Axis::X;
};

inline std::vector<FactorSlot> factor_slots(const HardwareDescription& hw) {
  std::vector<FactorSlot> slots;
  for (int li = 0; li < static_cast<int>(hw.levels.size()); li++) {
    switch (hw.levels[li].kind) {
      case LevelKind::Compute:
        break;
      case LevelKind::Memory:
        slots.push_back({li, false, Axis::X});
        break;
      case LevelKind::Routing:
        slots.push_back({li, true, Axis::X});
        slots.push_back({li, true, Axis::Y});
        break;
    }
  }
  return slots;
}

inline std::vector<uint64_t> divisors_of(uint64_t n) {
  std::vector<uint64_t> low, high;
  for (uint64_t d = 1; d * d <= n; d++) {
    if (n % d) continue;
    low.push_back(d);
    if (d != n / d) high.push_back(n / d);
  }
  low.insert(low.end(), high.rbegin(), high.rend());
  return low;
}

}  // namespace detail

// Enumerates every structurally valid mapping of `w` onto `hw` in a fixed
// deterministic order and streams each to `sink`; returns how many were
// produced. sink returning false stops the walk. Order: per-dim loop-bound
// factorizations over slots (dims N,M,C,R,S,E,F outer to inner, ascending
// divisors per slot), then tensor bypass masks, then per-level loop
// permutations with the innermost level varying fastest.
inline uint64_t construct_mappings(const IntraLayerWorkload& w, const HardwareDescription& hw,
                                   const MappingConstraints& cons,
                                   const std::function<bool(const Mapping&)>& sink,
                                   const std::map<int, uint64_t>& live_cache_bytes = {}) {
  using detail::FactorSlot;
  const int L = static_cast<int>(hw.levels.size());
  std::vector<FactorSlot> slots = detail::factor_slots(hw);
  const int S = static_cast<int>(slots.size());

  auto level_index = [&](const std::string& name) {
    for (int li = 0; li < L; li++)
      if (hw.levels[li].name == name) return li;
    throw std::runtime_error("constraint refers to unknown level: " + name);
  };

  // resolve fixed per-slot factors from constraints (pins and factor lists)
  std::array<std::vector<uint64_t>, 7> fixed;
  for (const auto& [d, vals] : cons.factors) {
    if (static_cast<int>(vals.size()) != S)
      throw std::runtime_error(std::string("factor list for ") + dim_letter(d) + " needs " +
                               std::to_string(S) + " slot entries");
    uint64_t prod = 1;
    for (uint64_t v : vals) {
      if (v < 1) throw std::runtime_error("factors must be >= 1");
      prod *= v;
    }
    if (prod != w.bounds[d])
      throw std::runtime_error(std::string("factors for ") + dim_letter(d) +
                               " do not multiply to the loop bound");
    fixed[static_cast<int>(d)] = vals;
  }
  for (const auto& pin : cons.pins) {
    int li = level_index(pin.level);
    if (hw.levels[li].kind != LevelKind::Memory)
      throw std::runtime_error("pin target must be a memory level: " + pin.level);
    if (!fixed[static_cast<int>(pin.d)].empty())
      throw std::runtime_error(std::string("dim ") + dim_letter(pin.d) +
                               " is pinned and has a factor list");
    std::vector<uint64_t> vals(S, 1);
    for (int s = 0; s < S; s++)
      if (!slots[s].spatial && slots[s].level == li) vals[s] = w.bounds[pin.d];
    fixed[static_cast<int>(pin.d)] = vals;
  }

  // divisor menu per dim
  std::array<std::vector<uint64_t>, 7> divs;
  for (Dim d : kAllDims) divs[static_cast<int>(d)] = detail::divisors_of(w.bounds[d]);

  std::vector<std::vector<uint64_t>> f(7, std::vector<uint64_t>(S, 1));
  std::vector<uint64_t> axis_used(S, 1);  // running spatial product per slot
  uint64_t pes_used = 1;
  uint64_t produced = 0;
  bool stopped = false;

  // bypass candidates: intermediate holders per tensor
  std::vector<std::pair<int, Tensor>> bypassable;
  for (Tensor t : kAllTensors) {
    if (t == Tensor::Filters && !w.has_filter) continue;
    int inner = -1, outer = -1;
    for (int li = 0; li < L; li++) {
      if (!detail::level_can_hold(hw.levels[li], t)) continue;
      if (inner < 0) inner = li;
      outer = li;
    }
    for (int li = inner + 1; li < outer; li++)
      if (detail::level_can_hold(hw.levels[li], t)) bypassable.push_back({li, t});
  }

  auto axis_cap = [&](int s) {
    const LevelSpec& l = hw.levels[slots[s].level];
    return slots[s].axis == Axis::X ? l.size_x : l.size_y;
  };

  // emit all loop-order permutations for the current factors and bypass mask
  auto emit_permutations = [&](Mapping& base) {
    // per-level permutation lists, pin positions enforced
    std::vector<std::vector<std::vector<LoopTerm>>> per_level(L);
    for (int li = 0; li < L; li++) {
      auto& menu = per_level[li];
      std::vector<LoopTerm> terms = base.per_level[li].temporal;  // canonical dim order
      std::vector<int> idx(terms.size());
      std::iota(idx.begin(), idx.end(), 0);
      do {
        std::vector<LoopTerm> order;
        order.reserve(terms.size());
        for (int i : idx) order.push_back(terms[i]);
        bool ok = true;
        for (const auto& pin : cons.pins) {
          if (pin.position < 0 || level_index(pin.level) != li) continue;
          for (size_t k = 0; k < order.size(); k++)
            if (order[k].d == pin.d && static_cast<int>(k) != pin.position) ok = false;
        }
        if (ok) menu.push_back(std::move(order));
      } while (std::next_permutation(idx.begin(), idx.end()));
      if (menu.empty()) return;  // pin position unsatisfiable
    }
    std::vector<size_t> pick(L, 0);
    while (!stopped) {
      Mapping m = base;
      for (int li = 0; li < L; li++) m.per_level[li].temporal = per_level[li][pick[li]];
      produced++;
      if (!sink(m)) {
        stopped = true;
        return;
      }
      int li = 0;
      while (li < L && ++pick[li] == per_level[li].size()) pick[li++] = 0;
      if (li == L) return;
    }
  };

  auto emit_bypasses = [&](Mapping& base) {
    uint64_t masks = uint64_t(1) << bypassable.size();
    for (uint64_t mask = 0; mask < masks && !stopped; mask++) {
      for (size_t b = 0; b < bypassable.size(); b++)
        base.bypass[bypassable[b].first][static_cast<int>(bypassable[b].second)] =
            (mask >> b) & 1;
      if (validate_mapping(base, w, hw, live_cache_bytes)) continue;
      emit_permutations(base);
    }
    for (auto& [li, t] : bypassable) base.bypass[li][static_cast<int>(t)] = false;
  };

  // assemble a mapping skeleton from the factor matrix and hand it onward
  auto emit_factors = [&]() {
    Mapping m;
    m.per_level.resize(L);
    m.bypass.assign(L, {false, false, false});
    for (int s = 0; s < S; s++) {
      for (Dim d : kAllDims) {
        uint64_t b = f[static_cast<int>(d)][s];
        if (b < 2) continue;
        if (slots[s].spatial)
          m.per_level[slots[s].level].spatial.push_back({d, b, slots[s].axis});
        else
          m.per_level[slots[s].level].temporal.push_back({d, b});
      }
    }
    emit_bypasses(m);
  };

  // choose dim d's factor for slot s and continue depth-first
  std::function<void(int, int, uint64_t)> assign = [&](int d, int s, uint64_t rem) {
    if (stopped) return;
    if (s == S) {
      if (rem != 1) return;
      if (d + 1 == 7)
        emit_factors();
      else
        assign(d + 1, 0, w.bounds.v[d + 1]);
      return;
    }
    const bool has_fixed = !fixed[d].empty();
    for (uint64_t q : divs[d]) {
      if (rem % q) continue;
      if (has_fixed && q != fixed[d][s]) continue;
      if (slots[s].spatial && q > 1) {
        if (axis_used[s] * q > axis_cap(s)) continue;
        if (pes_used * q > hw.total_pes()) continue;
        axis_used[s] *= q;
        pes_used *= q;
      }
      f[d][s] = q;
      assign(d, s + 1, rem / q);
      f[d][s] = 1;
      if (slots[s].spatial && q > 1) {
        axis_used[s] /= q;
        pes_used /= q;
      }
      if (stopped) return;
    }
  };
  assign(0, 0, w.bounds.v[0]);
  return produced;
}

// Search-space reduction ahead of evaluation. A mapping is dropped when it
// cannot meet the goal's resource-usage floor; explicit thresholds in the
// constraints apply under any goal.
inline bool mapping_pruned(const Mapping& m, const IntraLayerWorkload& w,
                           const HardwareDescription& hw, DesignGoal goal,
                           const MappingConstraints& cons) {
  std::optional<double> pe_min = cons.pe_utilization_min;
  std::optional<double> mem_min = cons.memory_utilization_min;
  if (goal == DesignGoal::Throughput && !pe_min) pe_min = 0.75;
  if (goal == DesignGoal::Energy && !mem_min) mem_min = 0.5;
  if (pe_min && pe_utilization(m, hw) < *pe_min) return true;
  if (mem_min && memory_utilization(m, w, hw) < *mem_min) return true;
  return false;
}

}  // namespace nestor
