#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <vector>

#include "nestor/arch.hpp"
#include "nestor/mapping.hpp"
#include "nestor/types.hpp"
#include "nestor/workload.hpp"

// Closed-form activity counting.
//
// The machine is modeled as a hierarchy of memory levels connected through
// routing levels. Each memory level holds, per tensor and per node instance,
// one axis-aligned tile of the tensor's index space: the box spanned by all
// loops mapped at that level or inside it. Whenever a temporal loop outer
// than the level advances, the box shifts; the traffic across the boundary
// to the next holder outward is exactly the volume of the new box not
// covered by the old one.
//
// Because every advance of a given outer loop shifts the box by the same
// constant offset (loops inside it always rewind to zero), the total fill
// volume per node has a closed form:
//
//   fills = tile + sum over outer temporal loops a of
//           trips(a) * (tile - overlap(shift(a)))
//
// where trips(a) counts how often a advances across the whole execution and
// overlap() intersects two boxes displaced by shift(a). Outputs move upward
// instead: a partial-sum tile is written out each time any loop at or outside
// the innermost output-relevant outer loop advances, and tiles whose box
// recurs are reloaded for further accumulation.

namespace nestor {

struct TensorTraffic {
  uint64_t reads = 0;
  uint64_t writes = 0;
  bool operator==(const TensorTraffic&) const = default;
};

// Element-transfer events on one routing level, split by class. A multicast
// event delivers one element to `fanout` destinations below; an accumulate
// event merges `fanin` partial sums traveling upward.
struct NocTraffic {
  uint64_t unicast = 0;
  std::map<uint64_t, uint64_t> multicast;   // fanout -> events
  std::map<uint64_t, uint64_t> accumulate;  // fanin -> events

  uint64_t total() const {
    uint64_t n = unicast;
    for (const auto& [f, c] : multicast) n += c;
    for (const auto& [f, c] : accumulate) n += c;
    return n;
  }
  bool empty() const { return total() == 0; }
  bool operator==(const NocTraffic&) const = default;
};

struct ActivityCounts {
  uint64_t macs = 0;
  std::vector<std::array<TensorTraffic, 3>> mem;  // [level][tensor]
  std::vector<std::array<NocTraffic, 3>> noc;     // [level][tensor], routing levels only

  bool operator==(const ActivityCounts&) const = default;

  TensorTraffic& at(int level, Tensor t) { return mem[level][static_cast<int>(t)]; }
  const TensorTraffic& at(int level, Tensor t) const { return mem[level][static_cast<int>(t)]; }

  uint64_t level_reads(int level) const {
    uint64_t n = 0;
    for (const auto& tt : mem[level]) n += tt.reads;
    return n;
  }
  uint64_t level_writes(int level) const {
    uint64_t n = 0;
    for (const auto& tt : mem[level]) n += tt.writes;
    return n;
  }
  uint64_t noc_events(int level) const {
    uint64_t n = 0;
    for (const auto& nt : noc[level]) n += nt.total();
    return n;
  }
};

namespace detail {

inline bool holds_tensor(const HardwareDescription& hw, const Mapping& m, int level, Tensor t) {
  return level_can_hold(hw.levels[level], t) && !m.bypassed(level, t);
}

// One loop of the flattened nest, outermost first.
struct FlatLoop {
  int level = 0;
  bool spatial = false;
  Dim d = Dim::N;
  uint64_t bound = 1;
};

inline std::vector<FlatLoop> flatten(const Mapping& m, const HardwareDescription& hw) {
  std::vector<FlatLoop> flat;
  for (int li = static_cast<int>(hw.levels.size()) - 1; li >= 0; li--) {
    for (const auto& t : m.per_level[li].temporal) flat.push_back({li, false, t.d, t.bound});
    for (const auto& s : m.per_level[li].spatial) flat.push_back({li, true, s.d, s.bound});
  }
  return flat;
}

// Exclusive suffix products per dim: suf[p][d] multiplies the d-bounds of all
// loops at positions >= p. suf[flat.size()] is all ones.
inline std::vector<std::array<uint64_t, 7>> suffix_products(const std::vector<FlatLoop>& flat) {
  std::vector<std::array<uint64_t, 7>> suf(flat.size() + 1);
  suf.back().fill(1);
  for (int p = static_cast<int>(flat.size()) - 1; p >= 0; p--) {
    suf[p] = suf[p + 1];
    suf[p][static_cast<int>(flat[p].d)] *= flat[p].bound;
  }
  return suf;
}

struct BoundaryContext {
  const std::vector<FlatLoop>& flat;
  const std::vector<std::array<uint64_t, 7>>& suf;
  int q_start;  // first flat position at a level <= Q

  uint64_t cum(Dim d) const { return suf[q_start][static_cast<int>(d)]; }

  // Origin shift of the per-node box in dim d when the temporal loop at flat
  // position p advances by one: its own digit weight, minus the rewind of
  // every temporal loop of the same dim strictly inside it that still lies
  // outside the tile.
  int64_t shift(int p, Dim d) const {
    int64_t s = 0;
    if (flat[p].d == d) s = static_cast<int64_t>(suf[p + 1][static_cast<int>(d)]);
    for (int q = p + 1; q < q_start; q++)
      if (!flat[q].spatial && flat[q].d == d)
        s -= static_cast<int64_t>((flat[q].bound - 1) * suf[q + 1][static_cast<int>(d)]);
    return s;
  }
};

// Overlap volume between a tensor box and the same box displaced by the
// shift of the loop at flat position p. Block dims only ever move in whole
// tile multiples, so any nonzero shift clears them; input rows/cols overlap
// partially because successive halo windows share pixels.
inline uint64_t overlap_volume(const BoundaryContext& ctx, const IntraLayerWorkload& w, Tensor t,
                               int p) {
  auto abs64 = [](int64_t x) { return static_cast<uint64_t>(x < 0 ? -x : x); };
  if (t == Tensor::Filters) {
    uint64_t ov = 1;
    for (Dim d : {Dim::M, Dim::C, Dim::R, Dim::S}) {
      if (ctx.shift(p, d) != 0) return 0;
      ov *= ctx.cum(d);
    }
    return ov;
  }
  // inputs
  for (Dim d : {Dim::N, Dim::C})
    if (ctx.shift(p, d) != 0) return 0;
  uint64_t tile_h = (ctx.cum(Dim::E) - 1) * w.strides.u + ctx.cum(Dim::R);
  uint64_t tile_w = (ctx.cum(Dim::F) - 1) * w.strides.v + ctx.cum(Dim::S);
  uint64_t dp = abs64(static_cast<int64_t>(w.strides.u) * ctx.shift(p, Dim::E) + ctx.shift(p, Dim::R));
  uint64_t dq = abs64(static_cast<int64_t>(w.strides.v) * ctx.shift(p, Dim::F) + ctx.shift(p, Dim::S));
  uint64_t rows = tile_h > dp ? tile_h - dp : 0;
  uint64_t cols = tile_w > dq ? tile_w - dq : 0;
  return ctx.cum(Dim::N) * ctx.cum(Dim::C) * rows * cols;
}

}  // namespace detail

inline ActivityCounts analyze_activity(const Mapping& m, const IntraLayerWorkload& w,
                                       const HardwareDescription& hw) {
  using namespace detail;
  const int L = static_cast<int>(hw.levels.size());
  ActivityCounts ac;
  ac.mem.assign(L, {});
  ac.noc.assign(L, {});
  ac.macs = w.macs();

  std::vector<FlatLoop> flat = flatten(m, hw);
  auto suf = suffix_products(flat);

  // active node instances of each level: product of mapped spatial bounds at
  // levels strictly outside it
  std::vector<uint64_t> nodes_outside(L + 1, 1);
  {
    uint64_t acc = 1;
    for (int li = L - 1; li >= 0; li--) {
      nodes_outside[li] = acc;
      acc *= m.per_level[li].spatial_product();
    }
  }

  for (Tensor t : kAllTensors) {
    if (t == Tensor::Filters && !w.has_filter) continue;

    std::vector<int> holders;
    for (int li = 0; li < L; li++)
      if (holds_tensor(hw, m, li, t)) holders.push_back(li);
    if (holders.empty()) continue;

    // per-MAC operand feeds at the innermost holder
    ac.at(holders.front(), t).reads += ac.macs;
    if (t == Tensor::Outputs) ac.at(holders.front(), t).writes += ac.macs;

    for (size_t hi = 0; hi + 1 < holders.size(); hi++) {
      int Q = holders[hi], P = holders[hi + 1];
      int q_start = 0;
      while (q_start < static_cast<int>(flat.size()) && flat[q_start].level > Q) q_start++;
      BoundaryContext ctx{flat, suf, q_start};
      uint64_t tile = tile_elements(m, w, Q, t);

      // outer temporal loops, outermost first
      std::vector<int> outer;
      for (int p = 0; p < q_start; p++)
        if (!flat[p].spatial) outer.push_back(p);

      // routing span between the two holders, innermost first
      struct SpanLevel {
        int level;
        uint64_t nn, rel, irr;
      };
      std::vector<SpanLevel> span;
      for (int li = Q + 1; li < P; li++) {
        if (hw.levels[li].kind != LevelKind::Routing) continue;
        if (m.per_level[li].spatial.empty()) continue;
        SpanLevel s{li, 1, 1, 1};
        for (const auto& sp : m.per_level[li].spatial) {
          s.nn *= sp.bound;
          (dim_touches(t, sp.d) ? s.rel : s.irr) *= sp.bound;
        }
        span.push_back(s);
      }
      uint64_t NN = 1, dup = 1;
      for (const auto& s : span) {
        NN *= s.nn;
        dup *= s.irr;
      }
      uint64_t a_q = nodes_outside[Q];
      uint64_t a_p = nodes_outside[P];

      if (t != Tensor::Outputs) {
        // downward fills: closed form over all outer-loop advances
        uint64_t per_node = tile;
        uint64_t trips_outer = 1;
        for (int p : outer) {
          uint64_t trips = (flat[p].bound - 1) * trips_outer;
          uint64_t ov = overlap_volume(ctx, w, t, p);
          per_node += trips * (tile - ov);
          trips_outer *= flat[p].bound;
        }
        ac.at(Q, t).writes += a_q * per_node;
        ac.at(P, t).reads += (a_q / dup) * per_node;
        // crossings per routing level: streams entering that level, relevant
        // splits at and inside it, full node fan at levels outside it
        for (size_t i = 0; i < span.size(); i++) {
          uint64_t outer_nn = 1, inner_rel = 1;
          for (size_t j = i + 1; j < span.size(); j++) outer_nn *= span[j].nn;
          for (size_t j = 0; j <= i; j++) inner_rel *= span[j].rel;
          uint64_t events = a_p * per_node * outer_nn * inner_rel;
          NocTraffic& nt = ac.noc[span[i].level][static_cast<int>(t)];
          if (span[i].irr > 1)
            nt.multicast[span[i].irr] += events;
          else
            nt.unicast += events;
        }
      } else {
        // upward partial-sum movement
        int jstar = -1;
        for (size_t i = 0; i < outer.size(); i++)
          if (dim_touches(Tensor::Outputs, flat[outer[i]].d)) jstar = static_cast<int>(i);
        uint64_t segs = 1, distinct = 1;
        for (size_t i = 0; i < outer.size(); i++) {
          if (static_cast<int>(i) <= jstar) segs *= flat[outer[i]].bound;
          if (dim_touches(Tensor::Outputs, flat[outer[i]].d)) distinct *= flat[outer[i]].bound;
        }
        uint64_t up = a_q * segs * tile;
        ac.at(Q, t).reads += up;
        ac.at(P, t).writes += up;
        if (dup > 1) ac.at(P, t).reads += up;  // read-modify-write while merging partials
        for (const auto& s : span) {
          NocTraffic& nt = ac.noc[s.level][static_cast<int>(t)];
          if (s.irr > 1)
            nt.accumulate[s.irr] += up;
          else
            nt.unicast += up;
        }
        if (segs > distinct) {
          // recurring boxes: reload the previous total into one node per
          // duplicate group, continue accumulating there
          uint64_t reload = a_p * (NN / dup) * (segs - distinct) * tile;
          ac.at(P, t).reads += reload;
          ac.at(Q, t).writes += reload;
          for (const auto& s : span) ac.noc[s.level][static_cast<int>(t)].unicast += reload;
        }
      }
    }
  }
  return ac;
}

inline uint64_t count_macs(const IntraLayerWorkload& w) { return w.macs(); }

inline TensorTraffic count_memory_accesses(const ActivityCounts& ac, int level, Tensor t) {
  return ac.at(level, t);
}

inline NocTraffic classify_noc_activities(const ActivityCounts& ac, int level) {
  NocTraffic all;
  for (const auto& nt : ac.noc[level]) {
    all.unicast += nt.unicast;
    for (const auto& [f, c] : nt.multicast) all.multicast[f] += c;
    for (const auto& [f, c] : nt.accumulate) all.accumulate[f] += c;
  }
  return all;
}

}  // namespace nestor
