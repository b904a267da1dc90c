#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "nestor/activity.hpp"
#include "nestor/arch.hpp"
#include "nestor/mapping.hpp"
#include "nestor/types.hpp"
#include "nestor/workload.hpp"

// Reference execution of a mapping by brute force. Instead of the closed
// forms in activity.hpp, this walks the temporal loop nest one iteration at
// a time, keeps the literal resident box of every (level, tensor) pair, and
// measures traffic as actual box differences; transfer sharing is recovered
// from coordinate sets rather than divisor products. The two paths must
// agree to the element.

namespace nestor {

struct SimLog {
  ActivityCounts counts;
  uint64_t steps = 0;      // loop-nest iterations of the outer temporal nest
  bool completed = false;  // false when the iteration guard tripped
};

namespace oracle_detail {

struct Box4 {
  std::array<int64_t, 4> o{};
  std::array<int64_t, 4> len{};
  bool operator==(const Box4&) const = default;
  uint64_t vol() const {
    uint64_t v = 1;
    for (int i = 0; i < 4; i++) v *= static_cast<uint64_t>(len[i]);
    return v;
  }
};

inline uint64_t intersection_volume(const Box4& a, const Box4& b) {
  uint64_t v = 1;
  for (int i = 0; i < 4; i++) {
    int64_t lo = std::max(a.o[i], b.o[i]);
    int64_t hi = std::min(a.o[i] + a.len[i], b.o[i] + b.len[i]);
    if (hi <= lo) return 0;
    v *= static_cast<uint64_t>(hi - lo);
  }
  return v;
}

inline Box4 make_box(Tensor t, const std::array<int64_t, 7>& o, const std::array<int64_t, 7>& ext,
                     const Stride2& st) {
  auto O = [&](Dim d) { return o[static_cast<int>(d)]; };
  auto X = [&](Dim d) { return ext[static_cast<int>(d)]; };
  switch (t) {
    case Tensor::Inputs: {
      int64_t th = (X(Dim::E) - 1) * st.u + X(Dim::R);
      int64_t tw = (X(Dim::F) - 1) * st.v + X(Dim::S);
      return {{O(Dim::N), O(Dim::C), st.u * O(Dim::E) + O(Dim::R), st.v * O(Dim::F) + O(Dim::S)},
              {X(Dim::N), X(Dim::C), th, tw}};
    }
    case Tensor::Filters:
      return {{O(Dim::M), O(Dim::C), O(Dim::R), O(Dim::S)},
              {X(Dim::M), X(Dim::C), X(Dim::R), X(Dim::S)}};
    case Tensor::Outputs:
      return {{O(Dim::N), O(Dim::M), O(Dim::E), O(Dim::F)},
              {X(Dim::N), X(Dim::M), X(Dim::E), X(Dim::F)}};
  }
  return {};
}

// Static view of one holder-pair boundary: the outer temporal loops that move
// the box, instance/stream counts recovered from explicit coordinate
// enumeration, and per-routing-level transfer shapes.
struct Boundary {
  Tensor t = Tensor::Inputs;
  int Q = 0, P = 0;
  int q_start = 0;
  struct OuterLoop {
    int odo = 0;  // odometer digit index
    Dim d = Dim::N;
    uint64_t w = 1;  // elements of d spanned per digit step
  };
  std::vector<OuterLoop> outer;
  std::array<int64_t, 7> extent{};  // tile extent per dim
  uint64_t n_instances = 1;
  uint64_t n_groups = 1;    // distinct served streams per box change
  uint64_t group_size = 1;  // duplicate nodes sharing one stream
  struct SpanLevel {
    int level = -1;
    uint64_t down_transfers = 0;               // per unit volume per box change
    std::map<uint64_t, uint64_t> down_shape;   // fanout -> transfers
    uint64_t up_fanin = 1;                     // merging width for partial sums
  };
  std::vector<SpanLevel> span;  // innermost first

  Box4 cur;
  bool has_cur = false;
  std::set<std::array<int64_t, 4>> seen;  // output box origins already produced
};

}  // namespace oracle_detail

inline SimLog simulate(const Mapping& m, const IntraLayerWorkload& w, const HardwareDescription& hw,
                       uint64_t max_iterations = 10'000'000) {
  using namespace oracle_detail;
  const int L = static_cast<int>(hw.levels.size());
  SimLog log;
  log.counts.mem.assign(L, {});
  log.counts.noc.assign(L, {});

  std::vector<detail::FlatLoop> flat = detail::flatten(m, hw);
  const int n = static_cast<int>(flat.size());

  // odometer digits: temporal loops, outermost first
  std::vector<int> odo_flat;
  uint64_t total_steps = 1, spatial_all = 1;
  for (int p = 0; p < n; p++) {
    if (flat[p].spatial)
      spatial_all *= flat[p].bound;
    else {
      odo_flat.push_back(p);
      total_steps *= flat[p].bound;
    }
  }
  if (total_steps > max_iterations) return log;
  log.counts.macs = total_steps * spatial_all;

  // elements of dim d covered per unit step of the loop at position p: the
  // literal product of matching bounds nested inside it
  auto weight = [&](int p, Dim d) {
    uint64_t v = 1;
    for (int q = p + 1; q < n; q++)
      if (flat[q].d == d) v *= flat[q].bound;
    return v;
  };

  std::vector<Boundary> bounds;
  for (Tensor t : kAllTensors) {
    if (t == Tensor::Filters && !w.has_filter) continue;
    std::vector<int> holders;
    for (int li = 0; li < L; li++)
      if (detail::holds_tensor(hw, m, li, t)) holders.push_back(li);
    if (holders.empty()) continue;

    log.counts.at(holders.front(), t).reads += log.counts.macs;
    if (t == Tensor::Outputs) log.counts.at(holders.front(), t).writes += log.counts.macs;

    for (size_t hi = 0; hi + 1 < holders.size(); hi++) {
      Boundary b;
      b.t = t;
      b.Q = holders[hi];
      b.P = holders[hi + 1];
      b.q_start = 0;
      while (b.q_start < n && flat[b.q_start].level > b.Q) b.q_start++;

      for (int d = 0; d < 7; d++) b.extent[d] = 1;
      for (int p = b.q_start; p < n; p++) b.extent[static_cast<int>(flat[p].d)] *= flat[p].bound;

      for (size_t oi = 0; oi < odo_flat.size(); oi++)
        if (odo_flat[oi] < b.q_start)
          b.outer.push_back({static_cast<int>(oi), flat[odo_flat[oi]].d,
                             weight(odo_flat[oi], flat[odo_flat[oi]].d)});

      // explicit node coordinates over every spatial loop outside Q
      std::vector<int> sterms;
      for (int p = 0; p < b.q_start; p++)
        if (flat[p].spatial) sterms.push_back(p);
      uint64_t inst_count = 1;
      for (int p : sterms) inst_count *= flat[p].bound;
      b.n_instances = inst_count;

      std::vector<int> span_levels;
      for (int li = b.Q + 1; li < b.P; li++)
        if (hw.levels[li].kind == LevelKind::Routing && !m.per_level[li].spatial.empty())
          span_levels.push_back(li);

      // enumerate coordinates; key instances by (parent node, data stream)
      using Coord = std::vector<uint32_t>;
      struct Inst {
        Coord parent, rel;
        std::vector<Coord> at_level;  // joint coordinate per span level
      };
      std::vector<Inst> insts;
      insts.reserve(inst_count);
      Coord cur(sterms.size(), 0);
      for (uint64_t id = 0; id < inst_count; id++) {
        Inst inst;
        inst.at_level.assign(span_levels.size(), {});
        for (size_t s = 0; s < sterms.size(); s++) {
          const auto& fl = flat[sterms[s]];
          if (fl.level > b.P)
            inst.parent.push_back(cur[s]);
          else {
            size_t k = 0;
            while (k < span_levels.size() && span_levels[k] != fl.level) k++;
            if (k < span_levels.size()) inst.at_level[k].push_back(cur[s]);
            if (dim_touches(t, fl.d)) inst.rel.push_back(cur[s]);
          }
        }
        insts.push_back(std::move(inst));
        for (int s = static_cast<int>(sterms.size()) - 1; s >= 0; s--) {
          if (++cur[s] < flat[sterms[s]].bound) break;
          cur[s] = 0;
        }
      }

      std::map<std::pair<Coord, Coord>, std::vector<int>> groups;
      for (size_t i = 0; i < insts.size(); i++)
        groups[{insts[i].parent, insts[i].rel}].push_back(static_cast<int>(i));
      b.n_groups = groups.size();
      b.group_size = groups.begin()->second.size();

      for (size_t k = 0; k < span_levels.size(); k++) {
        Boundary::SpanLevel sl;
        sl.level = span_levels[k];
        for (const auto& [key, members] : groups) {
          std::map<std::vector<Coord>, std::set<Coord>> paths;  // outer path -> branch coords
          for (int i : members) {
            std::vector<Coord> outer_path(insts[i].at_level.begin() + k + 1,
                                          insts[i].at_level.end());
            paths[outer_path].insert(insts[i].at_level[k]);
          }
          sl.down_transfers += paths.size();
          for (const auto& [path, branches] : paths) sl.down_shape[branches.size()] += 1;
        }
        // merging width upward: nodes identical everywhere except this level
        const auto& g0 = groups.begin()->second;
        std::set<Coord> merged;
        for (int i : g0) {
          bool same = insts[i].parent == insts[g0.front()].parent;
          for (size_t k2 = 0; same && k2 < span_levels.size(); k2++)
            if (k2 != k && insts[i].at_level[k2] != insts[g0.front()].at_level[k2]) same = false;
          if (same) merged.insert(insts[i].at_level[k]);
        }
        sl.up_fanin = merged.size();
        b.span.push_back(std::move(sl));
      }
      bounds.push_back(std::move(b));
    }
  }

  auto apply_down = [&](Boundary& b, const Box4& nb) {
    uint64_t v = b.has_cur ? nb.vol() - intersection_volume(nb, b.cur) : nb.vol();
    if (v > 0) {
      log.counts.at(b.Q, b.t).writes += v * b.n_instances;
      log.counts.at(b.P, b.t).reads += v * b.n_groups;
      for (const auto& sl : b.span) {
        NocTraffic& nt = log.counts.noc[sl.level][static_cast<int>(b.t)];
        for (const auto& [fanout, transfers] : sl.down_shape) {
          if (fanout > 1)
            nt.multicast[fanout] += v * transfers;
          else
            nt.unicast += v * transfers;
        }
      }
    }
    b.cur = nb;
    b.has_cur = true;
  };

  auto emit_up = [&](Boundary& b) {
    uint64_t tv = b.cur.vol();
    log.counts.at(b.Q, b.t).reads += tv * b.n_instances;
    log.counts.at(b.P, b.t).writes += tv * b.n_instances;
    if (b.group_size > 1) log.counts.at(b.P, b.t).reads += tv * b.n_instances;
    for (const auto& sl : b.span) {
      NocTraffic& nt = log.counts.noc[sl.level][static_cast<int>(b.t)];
      if (sl.up_fanin > 1)
        nt.accumulate[sl.up_fanin] += tv * b.n_instances;
      else
        nt.unicast += tv * b.n_instances;
    }
  };

  auto arrive_output = [&](Boundary& b, const Box4& nb) {
    if (b.seen.count(nb.o)) {
      // the box was produced before: restore the partial into one node of
      // each duplicate group and keep accumulating
      uint64_t tv = nb.vol();
      log.counts.at(b.P, b.t).reads += tv * b.n_groups;
      log.counts.at(b.Q, b.t).writes += tv * b.n_groups;
      for (const auto& sl : b.span)
        log.counts.noc[sl.level][static_cast<int>(b.t)].unicast += tv * b.n_groups;
    } else {
      b.seen.insert(nb.o);  // fresh box: zero-initialized in place
    }
    b.cur = nb;
    b.has_cur = true;
  };

  // initial residents
  for (auto& b : bounds) {
    std::array<int64_t, 7> o{};
    Box4 init = make_box(b.t, o, b.extent, w.strides);
    if (b.t == Tensor::Outputs) {
      b.cur = init;
      b.has_cur = true;
      b.seen.insert(init.o);
    } else {
      apply_down(b, init);
    }
  }

  // walk the temporal nest
  std::vector<uint64_t> vals(odo_flat.size(), 0);
  for (uint64_t step = 1; step < total_steps; step++) {
    int i = static_cast<int>(vals.size()) - 1;
    while (vals[i] + 1 == flat[odo_flat[i]].bound) {
      vals[i] = 0;
      i--;
    }
    vals[i]++;
    int pstar = odo_flat[i];
    for (auto& b : bounds) {
      if (pstar >= b.q_start) continue;
      std::array<int64_t, 7> o{};
      for (const auto& ol : b.outer)
        o[static_cast<int>(ol.d)] += static_cast<int64_t>(vals[ol.odo] * ol.w);
      Box4 nb = make_box(b.t, o, b.extent, w.strides);
      if (b.t == Tensor::Outputs) {
        if (!(nb == b.cur)) {
          emit_up(b);
          arrive_output(b, nb);
        }
      } else {
        apply_down(b, nb);
      }
    }
  }
  for (auto& b : bounds)
    if (b.t == Tensor::Outputs) emit_up(b);  // drain the last partials

  log.steps = total_steps;
  log.completed = true;
  return log;
}

// --- dense integer references for the gradient remappings ------------------

namespace reference {

struct Tensor4 {
  int64_t n = 1, c = 1, h = 1, w = 1;
  std::vector<int64_t> v;

  Tensor4() = default;
  Tensor4(int64_t n_, int64_t c_, int64_t h_, int64_t w_)
      : n(n_), c(c_), h(h_), w(w_), v(static_cast<size_t>(n_ * c_ * h_ * w_), 0) {}
  int64_t& at(int64_t a, int64_t b, int64_t y, int64_t x) {
    return v[static_cast<size_t>(((a * c + b) * h + y) * w + x)];
  }
  int64_t at(int64_t a, int64_t b, int64_t y, int64_t x) const {
    return v[static_cast<size_t>(((a * c + b) * h + y) * w + x)];
  }
  bool operator==(const Tensor4&) const = default;
};

// y[n,m,e,f] = sum_{c,r,s} x[n,c,eU+r-ph,fV+s-pw] * fil[m,c,r,s]
inline Tensor4 conv_forward(const Tensor4& x, const Tensor4& fil, int64_t U, int64_t V, int64_t ph,
                            int64_t pw) {
  int64_t E = (x.h + 2 * ph - fil.h) / U + 1;
  int64_t F = (x.w + 2 * pw - fil.w) / V + 1;
  Tensor4 y(x.n, fil.n, E, F);
  for (int64_t a = 0; a < x.n; a++)
    for (int64_t mm = 0; mm < fil.n; mm++)
      for (int64_t e = 0; e < E; e++)
        for (int64_t f = 0; f < F; f++) {
          int64_t acc = 0;
          for (int64_t cc = 0; cc < x.c; cc++)
            for (int64_t r = 0; r < fil.h; r++)
              for (int64_t s = 0; s < fil.w; s++) {
                int64_t hh = e * U + r - ph, ww = f * V + s - pw;
                if (hh < 0 || hh >= x.h || ww < 0 || ww >= x.w) continue;
                acc += x.at(a, cc, hh, ww) * fil.at(mm, cc, r, s);
              }
          y.at(a, mm, e, f) = acc;
        }
  return y;
}

// dw[m,c,r,s] = sum_{n,e,f} x[n,c,eU+r-ph,fV+s-pw] * dy[n,m,e,f]
inline Tensor4 weight_grad_direct(const Tensor4& x, const Tensor4& dy, int64_t R, int64_t S,
                                  int64_t U, int64_t V, int64_t ph, int64_t pw) {
  Tensor4 dw(dy.c, x.c, R, S);
  for (int64_t mm = 0; mm < dy.c; mm++)
    for (int64_t cc = 0; cc < x.c; cc++)
      for (int64_t r = 0; r < R; r++)
        for (int64_t s = 0; s < S; s++) {
          int64_t acc = 0;
          for (int64_t a = 0; a < x.n; a++)
            for (int64_t e = 0; e < dy.h; e++)
              for (int64_t f = 0; f < dy.w; f++) {
                int64_t hh = e * U + r - ph, ww = f * V + s - pw;
                if (hh < 0 || hh >= x.h || ww < 0 || ww >= x.w) continue;
                acc += x.at(a, cc, hh, ww) * dy.at(a, mm, e, f);
              }
          dw.at(mm, cc, r, s) = acc;
        }
  return dw;
}

// dx[n,c,h,w] = sum_{m,r,s} fil[m,c,r,s] * dy[n,m,(h+ph-r)/U,(w+pw-s)/V]
inline Tensor4 input_grad_direct(const Tensor4& dy, const Tensor4& fil, int64_t U, int64_t V,
                                 int64_t ph, int64_t pw, int64_t H, int64_t W) {
  Tensor4 dx(dy.n, fil.c, H, W);
  for (int64_t a = 0; a < dy.n; a++)
    for (int64_t cc = 0; cc < fil.c; cc++)
      for (int64_t hh = 0; hh < H; hh++)
        for (int64_t ww = 0; ww < W; ww++) {
          int64_t acc = 0;
          for (int64_t mm = 0; mm < dy.c; mm++)
            for (int64_t r = 0; r < fil.h; r++)
              for (int64_t s = 0; s < fil.w; s++) {
                int64_t te = hh + ph - r, tf = ww + pw - s;
                if (te < 0 || tf < 0 || te % U || tf % V) continue;
                int64_t e = te / U, f = tf / V;
                if (e >= dy.h || f >= dy.w) continue;
                acc += fil.at(mm, cc, r, s) * dy.at(a, mm, e, f);
              }
          dx.at(a, cc, hh, ww) = acc;
        }
  return dx;
}

// zero-pad with the given leading offset, cropping anything past the
// requested extent (only structurally zero rows ever fall off)
inline Tensor4 pad(const Tensor4& in, int64_t lead_h, int64_t lead_w, int64_t out_h,
                   int64_t out_w) {
  Tensor4 out(in.n, in.c, out_h, out_w);
  for (int64_t a = 0; a < in.n; a++)
    for (int64_t b = 0; b < in.c; b++)
      for (int64_t y = 0; y < in.h && y + lead_h < out_h; y++)
        for (int64_t x = 0; x < in.w && x + lead_w < out_w; x++)
          out.at(a, b, y + lead_h, x + lead_w) = in.at(a, b, y, x);
  return out;
}

// stretch by the stride, each element at the top-left of its block
inline Tensor4 upsample(const Tensor4& in, int64_t U, int64_t V) {
  Tensor4 out(in.n, in.c, in.h * U, in.w * V);
  for (int64_t a = 0; a < in.n; a++)
    for (int64_t b = 0; b < in.c; b++)
      for (int64_t y = 0; y < in.h; y++)
        for (int64_t x = 0; x < in.w; x++) out.at(a, b, y * U, x * V) = in.at(a, b, y, x);
  return out;
}

inline Tensor4 transpose_nc(const Tensor4& in) {
  Tensor4 out(in.c, in.n, in.h, in.w);
  for (int64_t a = 0; a < in.n; a++)
    for (int64_t b = 0; b < in.c; b++)
      for (int64_t y = 0; y < in.h; y++)
        for (int64_t x = 0; x < in.w; x++) out.at(b, a, y, x) = in.at(a, b, y, x);
  return out;
}

inline Tensor4 rotate_transpose(const Tensor4& in) {
  Tensor4 out(in.c, in.n, in.h, in.w);
  for (int64_t a = 0; a < in.n; a++)
    for (int64_t b = 0; b < in.c; b++)
      for (int64_t y = 0; y < in.h; y++)
        for (int64_t x = 0; x < in.w; x++)
          out.at(b, a, in.h - 1 - y, in.w - 1 - x) = in.at(a, b, y, x);
  return out;
}

// canonical nest executor: out[n,m,e,f] += in[n,c,eU+r,fV+s] * fil[m,c,r,s],
// all accesses in range by construction
inline Tensor4 run_nest(const Bounds7& b, const Stride2& st, const Tensor4& in,
                        const Tensor4& fil) {
  Tensor4 out(static_cast<int64_t>(b[Dim::N]), static_cast<int64_t>(b[Dim::M]),
              static_cast<int64_t>(b[Dim::E]), static_cast<int64_t>(b[Dim::F]));
  for (uint64_t a = 0; a < b[Dim::N]; a++)
    for (uint64_t mm = 0; mm < b[Dim::M]; mm++)
      for (uint64_t cc = 0; cc < b[Dim::C]; cc++)
        for (uint64_t r = 0; r < b[Dim::R]; r++)
          for (uint64_t s = 0; s < b[Dim::S]; s++)
            for (uint64_t e = 0; e < b[Dim::E]; e++)
              for (uint64_t f = 0; f < b[Dim::F]; f++)
                out.at(a, mm, e, f) += in.at(a, cc, e * st.u + r, f * st.v + s) *
                                       (fil.v.empty() ? 1 : fil.at(mm, cc, r, s));
  return out;
}

// dw through the canonical nest with remapped operands: batch/channel swap
// the padded activations, stretch the output gradient into the filter slot
inline Tensor4 weight_grad_by_nest(const Tensor4& x, const Tensor4& dy, int64_t R, int64_t S,
                                   int64_t U, int64_t V, int64_t ph, int64_t pw) {
  int64_t E = dy.h, F = dy.w;
  Bounds7 b;
  b[Dim::N] = static_cast<uint64_t>(x.c);
  b[Dim::M] = static_cast<uint64_t>(dy.c);
  b[Dim::C] = static_cast<uint64_t>(x.n);
  b[Dim::R] = static_cast<uint64_t>(E * U);
  b[Dim::S] = static_cast<uint64_t>(F * V);
  b[Dim::E] = static_cast<uint64_t>(R);
  b[Dim::F] = static_cast<uint64_t>(S);
  Tensor4 in = transpose_nc(pad(x, ph, pw, E * U + R - 1, F * V + S - 1));
  Tensor4 fil = transpose_nc(upsample(dy, U, V));
  Tensor4 raw = run_nest(b, {1, 1}, in, fil);  // [c][m][r][s]
  return transpose_nc(raw);
}

// dx through the canonical nest: stretch and shift the output gradient,
// rotate and channel-swap the filter
inline Tensor4 input_grad_by_nest(const Tensor4& dy, const Tensor4& fil, int64_t U, int64_t V,
                                  int64_t ph, int64_t pw, int64_t H, int64_t W) {
  int64_t R = fil.h, S = fil.w;
  Bounds7 b;
  b[Dim::N] = static_cast<uint64_t>(dy.n);
  b[Dim::M] = static_cast<uint64_t>(fil.c);
  b[Dim::C] = static_cast<uint64_t>(dy.c);
  b[Dim::R] = static_cast<uint64_t>(R);
  b[Dim::S] = static_cast<uint64_t>(S);
  b[Dim::E] = static_cast<uint64_t>(H);
  b[Dim::F] = static_cast<uint64_t>(W);
  Tensor4 in = pad(upsample(dy, U, V), R - 1 - ph, S - 1 - pw, H + R - 1, W + S - 1);
  return run_nest(b, {1, 1}, in, rotate_transpose(fil));
}

}  // namespace reference
}  // namespace nestor
