// Closed-form traffic counting: hand-counted transfer totals for the
// walkthrough mappings and a few shapes that isolate one mechanism each
// (halo reuse, strided windows, bypass), then bulk agreement with the
// step-by-step simulator on randomized mappings.
#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "common.hpp"
#include "nestor/activity.hpp"
#include "nestor/oracle.hpp"

using namespace nestor;
using namespace fixtures;

namespace {

TensorTraffic tt(uint64_t reads, uint64_t writes) { return {reads, writes}; }

std::string describe(const IntraLayerWorkload& w, const Mapping& m,
                     const HardwareDescription& hw) {
  std::ostringstream os;
  os << "bounds n" << w.bounds[Dim::N] << " m" << w.bounds[Dim::M] << " c" << w.bounds[Dim::C]
     << " r" << w.bounds[Dim::R] << " s" << w.bounds[Dim::S] << " e" << w.bounds[Dim::E] << " f"
     << w.bounds[Dim::F] << " u" << w.strides.u << " v" << w.strides.v
     << (w.has_filter ? "" : " (no filter)") << " mapping " << mapping_to_json(m, hw).dump();
  return os.str();
}

}  // namespace

TEST_CASE("output-stationary walkthrough mapping counts") {
  auto hw = eyeriss_like();
  auto w = vecmat_16x32();
  auto m = vecmat_map_a(hw);
  REQUIRE(check_mapping_structure(m, w, hw) == std::nullopt);
  auto ac = analyze_activity(m, w, hw);

  CHECK(ac.macs == 512);

  // Scratchpad: every input block is refetched whenever an outer m-loop
  // advances, because the inner c-loop rewinds underneath it; 16 outer
  // iterations x 8-element tile x 4 active PEs.
  CHECK(ac.at(1, Tensor::Inputs) == tt(512, 512));
  CHECK(ac.at(1, Tensor::Filters) == tt(512, 512));
  // Outputs stay put across the reduction: one flush per m-step (32 total
  // reads beyond the 512 accumulator reads, which pair with 512 writes).
  CHECK(ac.at(1, Tensor::Outputs) == tt(544, 512));

  // Global buffer serves each 4-PE input broadcast once (128 = 512 / 4).
  CHECK(ac.at(3, Tensor::Inputs) == tt(128, 16));
  CHECK(ac.at(3, Tensor::Filters) == tt(512, 512));
  CHECK(ac.at(3, Tensor::Outputs) == tt(32, 32));

  CHECK(ac.at(4, Tensor::Inputs) == tt(16, 0));
  CHECK(ac.at(4, Tensor::Filters) == tt(512, 0));
  CHECK(ac.at(4, Tensor::Outputs) == tt(0, 32));

  // The array broadcasts inputs to the four m-parallel PEs and moves
  // filters and finished outputs point-to-point.
  const auto& noc_in = ac.noc[2][static_cast<int>(Tensor::Inputs)];
  CHECK(noc_in.unicast == 0);
  CHECK(noc_in.multicast == std::map<uint64_t, uint64_t>{{4, 128}});
  CHECK(ac.noc[2][static_cast<int>(Tensor::Filters)].unicast == 512);
  const auto& noc_out = ac.noc[2][static_cast<int>(Tensor::Outputs)];
  CHECK(noc_out.unicast == 32);
  CHECK(noc_out.accumulate.empty());

  // Non-routing levels carry no network events.
  CHECK(ac.noc_events(0) == 0);
  CHECK(ac.noc_events(1) == 0);
  CHECK(ac.noc_events(3) == 0);
  CHECK(ac.noc_events(4) == 0);
}

TEST_CASE("split-reduction walkthrough mapping counts") {
  auto hw = eyeriss_like();
  auto w = vecmat_16x32();
  auto m = vecmat_map_b(hw);
  REQUIRE(check_mapping_structure(m, w, hw) == std::nullopt);
  auto ac = analyze_activity(m, w, hw);

  CHECK(ac.macs == 512);

  // Keeping the c-loop outermost at the scratchpad preserves input blocks
  // across m-advances: only 64 fills instead of map A's 512.
  CHECK(ac.at(1, Tensor::Inputs) == tt(512, 64));
  CHECK(ac.at(1, Tensor::Filters) == tt(512, 512));
  // Price: partial sums leave and reenter the PE (256 flushes, 96 reloads).
  CHECK(ac.at(1, Tensor::Outputs) == tt(768, 608));

  CHECK(ac.at(3, Tensor::Inputs) == tt(32, 16));
  CHECK(ac.at(3, Tensor::Filters) == tt(512, 512));
  // 256 read-modify-writes + 96 reload reads + 64 flushes toward dram.
  CHECK(ac.at(3, Tensor::Outputs) == tt(416, 288));

  CHECK(ac.at(4, Tensor::Inputs) == tt(16, 0));
  CHECK(ac.at(4, Tensor::Filters) == tt(512, 0));
  // The dram-level c-split forces every output out twice and back once.
  CHECK(ac.at(4, Tensor::Outputs) == tt(32, 64));

  const auto& noc_in = ac.noc[2][static_cast<int>(Tensor::Inputs)];
  CHECK(noc_in.multicast == std::map<uint64_t, uint64_t>{{2, 32}});
  CHECK(ac.noc[2][static_cast<int>(Tensor::Filters)].unicast == 512);
  // Partial sums from the two c-columns merge in the array.
  const auto& noc_out = ac.noc[2][static_cast<int>(Tensor::Outputs)];
  CHECK(noc_out.accumulate == std::map<uint64_t, uint64_t>{{2, 256}});
  CHECK(noc_out.unicast == 96);
}

TEST_CASE("keeping the reduction local beats splitting it, for output traffic") {
  auto hw = eyeriss_like();
  auto w = vecmat_16x32();
  auto a = analyze_activity(vecmat_map_a(hw), w, hw);
  auto b = analyze_activity(vecmat_map_b(hw), w, hw);
  auto gbuf_out = [](const ActivityCounts& ac) {
    return ac.at(3, Tensor::Outputs).reads + ac.at(3, Tensor::Outputs).writes;
  };
  CHECK(gbuf_out(a) == 64);
  CHECK(gbuf_out(b) == 704);
  CHECK(gbuf_out(b) > gbuf_out(a));
}

TEST_CASE("overlapping input rows are fetched once across an output-row split") {
  auto hw = three_level();
  auto w = make_workload(1, 1, 1, 3, 3, 4, 4);  // 6x6 input, 3x3 window
  auto m = empty_mapping(hw);
  m.per_level[2].temporal = {{Dim::E, 2}};
  m.per_level[1].temporal = {{Dim::E, 2}, {Dim::F, 4}, {Dim::R, 3}, {Dim::S, 3}};
  REQUIRE(check_mapping_structure(m, w, hw) == std::nullopt);
  auto ac = analyze_activity(m, w, hw);

  CHECK(ac.macs == 144);
  // The second half-plane shares two of its four input rows with the first:
  // 24 + (24 - 12) = 36 = every input element exactly once.
  CHECK(ac.at(1, Tensor::Inputs) == tt(144, 36));
  CHECK(ac.at(2, Tensor::Inputs) == tt(36, 0));
  CHECK(ac.at(1, Tensor::Filters) == tt(144, 9));
  CHECK(ac.at(2, Tensor::Filters) == tt(9, 0));
  CHECK(ac.at(1, Tensor::Outputs) == tt(160, 144));
  CHECK(ac.at(2, Tensor::Outputs) == tt(0, 16));
}

TEST_CASE("stride-2 windows overlap by kernel minus stride") {
  auto hw = three_level();
  auto w = make_workload(1, 1, 1, 3, 1, 4, 1, 2, 1);  // 9-row column, stride 2
  auto m = empty_mapping(hw);
  m.per_level[2].temporal = {{Dim::E, 2}};
  m.per_level[1].temporal = {{Dim::E, 2}, {Dim::R, 3}};
  REQUIRE(check_mapping_structure(m, w, hw) == std::nullopt);
  auto ac = analyze_activity(m, w, hw);

  CHECK(ac.macs == 12);
  // Five rows resident, the split shifts by four: 5 + (5 - 1) = 9 fills.
  CHECK(ac.at(1, Tensor::Inputs) == tt(12, 9));
  CHECK(ac.at(2, Tensor::Inputs) == tt(9, 0));
  CHECK(ac.at(1, Tensor::Outputs) == tt(16, 12));
  CHECK(ac.at(2, Tensor::Outputs) == tt(0, 4));
}

TEST_CASE("a bypassed interior level stages nothing and its neighbors talk directly") {
  auto hw = five_level();
  auto w = make_workload(1, 4, 8, 1, 1, 1, 1);
  auto m = empty_mapping(hw);
  m.per_level[1].temporal = {{Dim::C, 2}};
  m.per_level[2].spatial = {{Dim::M, 2, Axis::X}, {Dim::C, 2, Axis::Y}};
  m.per_level[3].temporal = {{Dim::M, 2}};
  m.per_level[4].temporal = {{Dim::C, 2}};
  m.bypass[3][static_cast<int>(Tensor::Inputs)] = true;
  REQUIRE(check_mapping_structure(m, w, hw) == std::nullopt);
  auto ac = analyze_activity(m, w, hw);

  CHECK(ac.macs == 32);
  CHECK(ac.at(3, Tensor::Inputs) == tt(0, 0));
  // Inputs hop straight from dram to the PE buffers; the column pair shares
  // each element, so dram serves 8 reads for 16 fills.
  CHECK(ac.at(1, Tensor::Inputs) == tt(32, 16));
  CHECK(ac.at(4, Tensor::Inputs) == tt(8, 0));
  const auto& noc_in = ac.noc[2][static_cast<int>(Tensor::Inputs)];
  CHECK(noc_in.multicast == std::map<uint64_t, uint64_t>{{2, 8}});

  CHECK(ac.at(1, Tensor::Filters) == tt(32, 32));
  CHECK(ac.at(3, Tensor::Filters) == tt(32, 32));
  CHECK(ac.at(4, Tensor::Filters) == tt(32, 0));
  CHECK(ac.noc[2][static_cast<int>(Tensor::Filters)].unicast == 32);

  // Outputs: 16 flushes merge pairwise over the column axis, hit the l2
  // resident copy (16 read-modify-writes), and the m-outer/c-inner order at
  // dram scope forces 4 reloaded partials.
  CHECK(ac.at(1, Tensor::Outputs) == tt(48, 36));
  CHECK(ac.at(3, Tensor::Outputs) == tt(24, 16));
  CHECK(ac.at(4, Tensor::Outputs) == tt(0, 4));
  const auto& noc_out = ac.noc[2][static_cast<int>(Tensor::Outputs)];
  CHECK(noc_out.accumulate == std::map<uint64_t, uint64_t>{{2, 16}});
  CHECK(noc_out.unicast == 4);
}

TEST_CASE("walkthrough mappings agree with the step-by-step simulation") {
  auto hw = eyeriss_like();
  auto w = vecmat_16x32();
  for (auto m : {vecmat_map_a(hw), vecmat_map_b(hw)}) {
    auto sim = simulate(m, w, hw, 1'000'000);
    REQUIRE(sim.completed);
    CHECK(analyze_activity(m, w, hw) == sim.counts);
  }
}

TEST_CASE("randomized mappings match the step-by-step simulation exactly") {
  std::mt19937_64 rng(0xA11ACE5);
  for (int i = 0; i < 500; ++i) {
    auto rc = random_case(rng);
    INFO("case " << i << ": " << describe(rc.w, rc.m, rc.hw));
    auto sim = simulate(rc.m, rc.w, rc.hw, 2'000'000);
    REQUIRE(sim.completed);
    auto ac = analyze_activity(rc.m, rc.w, rc.hw);
    REQUIRE(ac == sim.counts);
  }
}
