// Cost model: cycles from bandwidth-limited levels, dynamic and static
// energy, preprocess charges, and chip area. Expected numbers are hand
// multiplications of the frozen traffic counts.
#include <catch2/catch_amalgamated.hpp>

#include "common.hpp"
#include "nestor/evaluator.hpp"

using namespace nestor;
using namespace fixtures;

TEST_CASE("walkthrough mapping cost under unit energy and bandwidth") {
  auto hw = eyeriss_like();
  auto w = vecmat_16x32();
  auto m = vecmat_map_a(hw);
  CostTable ct;  // every access 1 pJ, every port 1 element/cycle

  auto c = evaluate_workload(m, w, hw, ct);

  CHECK(c.macs == 512.0);
  // pe: 512 macs over 4 active PEs
  CHECK(c.levels[0].cycles == 128.0);
  CHECK(c.levels[0].energy_pj == 512.0);
  // scratchpad: (1568 + 1536) accesses across 4 instances
  CHECK(c.levels[1].reads == 1568.0);
  CHECK(c.levels[1].writes == 1536.0);
  CHECK(c.levels[1].cycles == 776.0);
  CHECK(c.levels[1].energy_pj == 3104.0);
  // array: 128 broadcasts at fanout 4 (alpha 0.25), 512 + 32 point-to-point
  CHECK(c.levels[2].noc_events == 672.0);
  CHECK(c.levels[2].energy_pj == 768.0);
  CHECK(c.levels[2].cycles == 672.0);
  // global buffer is the bottleneck
  CHECK(c.levels[3].reads == 672.0);
  CHECK(c.levels[3].writes == 560.0);
  CHECK(c.levels[3].cycles == 1232.0);
  CHECK(c.levels[4].reads == 528.0);
  CHECK(c.levels[4].writes == 32.0);
  CHECK(c.levels[4].cycles == 560.0);

  CHECK(c.cycles == 1232.0);
  CHECK(c.energy_pj == 512.0 + 3104.0 + 768.0 + 1232.0 + 560.0);
}

TEST_CASE("ports and bandwidth overrides scale level time") {
  auto hw = eyeriss_like();
  auto w = vecmat_16x32();
  auto m = vecmat_map_a(hw);
  CostTable ct;

  SECTION("a second port halves the time") {
    hw.levels[1].ports = 2;
    auto c = evaluate_workload(m, w, hw, ct);
    CHECK(c.levels[1].cycles == 388.0);
  }
  SECTION("a per-level bandwidth override beats the type default") {
    hw.levels[3].read_bw = 4;
    auto c = evaluate_workload(m, w, hw, ct);
    CHECK(c.levels[3].cycles == 672.0 / 4 + 560.0);
  }
  SECTION("the type default applies when the level is silent") {
    ct.mem[MemType::DRAM].read_bw = 2;
    auto c = evaluate_workload(m, w, hw, ct);
    CHECK(c.levels[4].cycles == 528.0 / 2 + 32.0);
  }
  SECTION("pipeline stages divide compute time") {
    hw.levels[0].pipeline_stages = 2;
    auto c = evaluate_workload(m, w, hw, ct);
    CHECK(c.levels[0].cycles == 64.0);
    hw.levels[0].pipeline_stages = 0;  // fall back to the cost table
    ct.pe_pipeline_stages = 4;
    c = evaluate_workload(m, w, hw, ct);
    CHECK(c.levels[0].cycles == 32.0);
  }
}

TEST_CASE("zero gating shrinks traffic inside the boundary and reads at it") {
  auto hw = eyeriss_like();
  hw.zero_skip = true;  // boundary defaults to gbuf, the outermost bounded level
  auto w = vecmat_16x32();
  w.input_zero_fraction = 0.5;
  w.filter_zero_fraction = 0.25;
  auto m = vecmat_map_a(hw);
  CostTable ct;

  auto c = evaluate_workload(m, w, hw, ct);
  CHECK(c.macs == 512.0 * 0.5 * 0.75);
  CHECK(c.levels[0].cycles == 192.0 / 4);
  // scratchpad traffic shrinks per operand; outputs never do
  CHECK(c.levels[1].reads == 256.0 + 384.0 + 544.0);
  CHECK(c.levels[1].writes == 256.0 + 384.0 + 512.0);
  CHECK(c.levels[2].noc_events == 64.0 + 384.0 + 32.0);
  // the boundary serves gated reads but still stores full tiles
  CHECK(c.levels[3].reads == 64.0 + 384.0 + 32.0);
  CHECK(c.levels[3].writes == 16.0 + 512.0 + 32.0);
  // outside the boundary nothing changes
  CHECK(c.levels[4].reads == 528.0);

  SECTION("a named boundary moves the gate") {
    hw.zero_skip_below = "spad";
    auto c2 = evaluate_workload(m, w, hw, ct);
    CHECK(c2.levels[1].reads == 256.0 + 384.0 + 544.0);
    CHECK(c2.levels[1].writes == 1536.0);   // stores stay full at the boundary
    CHECK(c2.levels[2].noc_events == 672.0);  // outside: unscaled
    CHECK(c2.levels[3].reads == 672.0);
  }
  SECTION("disabled skip leaves everything unscaled") {
    hw.zero_skip = false;
    auto c2 = evaluate_workload(m, w, hw, ct);
    CHECK(c2.macs == 512.0);
    CHECK(c2.levels[1].reads == 1568.0);
  }
}

TEST_CASE("preprocess ops stream through the outermost memory") {
  auto hw = eyeriss_like();
  CostTable ct;
  ct.mem[MemType::DRAM].read_energy_pj = 2.0;
  ct.mem[MemType::DRAM].write_energy_pj = 3.0;

  PreprocessOp op;
  op.kind = PreprocessKind::Pad;
  op.in_elements = 16;
  op.out_elements = 25;
  CHECK(preprocess_cycles(op, hw, ct) == 25.0);
  CHECK(preprocess_energy_pj(op, hw, ct) == 16.0 * 2 + 25.0 * 3);

  SECTION("identity pads and upsamples are free by default") {
    op.out_elements = 16;
    CHECK(preprocess_cycles(op, hw, ct) == 0.0);
    CHECK(preprocess_energy_pj(op, hw, ct) == 0.0);
    ct.skip_identity_preprocess = false;
    CHECK(preprocess_cycles(op, hw, ct) == 16.0);
    CHECK(preprocess_energy_pj(op, hw, ct) == 16.0 * 2 + 16.0 * 3);
  }
  SECTION("rotations always move data even at equal size") {
    op.kind = PreprocessKind::RotateTranspose;
    op.out_elements = 16;
    CHECK(preprocess_cycles(op, hw, ct) == 16.0);
  }
  SECTION("outermost read bandwidth sets the streaming rate") {
    hw.levels.back().read_bw = 5;
    CHECK(preprocess_cycles(op, hw, ct) == 5.0);
  }
}

TEST_CASE("pinned activations leak for their lifetime") {
  auto hw = eyeriss_like();
  CostTable ct;
  ct.mem[MemType::DRAM].static_power_uw_per_byte = 1.0;
  // 1000 bytes for 1 ms at 1 uW/byte: 1 mW * 1 ms = 1 uJ = 1e6 pJ
  CHECK(cache_static_energy_pj(1000, 1e-3, hw, ct) == 1e6);
  ct.mem[MemType::DRAM].static_power_uw_per_byte = 0.0;
  CHECK(cache_static_energy_pj(1000, 1e-3, hw, ct) == 0.0);
}

TEST_CASE("area sums PEs, bounded memories, and routers") {
  auto hw = eyeriss_like();
  CostTable ct;
  ct.pe_area_um2 = 2.0;
  ct.mem[MemType::Scratchpad].area_um2_per_byte = 0.2;
  ct.mem[MemType::SRAM].area_um2_per_byte = 0.1;
  ct.mem[MemType::DRAM].area_um2_per_byte = 100.0;  // unbounded: ignored
  ct.route[Topology::TwoLevelBus].router_area_um2 = 5.0;

  // 256 PEs, 256 scratchpad instances behind the 16x16 grid, one router
  // fabric, one global buffer; off-chip storage contributes nothing.
  double expected = 256 * 2.0 + 520 * 0.2 * 256 + 5.0 * 256 + 110592 * 0.1;
  CHECK(total_area_um2(hw, ct) == Catch::Approx(expected));
}

TEST_CASE("cost tables parse defaults and reject broken bandwidth") {
  CostTable ct = parse_cost_table("{}");
  CHECK(ct.clock_hz == 1e9);
  CHECK(ct.mac_energy_pj == 1.0);
  CHECK(ct.skip_identity_preprocess);

  ct = parse_cost_table(R"({"mac_energy_pj": 0.56,
                            "mem_types": {"sram": {"read_energy_pj": 3.2, "read_bw": 4}},
                            "routing": {"mesh": {"hop_energy_pj": 1.6}}})");
  CHECK(ct.mac_energy_pj == 0.56);
  CHECK(ct.mem[MemType::SRAM].read_energy_pj == 3.2);
  CHECK(ct.mem[MemType::SRAM].read_bw == 4.0);
  CHECK(ct.mem[MemType::SRAM].write_energy_pj == 1.0);  // untouched default
  CHECK(ct.route[Topology::Mesh].hop_energy_pj == 1.6);

  CHECK_THROWS(parse_cost_table(R"({"mem_types": {"sram": {"read_bw": 0}}})"));
  CHECK_THROWS(parse_cost_table(R"({"routing": {"bus": {"bandwidth": -1}}})"));
  CHECK_THROWS(parse_cost_table("not json"));
}
