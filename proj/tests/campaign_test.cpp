#include <gtest/gtest.h>

#include <set>

#include "jicgsim/campaign.hpp"
#include "jicgsim/errors.hpp"
#include "support.hpp"

using namespace jicgsim;
using jicgsim::testing::calibrated_engine;
using jicgsim::testing::default_ff;
using jicgsim::testing::measured_calibration;

namespace {

ShotParams twenty_x(double power, int input) { return {20, SpotModel::measured, power, 50.0, input}; }

std::set<std::string> touched_gates(const SensitivityMap& map, FaultClass c) {
  std::set<std::string> out;
  for (const auto& r : sensitive_areas(map, default_ff())) {
    if (r.fault == c) out.insert(r.gate_ids.begin(), r.gate_ids.end());
  }
  return out;
}

}  // namespace

TEST(Scan, DeterministicAndJobIndependent) {
  const ScanEngine& e = calibrated_engine();
  const ScanGrid g = e.default_grid();
  const auto a = e.scan(g, twenty_x(0.8, 0));
  const auto b = e.scan(g, twenty_x(0.8, 0));
  EXPECT_EQ(a.cells, b.cells);
  EngineOptions opt;
  opt.jobs = 3;
  const ScanEngine parallel(default_ff(), measured_calibration().thresholds, opt);
  EXPECT_EQ(parallel.scan(g, twenty_x(0.8, 0)).cells, a.cells);
}

TEST(Scan, ZeroPowerIsClean) {
  const ScanEngine& e = calibrated_engine();
  const auto m = e.scan(e.default_grid(), twenty_x(0.0, 0));
  EXPECT_EQ(m.fault_count(), 0u);
  EXPECT_EQ(m.dominant(), FaultClass::none);
}

TEST(Scan, GridOutsideGeometryIsFlagged) {
  const ScanEngine& e = calibrated_engine();
  const auto m = e.scan(ScanGrid{{200, 200}, {210, 205}, 0.5}, twenty_x(1.0, 0));
  EXPECT_TRUE(m.outside_geometry);
  EXPECT_EQ(m.fault_count(), 0u);
  EXPECT_EQ(m.cells.size(), 21u * 11u);
}

TEST(Scan, SetAndResetLandOnTheirGates) {
  const ScanEngine& e = calibrated_engine();
  const ScanGrid g = e.default_grid();
  for (double p : {0.45, 0.7, 1.0}) {
    const auto set = e.scan(g, twenty_x(p, 0));
    const auto reset = e.scan(g, twenty_x(p, 1));
    EXPECT_GT(set.count(FaultClass::bit_set), 0u);
    EXPECT_EQ(set.count(FaultClass::bit_reset), 0u);
    EXPECT_EQ(reset.count(FaultClass::bit_set), 0u);
    const auto sg = touched_gates(set, FaultClass::bit_set);
    const auto rg = touched_gates(reset, FaultClass::bit_reset);
    EXPECT_TRUE(sg.count("G6")) << p;
    for (const auto& gate : sg) EXPECT_TRUE(gate == "G2" || gate == "G6") << gate;
    for (const auto& gate : rg) EXPECT_TRUE(gate == "G1" || gate == "G5") << gate;
  }
}

TEST(Scan, MapCellsAgreeWithTraces) {
  const ScanEngine& e = calibrated_engine();
  const ScanGrid g = e.default_grid();
  for (int in : {0, 1}) {
    const auto m = e.scan(g, twenty_x(1.0, in));
    const auto pts = g.points();
    for (std::size_t k = 0; k < pts.size(); k += (m.cells[k] == FaultClass::none ? 37 : 1)) {
      EXPECT_EQ(e.simulate_at(pts[k], twenty_x(1.0, in)).fault, m.cells[k]) << pts[k].x << "," << pts[k].y;
    }
  }
}

TEST(Scan, InteriorFlipFlopOfRegisterLayout) {
  const CellLayout reg = build_register_layout(3);
  EngineOptions opt;
  opt.target_ff = 1;
  const ScanEngine e(reg, measured_calibration().thresholds, opt);
  EXPECT_EQ(e.target_ff(), 1);
  EXPECT_DOUBLE_EQ(e.target_cell().bounds.x0, 82.0);
  const auto m = e.scan(e.default_grid(), twenty_x(0.5, 0));
  EXPECT_GT(m.count(FaultClass::bit_set), 0u);
  EXPECT_EQ(m.fault_count(), m.count(FaultClass::bit_set));
  EngineOptions bad;
  bad.target_ff = 3;
  EXPECT_THROW(ScanEngine(reg, measured_calibration().thresholds, bad), InvalidArgument);
  EXPECT_THROW(ScanEngine(build_nand_layout(2, {0, 0}), measured_calibration().thresholds), InvalidArgument);
}

TEST(Scan, CountermeasureClearsTheMap) {
  CellLayout covered = default_ff();
  for (int p : covered.pair_ids()) {
    const auto& s = covered.site(covered.pair_sites(p)[0]);
    if (s.channel == Channel::nmos && (s.gate_id == "G2" || s.gate_id == "G6")) {
      covered = place_filler_over_site(covered, s.id);
    }
  }
  const ScanEngine e(covered, measured_calibration().thresholds);
  for (double p : {0.35, 0.6, 1.0}) {
    EXPECT_EQ(e.scan(e.default_grid(), twenty_x(p, 0)).fault_count(), 0u) << p;
  }
}

TEST(Ladder, StandardAndValidation) {
  const auto l = EscalationLadder::standard();
  EXPECT_EQ(l.power_steps.size(), 19u);
  EXPECT_DOUBLE_EQ(l.power_steps.front(), 0.10);
  EXPECT_DOUBLE_EQ(l.power_steps.back(), 1.0);
  EXPECT_EQ(l.duration_steps, (std::vector<double>{50, 100, 500, 1000}));
  EXPECT_EQ(l.objective_order, (std::vector<int>{5, 20, 50, 100}));
  EscalationLadder bad = l;
  bad.power_steps = {0.2, 0.2};
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = l;
  bad.duration_steps.clear();
  EXPECT_THROW(bad.validate(), InvalidArgument);
  bad = l;
  bad.objective_order = {7};
  EXPECT_THROW(bad.validate(), NotFound);
}

TEST(Escalate, OnsetIsTheFirstSuccessfulRung) {
  const ScanEngine& e = calibrated_engine();
  const auto r = escalate(e, e.default_grid(), EscalationLadder::standard(), 0);
  ASSERT_EQ(r.objectives.size(), 4u);
  for (const auto& o : r.objectives) {
    EXPECT_EQ(o.trail.size(), 19u * 4u);
    if (o.magnification != 20) {
      EXPECT_FALSE(o.success) << o.magnification;
      continue;
    }
    ASSERT_TRUE(o.success);
    EXPECT_TRUE(o.confirmed);
    EXPECT_EQ(o.fault, FaultClass::bit_set);
    EXPECT_NEAR(o.onset_power, 0.35, 1e-12);
    EXPECT_DOUBLE_EQ(o.onset_duration_ns, 50.0);
    for (const auto& s : o.trail) {
      if (s.duration_ns == 50.0 && s.power_fraction < o.onset_power - 1e-12) EXPECT_EQ(s.fault_cells, 0u);
    }
    EXPECT_DOUBLE_EQ(o.power_max, 1.0);
    EXPECT_DOUBLE_EQ(o.duration_max, 1000.0);
    EXPECT_EQ(e.simulate_at(o.witness, {20, SpotModel::measured, o.onset_power, o.onset_duration_ns, 0}).fault,
              FaultClass::bit_set);
  }
}

TEST(SensitiveAreas, ComponentsAreFourConnected) {
  SensitivityMap m;
  m.grid = ScanGrid{{0, 0}, {2, 2}, 1.0};
  m.cells.assign(9, FaultClass::none);
  m.cells[0] = FaultClass::bit_set;  // (0,0)
  m.cells[4] = FaultClass::bit_set;  // (1,1), diagonal only
  m.cells[5] = FaultClass::bit_set;  // (2,1)
  m.cells[8] = FaultClass::bit_reset;
  const auto regions = sensitive_areas(m, CellLayout{});
  ASSERT_EQ(regions.size(), 3u);
  EXPECT_EQ(regions[0].cells, 1u);
  EXPECT_EQ(regions[1].cells, 2u);
  EXPECT_EQ(regions[1].bbox, (Rect{1, 1, 2, 1}));
  EXPECT_DOUBLE_EQ(regions[1].centroid.x, 1.5);
  EXPECT_EQ(regions[2].fault, FaultClass::bit_reset);
}

TEST(SensitiveAreas, CleanMapHasNoRegions) {
  const ScanEngine& e = calibrated_engine();
  EXPECT_TRUE(sensitive_areas(e.scan(e.default_grid(), twenty_x(0.2, 0)), default_ff()).empty());
}

TEST(Summarize, EmptyInputGivesEmptyReport) { EXPECT_TRUE(summarize({}).empty()); }

TEST(Summarize, MergesFailedInputs) {
  CampaignResult a, b;
  a.input_bit = 0;
  b.input_bit = 1;
  a.ladder = b.ladder = EscalationLadder::standard();
  ObjectiveOutcome fail;
  fail.magnification = 5;
  ObjectiveOutcome win;
  win.magnification = 20;
  win.success = true;
  win.fault = FaultClass::bit_set;
  win.power_min = 0.35;
  win.power_max = 1.0;
  win.duration_min = 50;
  win.duration_max = 1000;
  a.objectives = {win, fail};
  ObjectiveOutcome lose20 = fail;
  lose20.magnification = 20;
  b.objectives = {lose20, fail};
  const auto rows = summarize({a, b});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].magnification, 20);
  EXPECT_EQ(rows[0].input, "'0'");
  EXPECT_EQ(rows[0].power, "35-100");
  EXPECT_EQ(rows[0].pulse, "50-1000");
  EXPECT_EQ(rows[0].outcome, "bit-set");
  EXPECT_EQ(rows[1].input, "'1'");
  EXPECT_EQ(rows[1].outcome, "no");
  EXPECT_EQ(rows[2].input, "'0' or '1'");
  EXPECT_EQ(rows[2].magnification, 5);
}
