#pragma once

#include "jicgsim/calibration.hpp"
#include "jicgsim/campaign.hpp"
#include "jicgsim/layout.hpp"

namespace jicgsim::testing {

inline const CellLayout& default_ff() {
  static const CellLayout ff = build_flipflop_layout({0, 0});
  return ff;
}

inline constexpr int kStages = 4;

// Calibrated once per test binary; it takes a few seconds.
inline const CalibrationReport& measured_calibration() {
  static const CalibrationReport report = [] {
    const ShotEvaluator ev(ShiftRegister::with_target(default_ff(), kStages));
    const auto constraints = default_constraints();
    return calibrate(default_ff(), ev, constraints);
  }();
  return report;
}

inline const ScanEngine& calibrated_engine() {
  static const ScanEngine engine(default_ff(), measured_calibration().thresholds);
  return engine;
}

// Centre between the two transistors of a pair.
inline Point pair_midpoint(const CellLayout& l, int pair_id) {
  const auto ends = l.pair_sites(pair_id);
  const Point a = l.site(ends[0]).gate_region.center();
  const Point b = l.site(ends[1]).gate_region.center();
  return {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
}

}  // namespace jicgsim::testing
