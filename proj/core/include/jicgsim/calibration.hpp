#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jicgsim/beam.hpp"
#include "jicgsim/fault.hpp"
#include "jicgsim/layout.hpp"
#include "jicgsim/scan_grid.hpp"

namespace jicgsim {

enum class ConstraintKind {
  // Some centre yields `target` for `inputs[0]`: an upper bound on i_crit_nmos.
  achievable,
  // No centre makes any pair effective: a lower bound.
  no_effective_pair,
  // No centre yields any fault for any of `inputs`: a lower bound.
  no_fault,
};

struct CalibrationConstraint {
  std::string name;
  ConstraintKind kind = ConstraintKind::achievable;
  std::vector<int> magnifications;
  double power_fraction = 1.0;
  std::vector<int> inputs;
  FaultClass target = FaultClass::none;
  std::string description;
};

// The attack outcomes observed on silicon: bit-set from 35% and bit-reset
// from 45% with the 20x objective, nothing with 5x, 50x or 100x even at
// full power, and nothing at 30% with 20x.
std::vector<CalibrationConstraint> default_constraints();

struct CalibrationOptions {
  SpotModel spot_model = SpotModel::measured;
  BeamSource source;
  double duration_ns = 50.0;
  double pmos_ratio = kDefaultPmosRatio;
  // Centres searched for `achievable`; the lower-bound constraints use the
  // same grid at half the step. Defaults to the layout bounds plus margin.
  std::optional<ScanGrid> grid;
  double sample_pitch = kDefaultSamplePitch;
  int jobs = 1;
};

struct ConstraintBound {
  std::string name;
  std::string description;
  bool upper = false;
  double bound = 0.0;
  // Relative distance of the chosen i_crit_nmos from the bound; positive
  // when satisfied.
  double margin = 0.0;
};

struct CalibrationReport {
  FaultThresholds thresholds;
  double pmos_ratio = kDefaultPmosRatio;
  SpotModel spot_model = SpotModel::measured;
  double lower = 0.0;
  double upper = 0.0;
  std::vector<ConstraintBound> constraints;
};

// Chooses i_crit_nmos at the midpoint of the interval allowed by the
// constraints and re-checks every constraint at that value. `ff_cell` is
// the attacked flip-flop and `evaluator` the register it sits in.
// Throws InvalidArgument for an empty constraint set and
// CalibrationFailure naming the first unsatisfiable constraint.
CalibrationReport calibrate(const CellLayout& ff_cell, const ShotEvaluator& evaluator,
                            std::span<const CalibrationConstraint> constraints, const CalibrationOptions& options = {});

std::string calibration_report_to_json(const CalibrationReport& report);
// Accepts a calibration report or a bare {"i_crit_nmos", "i_crit_pmos"}
// object. Throws InvalidArgument.
FaultThresholds thresholds_from_json(std::string_view text);

}  // namespace jicgsim
