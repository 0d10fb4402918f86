#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "jicgsim/beam.hpp"
#include "jicgsim/circuit.hpp"
#include "jicgsim/fault.hpp"
#include "jicgsim/layout.hpp"
#include "jicgsim/scan_grid.hpp"

namespace jicgsim {

struct ShotParams {
  int magnification = 20;
  SpotModel spot_model = SpotModel::measured;
  double power_fraction = 0.0;
  double duration_ns = 50.0;
  int input_bit = 0;
};

struct SensitivityMap {
  ScanGrid grid;
  ShotParams shot;
  int target_ff = 0;
  // One class per grid point, ScanGrid::points() order.
  std::vector<FaultClass> cells;
  // Set when the grid does not touch the layout at all.
  bool outside_geometry = false;

  FaultClass at(int i, int j) const { return cells.at(static_cast<std::size_t>(j) * grid.nx() + i); }
  std::size_t count(FaultClass c) const;
  std::size_t fault_count() const { return cells.size() - count(FaultClass::none); }
  // Most frequent non-none class, none for a clean map.
  FaultClass dominant() const;
};

struct EngineOptions {
  AttackTiming timing;
  // Stages of the simulated register when the layout is a single flip-flop.
  int register_stages = 4;
  // Attacked stage; negative selects the last one, whose output is the
  // register output.
  int target_ff = -1;
  BeamSource source;
  double sample_pitch = kDefaultSamplePitch;
  int jobs = 1;
};

// Everything needed to fire shots at one flip-flop of a register: the
// attacked cell geometry, the register netlist and the thresholds. Only
// the attacked flip-flop's transistors are exposed to the beam.
class ScanEngine {
 public:
  // `layout` is a flip-flop cell or a register. Throws InvalidArgument.
  ScanEngine(const CellLayout& layout, FaultThresholds thresholds, EngineOptions options = {});

  const CellLayout& target_cell() const { return cell_; }
  int target_ff() const { return target_; }
  const ShotEvaluator& evaluator() const { return *evaluator_; }
  const FaultThresholds& thresholds() const { return thresholds_; }
  const EngineOptions& options() const { return options_; }
  ScanGrid default_grid(double margin = kDefaultScanMargin, double step = kDefaultScanStep) const;

  SensitivityMap scan(const ScanGrid& grid, const ShotParams& shot) const;

  // Unaccelerated single shot: opened_sites, effective_pairs and a fresh
  // simulation without the memo.
  BeamShot make_shot(Point center, const ShotParams& shot) const;
  ForcedState effective_at(Point center, const ShotParams& shot) const;
  AttackRun simulate_at(Point center, const ShotParams& shot) const;

 private:
  const SiteIntensityTable& table_for(const ScanGrid& grid, const ShotParams& shot) const;

  CellLayout cell_;
  int target_ = 0;
  FaultThresholds thresholds_;
  EngineOptions options_;
  std::unique_ptr<ShotEvaluator> evaluator_;
  mutable std::mutex table_mutex_;
  mutable std::map<std::tuple<double, double, double, double, double, double>, std::unique_ptr<SiteIntensityTable>>
      tables_;
};

struct EscalationLadder {
  std::vector<double> power_steps;
  std::vector<double> duration_steps;
  std::vector<int> objective_order;

  // Power 10% to 100% in 5% steps, pulses of 50, 100, 500 and 1000 ns,
  // objectives 5x, 20x, 50x, 100x.
  static EscalationLadder standard();
  // Throws InvalidArgument unless every list is non-empty and strictly
  // ascending (objective order excepted) and powers lie in (0, 1].
  void validate() const;
};

struct LadderStep {
  int magnification = 0;
  double power_fraction = 0.0;
  double duration_ns = 0.0;
  FaultClass outcome = FaultClass::none;
  std::size_t fault_cells = 0;
};

struct ObjectiveOutcome {
  int magnification = 0;
  bool success = false;
  FaultClass fault = FaultClass::none;
  // First successful rung: lowest power at the shortest pulse that works.
  double onset_power = 0.0;
  double onset_duration_ns = 0.0;
  // Span of every successful rung.
  double power_min = 0.0;
  double power_max = 0.0;
  double duration_min = 0.0;
  double duration_max = 0.0;
  // The onset shot repeated at its first faulting centre gave the same class.
  bool confirmed = false;
  Point witness;
  std::vector<LadderStep> trail;
};

struct CampaignResult {
  int input_bit = 0;
  int target_ff = 0;
  SpotModel spot_model = SpotModel::measured;
  ScanGrid grid;
  EscalationLadder ladder;
  std::vector<ObjectiveOutcome> objectives;

  bool success() const;
};

// Walks the ladder for every objective in turn: pulses outer, powers
// inner, then confirms the first success by repeating it and scans the
// rest of the ladder to find the full successful range.
CampaignResult escalate(const ScanEngine& engine, const ScanGrid& grid, const EscalationLadder& ladder, int input_bit,
                        SpotModel spot_model = SpotModel::measured);

struct SensitiveRegion {
  FaultClass fault = FaultClass::none;
  std::size_t cells = 0;
  // Bounding box of the member shot centres.
  Rect bbox;
  Point centroid;
  // Gates whose footprint overlaps a member cell (the step x step square
  // around a centre), in layout order.
  std::vector<std::string> gate_ids;
};

// 4-connected components of each non-none class.
std::vector<SensitiveRegion> sensitive_areas(const SensitivityMap& map, const CellLayout& layout);

struct ReportRow {
  std::string input;
  int magnification = 0;
  std::string power;
  std::string pulse;
  std::string outcome;
};

// Attack-results table: one row per objective (highest magnification
// first) and input, where inputs that both failed share a row.
std::vector<ReportRow> summarize(const std::vector<CampaignResult>& results);

}  // namespace jicgsim
