#include "jicgsim/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>

#include "jicgsim/errors.hpp"
#include "json.hpp"

namespace jicgsim {

std::vector<CalibrationConstraint> default_constraints() {
  return {
      {"C1", ConstraintKind::achievable, {20}, 0.35, {0}, FaultClass::bit_set,
       "20x at 35% power sets a stored 0 somewhere over the flip-flop"},
      {"C2", ConstraintKind::achievable, {20}, 0.45, {1}, FaultClass::bit_reset,
       "20x at 45% power clears a stored 1 somewhere over the flip-flop"},
      {"C3", ConstraintKind::no_effective_pair, {5}, 1.0, {}, FaultClass::none,
       "5x at full power never covers both transistors of a pair"},
      {"C4", ConstraintKind::no_effective_pair, {50, 100}, 1.0, {}, FaultClass::none,
       "50x and 100x at full power never cover both transistors of a pair"},
      {"C5", ConstraintKind::no_fault, {20}, 0.30, {0, 1}, FaultClass::none,
       "20x at 30% power injects no fault for either input"},
  };
}

namespace {

using TablePtr = std::unique_ptr<SiteIntensityTable>;

class Calibrator {
 public:
  Calibrator(const CellLayout& cell, const ShotEvaluator& evaluator, const CalibrationOptions& options)
      : cell_(cell), evaluator_(evaluator), options_(options) {
    coarse_ = options.grid.value_or(ScanGrid::around(cell.bounds));
    coarse_.validate();
    dense_ = coarse_;
    dense_.step = coarse_.step / 2.0;
  }

  double power_w(double fraction) const { return fraction * options_.source.p_max_w; }

  const SiteIntensityTable& table(int magnification, bool dense) {
    auto& slot = (dense ? dense_tables_ : coarse_tables_)[magnification];
    if (!slot) {
      const double w = waist_from_d80(find_objective(magnification).d80(options_.spot_model));
      slot = std::make_unique<SiteIntensityTable>(cell_, (dense ? dense_ : coarse_).points(), w,
                                                  options_.sample_pitch, options_.jobs);
    }
    return *slot;
  }

  // The effective set when every pair with strength >= strengths[order[k]]
  // is open.
  ForcedState top_pairs(const SiteIntensityTable& t, const std::vector<double>& strengths,
                        const std::vector<std::size_t>& order, std::size_t k) const {
    ForcedState f;
    const double cut = strengths[order[k]];
    for (std::size_t idx : order) {
      if (strengths[idx] < cut) break;
      (t.pair_channel(idx) == Channel::nmos ? f.open_nmos_pairs : f.open_pmos_pairs).insert(t.pair_ids()[idx]);
    }
    return f;
  }

  // Largest threshold at which `accept` holds for some centre.
  template <class Accept>
  double sweep(const SiteIntensityTable& t, double p_w, Accept accept) const {
    double best = 0.0;
    std::vector<std::size_t> order(t.pair_ids().size());
    for (std::size_t c = 0; c < t.center_count(); ++c) {
      const auto s = t.pair_strengths(c, options_.pmos_ratio);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
      for (std::size_t k = 0; k < order.size(); ++k) {
        const double level = p_w * s[order[k]];
        if (!(level > best)) break;
        if (k + 1 < order.size() && s[order[k + 1]] == s[order[k]]) continue;
        if (accept(top_pairs(t, s, order, k))) {
          best = level;
          break;
        }
      }
    }
    return best;
  }

  double bound(const CalibrationConstraint& c) {
    double out = 0.0;
    for (int mag : c.magnifications) {
      const double p_w = power_w(c.power_fraction);
      switch (c.kind) {
        case ConstraintKind::no_effective_pair: {
          const auto& t = table(mag, true);
          for (std::size_t k = 0; k < t.center_count(); ++k) {
            for (double s : t.pair_strengths(k, options_.pmos_ratio)) out = std::max(out, p_w * s);
          }
          break;
        }
        case ConstraintKind::no_fault:
          out = std::max(out, sweep(table(mag, true), p_w, [&](const ForcedState& f) {
            return std::any_of(c.inputs.begin(), c.inputs.end(), [&](int in) {
              return evaluator_.evaluate(f, options_.duration_ns, in) != FaultClass::none;
            });
          }));
          break;
        case ConstraintKind::achievable:
          out = std::max(out, sweep(table(mag, false), p_w, [&](const ForcedState& f) {
            return evaluator_.evaluate(f, options_.duration_ns, c.inputs.front()) == c.target;
          }));
          break;
      }
    }
    return out;
  }

  bool holds(const CalibrationConstraint& c, const FaultThresholds& th) {
    const double p_w = power_w(c.power_fraction);
    for (int mag : c.magnifications) {
      const auto& t = table(mag, c.kind != ConstraintKind::achievable);
      bool found = false;
      for (std::size_t k = 0; k < t.center_count(); ++k) {
        const ForcedState f = t.effective(k, p_w, th);
        switch (c.kind) {
          case ConstraintKind::no_effective_pair:
            if (!f.empty()) return false;
            break;
          case ConstraintKind::no_fault:
            for (int in : c.inputs) {
              if (evaluator_.evaluate(f, options_.duration_ns, in) != FaultClass::none) return false;
            }
            break;
          case ConstraintKind::achievable:
            found = found || evaluator_.evaluate(f, options_.duration_ns, c.inputs.front()) == c.target;
            break;
        }
        if (found) break;
      }
      if (c.kind == ConstraintKind::achievable && found) return true;
    }
    return c.kind != ConstraintKind::achievable;
  }

 private:
  const CellLayout& cell_;
  const ShotEvaluator& evaluator_;
  CalibrationOptions options_;
  ScanGrid coarse_;
  ScanGrid dense_;
  std::map<int, TablePtr> coarse_tables_;
  std::map<int, TablePtr> dense_tables_;
};

void check_constraint(const CalibrationConstraint& c) {
  if (c.magnifications.empty()) throw InvalidArgument("constraint " + c.name + " names no objective");
  for (int m : c.magnifications) find_objective(m);
  if (!(c.power_fraction >= 0.0 && c.power_fraction <= 1.0)) {
    throw InvalidArgument("constraint " + c.name + " power must lie in [0, 1]");
  }
  if (c.kind != ConstraintKind::no_effective_pair && c.inputs.empty()) {
    throw InvalidArgument("constraint " + c.name + " needs an input bit");
  }
  if (c.kind == ConstraintKind::achievable && c.target == FaultClass::none) {
    throw InvalidArgument("constraint " + c.name + " needs a fault class to achieve");
  }
}

}  // namespace

CalibrationReport calibrate(const CellLayout& ff_cell, const ShotEvaluator& evaluator,
                            std::span<const CalibrationConstraint> constraints, const CalibrationOptions& options) {
  if (constraints.empty()) throw InvalidArgument("calibration needs at least one constraint");
  if (!(options.pmos_ratio > 1.0)) throw InvalidArgument("PMOS threshold ratio must exceed 1");
  options.source.validate();
  for (const auto& c : constraints) check_constraint(c);

  Calibrator cal(ff_cell, evaluator, options);
  std::vector<double> bounds;
  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) {
    bounds.push_back(cal.bound(c));
    if (c.kind == ConstraintKind::achievable) {
      upper = std::min(upper, bounds.back());
    } else {
      lower = std::max(lower, bounds.back());
    }
  }

  if (!(lower < upper) || upper <= 0.0) {
    for (std::size_t k = 0; k < constraints.size(); ++k) {
      const auto& c = constraints[k];
      const bool is_upper = c.kind == ConstraintKind::achievable;
      if ((is_upper && !(bounds[k] > lower)) || (!is_upper && !(bounds[k] < upper))) {
        throw CalibrationFailure(c.name, "calibration infeasible: constraint " + c.name + " (" + c.description +
                                             ") cannot hold together with the others");
      }
    }
    throw CalibrationFailure(constraints.front().name, "calibration infeasible");
  }

  const double chosen = std::isfinite(upper) ? 0.5 * (lower + upper) : 2.0 * lower;
  CalibrationReport report;
  report.thresholds = FaultThresholds::from_nmos(chosen, options.pmos_ratio);
  report.pmos_ratio = options.pmos_ratio;
  report.spot_model = options.spot_model;
  report.lower = lower;
  report.upper = upper;
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const auto& c = constraints[k];
    if (!cal.holds(c, report.thresholds)) {
      throw CalibrationFailure(c.name, "constraint " + c.name + " (" + c.description +
                                           ") fails at the interval midpoint");
    }
    ConstraintBound b;
    b.name = c.name;
    b.description = c.description;
    b.upper = c.kind == ConstraintKind::achievable;
    b.bound = bounds[k];
    b.margin = b.upper ? (b.bound - chosen) / chosen : (chosen - b.bound) / chosen;
    report.constraints.push_back(std::move(b));
  }
  return report;
}

std::string calibration_report_to_json(const CalibrationReport& report) {
  nlohmann::ordered_json j;
  j["format"] = "jicgsim-calibration";
  j["version"] = 1;
  j["spot_model"] = std::string(to_string(report.spot_model));
  j["i_crit_nmos"] = report.thresholds.i_crit_nmos;
  j["i_crit_pmos"] = report.thresholds.i_crit_pmos;
  j["pmos_ratio"] = report.pmos_ratio;
  j["feasible_interval"] = {report.lower, std::isfinite(report.upper) ? nlohmann::ordered_json(report.upper) : nullptr};
  auto& cs = j["constraints"] = nlohmann::ordered_json::array();
  for (const auto& b : report.constraints) {
    cs.push_back({{"name", b.name},
                  {"description", b.description},
                  {"bound_type", b.upper ? "upper" : "lower"},
                  {"bound", b.bound},
                  {"margin", b.margin}});
  }
  return j.dump(2) + "\n";
}

FaultThresholds thresholds_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    FaultThresholds t{j.at("i_crit_nmos").get<double>(), j.at("i_crit_pmos").get<double>()};
    t.validate();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("bad thresholds document: ") + e.what());
  }
}

}  // namespace jicgsim
