#include "jicgsim/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <thread>

#include "jicgsim/errors.hpp"

namespace jicgsim {

std::size_t SensitivityMap::count(FaultClass c) const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), c)); }

FaultClass SensitivityMap::dominant() const {
  FaultClass best = FaultClass::none;
  std::size_t best_n = 0;
  for (FaultClass c : {FaultClass::bit_set, FaultClass::bit_reset, FaultClass::stuck_at, FaultClass::permanent,
                       FaultClass::unstable}) {
    const std::size_t n = count(c);
    if (n > best_n) {
      best = c;
      best_n = n;
    }
  }
  return best;
}

ScanEngine::ScanEngine(const CellLayout& layout, FaultThresholds thresholds, EngineOptions options)
    : thresholds_(thresholds), options_(options) {
  thresholds_.validate();
  options_.source.validate();
  if (!(options_.sample_pitch > 0.0)) throw InvalidArgument("sample pitch must be positive");
  if (layout.kind == CellKind::shift_register) {
    std::vector<const Placement*> ffs;
    for (const auto& c : layout.children) {
      if (c.kind == CellKind::flipflop) ffs.push_back(&c);
    }
    if (ffs.empty()) throw InvalidArgument("register layout has no flip-flops");
    const int n = static_cast<int>(ffs.size());
    target_ = options_.target_ff < 0 ? n - 1 : options_.target_ff;
    if (target_ >= n) throw InvalidArgument("target flip-flop " + std::to_string(target_) + " out of range");
    cell_ = extract_cell(layout, *ffs[target_]);
    evaluator_ = std::make_unique<ShotEvaluator>(ShiftRegister::from_layout(layout), options_.timing);
  } else if (layout.kind == CellKind::flipflop) {
    const int n = options_.register_stages;
    if (n < 1) throw InvalidArgument("register needs at least one stage");
    target_ = options_.target_ff < 0 ? n - 1 : options_.target_ff;
    if (target_ >= n) throw InvalidArgument("target flip-flop " + std::to_string(target_) + " out of range");
    cell_ = layout;
    evaluator_ = std::make_unique<ShotEvaluator>(ShiftRegister::with_target(layout, n, target_), options_.timing);
  } else {
    throw InvalidArgument("attacks need a flip-flop or register layout, not " + std::string(to_string(layout.kind)));
  }
}

ScanGrid ScanEngine::default_grid(double margin, double step) const { return ScanGrid::around(cell_.bounds, margin, step); }

BeamShot ScanEngine::make_shot(Point center, const ShotParams& shot) const {
  BeamShot b;
  b.objective = find_objective(shot.magnification);
  b.spot_model = shot.spot_model;
  b.center = center;
  b.power_fraction = shot.power_fraction;
  b.duration_ns = shot.duration_ns;
  b.fire_time_ns = evaluator_->fire_time_ns();
  b.validate();
  return b;
}

ForcedState ScanEngine::effective_at(Point center, const ShotParams& shot) const {
  const BeamShot b = make_shot(center, shot);
  return effective_pairs(opened_sites(b, cell_, thresholds_, options_.source), cell_);
}

AttackRun ScanEngine::simulate_at(Point center, const ShotParams& shot) const {
  return evaluator_->simulate(effective_at(center, shot), shot.duration_ns, shot.input_bit);
}

const SiteIntensityTable& ScanEngine::table_for(const ScanGrid& grid, const ShotParams& shot) const {
  const double w = waist_from_d80(find_objective(shot.magnification).d80(shot.spot_model));
  const auto key = std::make_tuple(w, grid.first_point.x, grid.first_point.y, grid.last_point.x, grid.last_point.y,
                                   grid.step);
  std::lock_guard lock(table_mutex_);
  auto& slot = tables_[key];
  if (!slot) {
    slot = std::make_unique<SiteIntensityTable>(cell_, grid.points(), w, options_.sample_pitch, options_.jobs);
  }
  return *slot;
}

SensitivityMap ScanEngine::scan(const ScanGrid& grid, const ShotParams& shot) const {
  grid.validate();
  make_shot(grid.first_point, shot);  // validates the shot parameters
  if (shot.input_bit != 0 && shot.input_bit != 1) throw InvalidArgument("input bit must be 0 or 1");

  SensitivityMap map;
  map.grid = grid;
  map.shot = shot;
  map.target_ff = target_;
  map.cells.assign(grid.size(), FaultClass::none);
  const Rect ext = grid.extent();
  map.outside_geometry = ext.x1 < cell_.bounds.x0 || ext.x0 > cell_.bounds.x1 || ext.y1 < cell_.bounds.y0 ||
                         ext.y0 > cell_.bounds.y1;
  if (map.outside_geometry || shot.power_fraction == 0.0) return map;

  const SiteIntensityTable& table = table_for(grid, shot);
  const double p_w = shot.power_fraction * options_.source.p_max_w;
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      map.cells[c] = evaluator_->evaluate(table.effective(c, p_w, thresholds_), shot.duration_ns, shot.input_bit);
    }
  };
  const std::size_t n = map.cells.size();
  const std::size_t workers = std::clamp<std::size_t>(options_.jobs < 1 ? 1 : options_.jobs, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    work(0, n);
    return map;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back(work, b, e);
  }
  for (auto& t : pool) t.join();
  return map;
}

EscalationLadder EscalationLadder::standard() {
  EscalationLadder l;
  for (int p = 10; p <= 100; p += 5) l.power_steps.push_back(p / 100.0);
  l.duration_steps = {50.0, 100.0, 500.0, 1000.0};
  l.objective_order = {5, 20, 50, 100};
  return l;
}

void EscalationLadder::validate() const {
  if (power_steps.empty() || duration_steps.empty() || objective_order.empty()) {
    throw InvalidArgument("escalation ladder lists must not be empty");
  }
  for (std::size_t i = 1; i < power_steps.size(); ++i) {
    if (!(power_steps[i] > power_steps[i - 1])) throw InvalidArgument("power steps must be strictly ascending");
  }
  for (std::size_t i = 1; i < duration_steps.size(); ++i) {
    if (!(duration_steps[i] > duration_steps[i - 1])) throw InvalidArgument("pulse steps must be strictly ascending");
  }
  if (!(power_steps.front() > 0.0) || power_steps.back() > 1.0) {
    throw InvalidArgument("power steps must lie in (0, 1]");
  }
  if (duration_steps.front() < kMinPulseNs) throw InvalidArgument("pulse steps must be at least 2 ns");
  for (int m : objective_order) find_objective(m);
}

bool CampaignResult::success() const {
  return std::any_of(objectives.begin(), objectives.end(), [](const ObjectiveOutcome& o) { return o.success; });
}

CampaignResult escalate(const ScanEngine& engine, const ScanGrid& grid, const EscalationLadder& ladder, int input_bit,
                        SpotModel spot_model) {
  ladder.validate();
  grid.validate();
  CampaignResult result;
  result.input_bit = input_bit;
  result.target_ff = engine.target_ff();
  result.spot_model = spot_model;
  result.grid = grid;
  result.ladder = ladder;

  const auto points = grid.points();
  for (int mag : ladder.objective_order) {
    ObjectiveOutcome out;
    out.magnification = mag;
    for (double dur : ladder.duration_steps) {
      for (double power : ladder.power_steps) {
        const ShotParams shot{mag, spot_model, power, dur, input_bit};
        const SensitivityMap map = engine.scan(grid, shot);
        LadderStep step{mag, power, dur, map.dominant(), map.fault_count()};
        out.trail.push_back(step);
        if (step.fault_cells == 0) continue;
        if (!out.success) {
          out.success = true;
          out.fault = step.outcome;
          out.onset_power = power;
          out.onset_duration_ns = dur;
          out.power_min = out.power_max = power;
          out.duration_min = out.duration_max = dur;
          const auto hit = std::find(map.cells.begin(), map.cells.end(), step.outcome) - map.cells.begin();
          out.witness = points[static_cast<std::size_t>(hit)];
          out.confirmed = engine.simulate_at(out.witness, shot).fault == step.outcome;
        }
        out.power_min = std::min(out.power_min, power);
        out.power_max = std::max(out.power_max, power);
        out.duration_min = std::min(out.duration_min, dur);
        out.duration_max = std::max(out.duration_max, dur);
      }
    }
    result.objectives.push_back(std::move(out));
  }
  return result;
}

std::vector<SensitiveRegion> sensitive_areas(const SensitivityMap& map, const CellLayout& layout) {
  const int nx = map.grid.nx();
  const int ny = map.grid.ny();
  if (map.cells.size() != static_cast<std::size_t>(nx) * ny) {
    throw InvalidArgument("map does not match its grid");
  }
  std::vector<std::pair<std::string, Rect>> gates;
  for (const auto& g : layout.gate_ids()) gates.emplace_back(g, layout.gate_footprint(g));

  std::vector<SensitiveRegion> out;
  std::vector<bool> seen(map.cells.size(), false);
  for (std::size_t start = 0; start < map.cells.size(); ++start) {
    const FaultClass c = map.cells[start];
    if (c == FaultClass::none || seen[start]) continue;
    SensitiveRegion region;
    region.fault = c;
    std::vector<bool> touched(gates.size(), false);
    double sx = 0.0;
    double sy = 0.0;
    std::deque<std::size_t> queue{start};
    seen[start] = true;
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      const int i = static_cast<int>(k % nx);
      const int j = static_cast<int>(k / nx);
      const Point p = map.grid.point(i, j);
      const Rect cell = Rect::centered(p, map.grid.step, map.grid.step);
      region.bbox = region.cells == 0 ? Rect{p.x, p.y, p.x, p.y}
                                      : Rect{std::min(region.bbox.x0, p.x), std::min(region.bbox.y0, p.y),
                                             std::max(region.bbox.x1, p.x), std::max(region.bbox.y1, p.y)};
      ++region.cells;
      sx += p.x;
      sy += p.y;
      for (std::size_t g = 0; g < gates.size(); ++g) touched[g] = touched[g] || cell.overlaps(gates[g].second);
      const int di[] = {1, -1, 0, 0};
      const int dj[] = {0, 0, 1, -1};
      for (int d = 0; d < 4; ++d) {
        const int a = i + di[d];
        const int b = j + dj[d];
        if (a < 0 || b < 0 || a >= nx || b >= ny) continue;
        const std::size_t m = static_cast<std::size_t>(b) * nx + a;
        if (!seen[m] && map.cells[m] == c) {
          seen[m] = true;
          queue.push_back(m);
        }
      }
    }
    region.centroid = {sx / region.cells, sy / region.cells};
    for (std::size_t g = 0; g < gates.size(); ++g) {
      if (touched[g]) region.gate_ids.push_back(gates[g].first);
    }
    out.push_back(std::move(region));
  }
  return out;
}

namespace {

std::string percent_range(double lo, double hi) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ld-%ld", std::lround(lo * 100.0), std::lround(hi * 100.0));
  return buf;
}

std::string ns_range(double lo, double hi) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g-%g", lo, hi);
  return buf;
}

std::string outcome_label(FaultClass c) {
  std::string s(to_string(c));
  std::replace(s.begin(), s.end(), '_', '-');
  return s;
}

}  // namespace

std::vector<ReportRow> summarize(const std::vector<CampaignResult>& results) {
  std::map<int, std::vector<std::pair<int, const ObjectiveOutcome*>>, std::greater<>> by_objective;
  std::map<int, const EscalationLadder*> ladders;
  for (const auto& r : results) {
    for (const auto& o : r.objectives) {
      by_objective[o.magnification].emplace_back(r.input_bit, &o);
      ladders[o.magnification] = &r.ladder;
    }
  }
  std::vector<ReportRow> rows;
  for (auto& [mag, entries] : by_objective) {
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    const EscalationLadder& ladder = *ladders[mag];
    const std::string tried_power = percent_range(ladder.power_steps.front(), ladder.power_steps.back());
    const std::string tried_pulse = ns_range(ladder.duration_steps.front(), ladder.duration_steps.back());
    const bool all_failed =
        std::none_of(entries.begin(), entries.end(), [](const auto& e) { return e.second->success; });
    if (all_failed) {
      std::string inputs;
      int last = -1;
      for (const auto& e : entries) {
        if (e.first == last) continue;
        last = e.first;
        if (!inputs.empty()) inputs += " or ";
        inputs += "'" + std::to_string(e.first) + "'";
      }
      rows.push_back({inputs, mag, tried_power, tried_pulse, "no"});
      continue;
    }
    for (const auto& [input, o] : entries) {
      const std::string label = "'" + std::to_string(input) + "'";
      if (o->success) {
        rows.push_back({label, mag, percent_range(o->power_min, o->power_max), ns_range(o->duration_min, o->duration_max),
                        outcome_label(o->fault)});
      } else {
        rows.push_back({label, mag, tried_power, tried_pulse, "no"});
      }
    }
  }
  return rows;
}

}  // namespace jicgsim
