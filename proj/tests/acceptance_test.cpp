// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check runs against the calibrated default flip-flop.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "jicgsim/beam.hpp"
#include "jicgsim/calibration.hpp"
#include "jicgsim/campaign.hpp"
#include "jicgsim/circuit.hpp"
#include "jicgsim/errors.hpp"
#include "jicgsim/layout.hpp"

using namespace jicgsim;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (!pass) detail << "; ";
    else detail.str("");
    pass = false;
    detail << why;
  }
};

const CellLayout& ff() {
  static const CellLayout l = build_flipflop_layout({0, 0});
  return l;
}

const ShotEvaluator& bare_evaluator() {
  static const ShotEvaluator ev(ShiftRegister::with_target(ff(), 4));
  return ev;
}

double calibration_seconds = 0.0;

const CalibrationReport& measured() {
  static const CalibrationReport r = [] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto constraints = default_constraints();
    CalibrationReport out = calibrate(ff(), bare_evaluator(), constraints);
    calibration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return r;
}

const ScanEngine& engine() {
  static const ScanEngine e(ff(), measured().thresholds);
  return e;
}

double campaign_seconds = 0.0;

const std::vector<CampaignResult>& campaign() {
  static const std::vector<CampaignResult> results = [] {
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<CampaignResult> out;
    for (int input : {0, 1}) out.push_back(escalate(engine(), engine().default_grid(), EscalationLadder::standard(), input));
    campaign_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
  }();
  return results;
}

const ObjectiveOutcome& outcome(int input, int mag) {
  for (const auto& o : campaign().at(input).objectives) {
    if (o.magnification == mag) return o;
  }
  throw NotFound("objective missing from campaign");
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Verdict attack_table() {
  Verdict v;
  for (int input : {0, 1}) {
    for (int mag : {100, 50, 5}) {
      const auto& o = outcome(input, mag);
      if (o.success) v.fail(std::to_string(mag) + "x input " + std::to_string(input) + " faulted");
    }
  }
  const struct {
    int input;
    FaultClass want;
    double onset;
  } expect[] = {{0, FaultClass::bit_set, 0.35}, {1, FaultClass::bit_reset, 0.45}};
  for (const auto& e : expect) {
    const auto& o = outcome(e.input, 20);
    if (!o.success || o.fault != e.want) {
      v.fail("20x input " + std::to_string(e.input) + " gave " + std::string(to_string(o.fault)));
    } else if (std::abs(o.onset_power - e.onset) > 0.05 + 1e-9) {
      v.fail(fmt("20x input %.0f onset %.2f", e.input, o.onset_power));
    } else if (!o.confirmed) {
      v.fail("20x onset not confirmed");
    }
  }
  if (campaign_seconds >= 60.0) v.fail(fmt("campaign took %.1f s", campaign_seconds));
  if (v.pass) {
    v.detail << fmt("20x onsets %.2f (set) and %.2f (reset), ", outcome(0, 20).onset_power,
                    outcome(1, 20).onset_power)
             << fmt("5x/50x/100x clean; campaign %.1f s, calibration %.1f s", campaign_seconds, calibration_seconds);
  }
  return v;
}

ShotParams twenty_x(double power, int input, double duration = 50.0) {
  return {20, SpotModel::measured, power, duration, input};
}

Verdict map_topology() {
  Verdict v;
  const struct {
    int input;
    FaultClass fault;
    std::set<std::string> gates;
  } expect[] = {{0, FaultClass::bit_set, {"G2", "G6"}}, {1, FaultClass::bit_reset, {"G1", "G5"}}};
  double worst = 0.0;
  for (const auto& e : expect) {
    const auto map = engine().scan(engine().default_grid(), twenty_x(1.0, e.input));
    std::set<std::string> seen;
    for (const auto& r : sensitive_areas(map, ff())) {
      if (r.fault != e.fault) {
        v.fail("unexpected " + std::string(to_string(r.fault)) + " region");
        continue;
      }
      if (r.gate_ids.size() != 1) {
        v.fail("region spans " + std::to_string(r.gate_ids.size()) + " gates");
        continue;
      }
      seen.insert(r.gate_ids[0]);
      const double d = distance(r.centroid, ff().gate_footprint(r.gate_ids[0]).center());
      worst = std::max(worst, d);
      if (d > 3.0) v.fail(r.gate_ids[0] + fmt(" centroid %.2f um off", d));
    }
    if (seen != e.gates) v.fail(std::string(to_string(e.fault)) + " regions on the wrong gates");
  }
  if (v.pass) v.detail << fmt("set on {G2,G6}, reset on {G1,G5}; worst centroid offset %.2f um", worst);
  return v;
}

Verdict blocking() {
  Verdict v;
  std::mt19937_64 rng(20241);
  const Rect area = ff().bounds;
  std::uniform_real_distribution<double> ux(area.x0 - 2.0, area.x1 + 2.0), uy(area.y0 - 2.0, area.y1 + 2.0);
  const double durations[] = {50, 100, 500, 1000};
  int violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Point c{ux(rng), uy(rng)};
    const int mag = trial % 2 ? 100 : 50;
    const ShotParams shot{mag, SpotModel::measured, 1.0, durations[rng() % 4], static_cast<int>(rng() % 2)};
    const bool opened = !engine().effective_at(c, shot).empty();
    const bool changed = engine().simulate_at(c, shot).fault != FaultClass::none;
    if (opened || changed) ++violations;
  }
  if (violations) v.fail(std::to_string(violations) + " of 1000 trials violated");
  else v.detail << "1000 trials, 0 violations";
  return v;
}

// Bisection on the encircled-energy equation.
double waist_by_bisection(double d80) {
  const double r = 0.5 * d80;
  double lo = 1e-6, hi = 10.0 * d80;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (1.0 - std::exp(-2.0 * r * r / (mid * mid)) > 0.8 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Verdict gaussian() {
  Verdict v;
  const BeamSource src;
  double worst_power = 0.0, worst_energy = 0.0, worst_waist = 0.0;
  for (const auto& o : objective_table()) {
    for (SpotModel m : {SpotModel::datasheet, SpotModel::measured}) {
      BeamShot s;
      s.objective = o;
      s.spot_model = m;
      s.power_fraction = 1.0;
      const double w = s.waist();
      const double p = s.power_w(src);
      // Composite Simpson of I(r) 2 pi r over a 10 w disk.
      const int n = 4000;
      const double h = 10.0 * w / n;
      auto f = [&](double r) { return p * gaussian_unit_intensity(w, r * r) * 2.0 * std::numbers::pi * r; };
      double sum = f(0) + f(10.0 * w);
      for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
      worst_power = std::max(worst_power, std::abs(sum * h / 3.0 / p - 1.0));
      worst_energy = std::max(worst_energy, std::abs(energy_within(s, 0.5 * s.d80()) - 0.8));
      worst_waist = std::max(worst_waist, std::abs(w - waist_by_bisection(s.d80())));
    }
  }
  if (worst_power > 1e-4) v.fail(fmt("power recovered to %.2e", worst_power));
  if (worst_energy > 1e-9) v.fail(fmt("encircled energy off by %.2e", worst_energy));
  if (worst_waist > 1e-9) v.fail(fmt("waist off by %.2e um", worst_waist));
  if (v.pass) v.detail << fmt("power %.1e, energy %.1e, waist %.1e um", worst_power, worst_energy, worst_waist);
  return v;
}

// Transistor-level NAND: series pull-down of 2n transistors, n parallel
// pull-up branches of two. Pair p lights transistors 2p and 2p + 1.
Logic conduction_oracle(const std::vector<bool>& in, unsigned lit_pairs) {
  const int n = static_cast<int>(in.size());
  bool down = true;
  for (int k = 0; k < n; ++k) down = down && (in[k] || ((lit_pairs >> k) & 1u));
  if (down) return Logic::zero;
  for (int k = 0; k < n; ++k) {
    if (!in[k] || ((lit_pairs >> (n + k)) & 1u)) return Logic::one;
  }
  return Logic::x;
}

Verdict nand_oracle() {
  Verdict v;
  int cases = 0, mismatches = 0;
  for (int n : {2, 3}) {
    NandGate g;
    for (int k = 0; k < n; ++k) {
      g.inputs.push_back(k);
      g.nmos_pairs.push_back(k);
      g.pmos_pairs.push_back(n + k);
    }
    for (unsigned bits = 0; bits < (1u << n); ++bits) {
      std::vector<bool> in(n);
      bool raw[3];
      for (int k = 0; k < n; ++k) raw[k] = in[k] = (bits >> k) & 1u;
      for (unsigned subset = 0; subset < (1u << (2 * n)); ++subset) {
        ForcedState f;
        for (int p = 0; p < 2 * n; ++p) {
          if ((subset >> p) & 1u) (p < n ? f.open_nmos_pairs : f.open_pmos_pairs).insert(p);
        }
        ++cases;
        if (eval_nand(g, std::span<const bool>(raw, n), f) != conduction_oracle(in, subset)) ++mismatches;
      }
    }
  }
  if (mismatches) v.fail(std::to_string(mismatches) + " of " + std::to_string(cases) + " cases disagree");
  else v.detail << cases << " cases agree";
  return v;
}

std::string pairs_key(const ForcedState& f, double duration, int input) {
  std::ostringstream k;
  k << input << '/' << duration << '/';
  for (int p : f.open_nmos_pairs) k << 'n' << p;
  for (int p : f.open_pmos_pairs) k << 'p' << p;
  return k.str();
}

Verdict transient() {
  Verdict v;
  std::mt19937_64 rng(64);
  const std::uint64_t word = rng();
  std::vector<std::uint8_t> pattern(64);
  for (int k = 0; k < 64; ++k) pattern[k] = (word >> k) & 1u;

  std::map<std::string, bool> clean;
  std::size_t shots = 0, unstable = 0;
  for (const auto& result : campaign()) {
    for (const auto& o : result.objectives) {
      if (!o.success) continue;
      for (const auto& step : o.trail) {
        if (step.fault_cells == 0) continue;
        const ShotParams shot{o.magnification, SpotModel::measured, step.power_fraction, step.duration_ns,
                              result.input_bit};
        const auto map = engine().scan(result.grid, shot);
        const auto pts = result.grid.points();
        for (std::size_t k = 0; k < pts.size(); ++k) {
          if (map.cells[k] == FaultClass::stuck_at || map.cells[k] == FaultClass::permanent) {
            v.fail(std::string(to_string(map.cells[k])) + fmt(" at (%.1f, %.1f)", pts[k].x, pts[k].y));
            continue;
          }
          // Shots that oscillate while the beam is on did not inject the
          // reported fault; they are counted but not shifted.
          if (map.cells[k] == FaultClass::unstable) ++unstable;
          if (map.cells[k] != o.fault) continue;
          ++shots;
          const ForcedState pairs = engine().effective_at(pts[k], shot);
          const std::string key = pairs_key(pairs, step.duration_ns, result.input_bit);
          auto it = clean.find(key);
          if (it == clean.end()) {
            it = clean.emplace(key, engine().evaluator().shifts_cleanly_after(pairs, step.duration_ns,
                                                                                result.input_bit, pattern))
                     .first;
          }
          if (!it->second) v.fail(fmt("pattern corrupted after shot at (%.1f, %.1f)", pts[k].x, pts[k].y));
        }
      }
    }
  }
  if (shots == 0) v.fail("no successful shots to check");
  if (v.pass) {
    v.detail << shots << " successful shots over " << clean.size() << " distinct pair sets shift cleanly; " << unstable
             << " unstable cells skipped";
  }
  return v;
}

Verdict countermeasure() {
  Verdict v;
  CellLayout covered = ff();
  int fillers = 0;
  for (int p : covered.pair_ids()) {
    const auto& s = covered.site(covered.pair_sites(p)[0]);
    if (s.channel == Channel::nmos && (s.gate_id == "G2" || s.gate_id == "G6")) {
      covered = place_filler_over_site(covered, s.id);
      ++fillers;
    }
  }
  const ScanEngine shielded(covered, measured().thresholds);
  const auto& timing = shielded.evaluator().timing();
  const double half = 0.5 * shielded.evaluator().period_ns();
  std::size_t scans = 0, spanning = 0, residual = 0;
  for (const auto& step : outcome(0, 20).trail) {
    if (step.fault_cells == 0) continue;
    const auto map = shielded.scan(shielded.default_grid(), twenty_x(step.power_fraction, 0, step.duration_ns));
    // A pulse still on at the rising edge reaches the data path (G3, G4),
    // which no cover over G2 and G6 can block; reported, not judged.
    if (timing.fire_phase * 2.0 * half + step.duration_ns > half) {
      ++spanning;
      residual += map.fault_count() > 0;
      continue;
    }
    ++scans;
    if (map.fault_count()) {
      v.fail(std::to_string(map.fault_count()) + fmt(" cells still fault at power %.2f, %.0f ns", step.power_fraction,
                                                      step.duration_ns));
    }
  }
  if (scans == 0) v.fail("no successful 20x bit-set scan to repeat");
  if (v.pass) {
    v.detail << fillers << " fillers; " << scans << " previously faulting scans now all none; " << residual << " of "
             << spanning << " edge-spanning scans still fault through the data path";
  }
  return v;
}

Verdict spot_discriminator() {
  Verdict v;
  CalibrationOptions opt;
  opt.spot_model = SpotModel::datasheet;
  const auto constraints = default_constraints();
  try {
    calibrate(ff(), bare_evaluator(), constraints, opt);
    v.fail("datasheet spots calibrated");
  } catch (const CalibrationFailure& e) {
    if (e.constraint() != "C1") v.fail("datasheet spots failed at " + e.constraint());
  }
  const auto& m = measured();
  if (!(m.thresholds.i_crit_nmos > m.lower && m.thresholds.i_crit_nmos <= m.upper)) v.fail("measured threshold outside its interval");
  if (v.pass) v.detail << "datasheet fails at C1; measured i_crit_nmos " << m.thresholds.i_crit_nmos;
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"attack-results table", attack_table},
      {"sensitive-area topology", map_topology},
      {"small-spot blocking", blocking},
      {"gaussian beam model", gaussian},
      {"nand conduction oracle", nand_oracle},
      {"faults are transient", transient},
      {"filler countermeasure", countermeasure},
      {"datasheet vs measured spots", spot_discriminator},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failed += !v.pass;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
