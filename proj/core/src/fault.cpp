#include "jicgsim/fault.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "jicgsim/errors.hpp"

namespace jicgsim {

FaultThresholds FaultThresholds::from_nmos(double i_crit_nmos, double pmos_ratio) {
  FaultThresholds t{i_crit_nmos, i_crit_nmos * pmos_ratio};
  t.validate();
  return t;
}

void FaultThresholds::validate() const {
  if (!(i_crit_nmos > 0.0) || !std::isfinite(i_crit_nmos)) {
    throw InvalidArgument("i_crit_nmos must be a positive intensity");
  }
  if (!(i_crit_pmos > i_crit_nmos) || !std::isfinite(i_crit_pmos)) {
    throw InvalidArgument("i_crit_pmos must exceed i_crit_nmos");
  }
}

namespace {

constexpr std::array<std::string_view, 6> kFaultNames{"none", "bit_set", "bit_reset", "stuck_at", "permanent",
                                                      "unstable"};

}  // namespace

std::string_view to_string(FaultClass c) { return kFaultNames[static_cast<std::size_t>(c)]; }

FaultClass fault_class_from_string(std::string_view s) {
  for (std::size_t i = 0; i < kFaultNames.size(); ++i) {
    if (kFaultNames[i] == s) return static_cast<FaultClass>(i);
  }
  throw InvalidArgument("unknown fault class '" + std::string(s) + "'");
}

std::set<int> opened_sites(const BeamShot& shot, const CellLayout& layout, const FaultThresholds& thresholds,
                           const BeamSource& source) {
  shot.validate();
  std::set<int> out;
  if (shot.power_fraction == 0.0) return out;
  for (const auto& s : layout.sites) {
    const double i = s.coupling * mean_intensity_over(shot, s.gate_region, layout, source);
    if (i >= thresholds.for_channel(s.channel)) out.insert(s.id);
  }
  return out;
}

ForcedState effective_pairs(const std::set<int>& opened, const CellLayout& layout) {
  ForcedState out;
  for (int id : opened) {
    if (!layout.has_site(id)) continue;
    const auto& s = layout.site(id);
    const auto ends = layout.pair_sites(s.pair_id);
    const int partner = ends[0] == id ? ends[1] : ends[0];
    if (!opened.count(partner)) continue;
    (s.channel == Channel::nmos ? out.open_nmos_pairs : out.open_pmos_pairs).insert(s.pair_id);
  }
  return out;
}

FaultClass classify(const Trace& reference, const Trace& observed, const Trace& post_reset) {
  for (const Trace* t : {&observed, &post_reset}) {
    if (t->time_ns != reference.time_ns) throw InvalidArgument("traces do not share a time axis");
    if (t->clk != reference.clk || t->d_in != reference.d_in) {
      throw InvalidArgument("traces were driven by different stimulus");
    }
  }
  if (observed.unstable) return FaultClass::unstable;
  if (observed.q_out == reference.q_out) return FaultClass::none;
  const std::size_t n = reference.size();
  if (n > 0 && observed.q_out[n - 1] != reference.q_out[n - 1]) {
    return post_reset.q_out == reference.q_out ? FaultClass::stuck_at : FaultClass::permanent;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (observed.q_out[i] != reference.q_out[i]) {
      return observed.q_out[i] ? FaultClass::bit_set : FaultClass::bit_reset;
    }
  }
  return FaultClass::none;
}

void AttackTiming::validate() const {
  if (!(clock_mhz > 0.0)) throw InvalidArgument("clock frequency must be positive");
  if (!allow_any_clock && std::find(kStandardClocksMhz.begin(), kStandardClocksMhz.end(), clock_mhz) ==
                              kStandardClocksMhz.end()) {
    throw InvalidArgument("clock must be one of 2, 4, 7, 10 or 20 MHz");
  }
  if (!(fire_phase >= 0.0 && fire_phase < 1.0)) throw InvalidArgument("fire phase must lie in [0, 1)");
}

ShotEvaluator::ShotEvaluator(ShiftRegister reg, AttackTiming timing) : reg_(std::move(reg)), timing_(timing) {
  timing_.validate();
  if (timing_.fire_cycle >= 0 && timing_.fire_cycle < reg_.size()) {
    throw InvalidArgument("the shot must fire after the register has filled");
  }
}

int ShotEvaluator::fire_cycle() const { return timing_.fire_cycle >= 0 ? timing_.fire_cycle : reg_.size() + 1; }

double ShotEvaluator::fire_time_ns() const { return (fire_cycle() + timing_.fire_phase) * period_ns(); }

int ShotEvaluator::cycles_for(double duration_ns) const {
  return fire_cycle() + static_cast<int>(std::ceil(duration_ns / period_ns())) + reg_.size() + 2;
}

AttackRun ShotEvaluator::simulate(const ForcedState& pairs, double duration_ns, int input_bit,
                                  const ForcedState& damage, bool damage_survives_reset) const {
  if (input_bit != 0 && input_bit != 1) throw InvalidArgument("input bit must be 0 or 1");
  if (!(duration_ns >= kMinPulseNs)) throw InvalidArgument("pulse must last at least 2 ns");
  TraceRequest request;
  request.clock_mhz = timing_.clock_mhz;
  request.allow_any_clock = timing_.allow_any_clock;
  request.stimulus.assign(cycles_for(duration_ns), static_cast<std::uint8_t>(input_bit));

  AttackRun run;
  run.reference = run_trace(reg_, request);

  request.shot = pairs;
  request.shot.t_start = fire_time_ns();
  request.shot.t_end = fire_time_ns() + duration_ns;
  request.laser_power = 1.0;
  ForcedState lasting = damage;
  lasting.t_start = request.shot.t_start;
  lasting.t_end = std::numeric_limits<double>::infinity();
  request.damage = lasting;
  run.observed = run_trace(reg_, request);

  TraceRequest after_reset;
  after_reset.clock_mhz = timing_.clock_mhz;
  after_reset.allow_any_clock = timing_.allow_any_clock;
  after_reset.stimulus = request.stimulus;
  if (damage_survives_reset) {
    after_reset.damage = damage;
    after_reset.damage.t_start = -std::numeric_limits<double>::infinity();
    after_reset.damage.t_end = std::numeric_limits<double>::infinity();
  }
  run.post_reset = run_trace(reg_, after_reset);
  run.fault = classify(run.reference, run.observed, run.post_reset);
  return run;
}

namespace {

std::string memo_key(const ForcedState& pairs, double duration_ns, int input_bit) {
  std::string key = std::to_string(input_bit) + '|' + std::to_string(duration_ns) + "|n";
  for (int p : pairs.open_nmos_pairs) key += std::to_string(p) + ',';
  key += "|p";
  for (int p : pairs.open_pmos_pairs) key += std::to_string(p) + ',';
  return key;
}

}  // namespace

FaultClass ShotEvaluator::evaluate(const ForcedState& pairs, double duration_ns, int input_bit) const {
  if (pairs.empty()) return FaultClass::none;
  const std::string key = memo_key(pairs, duration_ns, input_bit);
  {
    std::lock_guard lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const FaultClass c = simulate(pairs, duration_ns, input_bit).fault;
  std::lock_guard lock(mutex_);
  memo_.emplace(key, c);
  return c;
}

bool ShotEvaluator::shifts_cleanly_after(const ForcedState& pairs, double duration_ns, int input_bit,
                                         std::span<const std::uint8_t> pattern) const {
  const int n = reg_.size();
  const int hold = fire_cycle() + static_cast<int>(std::ceil((timing_.fire_phase * period_ns() + duration_ns) /
                                                             period_ns())) + 1;
  TraceRequest request;
  request.clock_mhz = timing_.clock_mhz;
  request.allow_any_clock = timing_.allow_any_clock;
  request.stimulus.assign(hold, static_cast<std::uint8_t>(input_bit));
  request.stimulus.insert(request.stimulus.end(), pattern.begin(), pattern.end());
  request.stimulus.insert(request.stimulus.end(), n + 1, 0);
  request.shot = pairs;
  request.shot.t_start = fire_time_ns();
  request.shot.t_end = fire_time_ns() + duration_ns;
  const Trace t = run_trace(reg_, request);
  if (t.unstable) return false;

  // Bit k of the pattern is captured at the end of cycle hold + k and has
  // reached q_out n - 1 cycles later, visible through the following cycle.
  const int spc = static_cast<int>(t.size()) / static_cast<int>(request.stimulus.size());
  for (std::size_t k = 0; k < pattern.size(); ++k) {
    const int cycle = hold + static_cast<int>(k) + n;
    for (int j = 0; j < spc / 2; ++j) {
      if (t.q_out[static_cast<std::size_t>(cycle) * spc + j] != pattern[k]) return false;
    }
  }
  return true;
}

std::size_t ShotEvaluator::memo_size() const {
  std::lock_guard lock(mutex_);
  return memo_.size();
}

SiteIntensityTable::SiteIntensityTable(const CellLayout& layout, std::vector<Point> centers, double waist,
                                       double pitch, int jobs)
    : centers_(std::move(centers)), waist_(waist) {
  std::vector<RegionSampler> samplers;
  for (const auto& s : layout.sites) {
    site_ids_.push_back(s.id);
    coupling_.push_back(s.coupling);
    channel_.push_back(s.channel);
    samplers.emplace_back(s.gate_region, layout, pitch);
  }
  for (int p : layout.pair_ids()) {
    const auto ends = layout.pair_sites(p);
    std::array<std::size_t, 2> idx{};
    for (int k = 0; k < 2; ++k) {
      idx[k] = static_cast<std::size_t>(std::find(site_ids_.begin(), site_ids_.end(), ends[k]) - site_ids_.begin());
    }
    pair_ids_.push_back(p);
    pair_channel_.push_back(channel_[idx[0]]);
    pair_sites_.push_back(idx);
  }

  const std::size_t ns = site_ids_.size();
  unit_.assign(centers_.size() * ns, 0.0);
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t c = begin; c < end; ++c) {
      for (std::size_t s = 0; s < ns; ++s) unit_[c * ns + s] = samplers[s].mean_unit_intensity(centers_[c], waist_);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(jobs < 1 ? 1 : jobs, 1, std::max<std::size_t>(1, centers_.size()));
  if (workers == 1) {
    fill(0, centers_.size());
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (centers_.size() + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(centers_.size(), b + chunk);
    if (b < e) pool.emplace_back(fill, b, e);
  }
  for (auto& t : pool) t.join();
}

ForcedState SiteIntensityTable::effective(std::size_t center, double power_w, const FaultThresholds& thresholds) const {
  ForcedState out;
  if (power_w == 0.0) return out;
  const std::size_t ns = site_ids_.size();
  auto open = [&](std::size_t s) {
    return coupling_[s] * (power_w * unit_[center * ns + s]) >= thresholds.for_channel(channel_[s]);
  };
  for (std::size_t p = 0; p < pair_ids_.size(); ++p) {
    if (open(pair_sites_[p][0]) && open(pair_sites_[p][1])) {
      (pair_channel_[p] == Channel::nmos ? out.open_nmos_pairs : out.open_pmos_pairs).insert(pair_ids_[p]);
    }
  }
  return out;
}

std::vector<double> SiteIntensityTable::pair_strengths(std::size_t center, double pmos_ratio) const {
  const std::size_t ns = site_ids_.size();
  std::vector<double> out(pair_ids_.size());
  for (std::size_t p = 0; p < pair_ids_.size(); ++p) {
    double v = std::numeric_limits<double>::infinity();
    for (std::size_t s : pair_sites_[p]) v = std::min(v, coupling_[s] * unit_[center * ns + s]);
    out[p] = pair_channel_[p] == Channel::pmos ? v / pmos_ratio : v;
  }
  return out;
}

}  // namespace jicgsim
