#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jicgsim/beam.hpp"
#include "jicgsim/circuit.hpp"
#include "jicgsim/layout.hpp"

namespace jicgsim {

// PMOS needs this many times the NMOS photo-current to open.
inline constexpr double kDefaultPmosRatio = 2.0;

// Critical mean intensities in W/um^2.
struct FaultThresholds {
  double i_crit_nmos = 0.0;
  double i_crit_pmos = 0.0;

  static FaultThresholds from_nmos(double i_crit_nmos, double pmos_ratio = kDefaultPmosRatio);
  // Throws InvalidArgument unless 0 < i_crit_nmos < i_crit_pmos.
  void validate() const;
  double for_channel(Channel c) const { return c == Channel::nmos ? i_crit_nmos : i_crit_pmos; }

  friend bool operator==(const FaultThresholds&, const FaultThresholds&) = default;
};

enum class FaultClass : std::uint8_t { none, bit_set, bit_reset, stuck_at, permanent, unstable };

std::string_view to_string(FaultClass c);
FaultClass fault_class_from_string(std::string_view s);

// Sites whose coupling-weighted mean gate-region intensity reaches the
// threshold of their channel. Pulse duration plays no part here.
std::set<int> opened_sites(const BeamShot& shot, const CellLayout& layout, const FaultThresholds& thresholds,
                           const BeamSource& source = {});

// A pair is forced open only when both of its transistors are. The window
// is left unbounded; callers set it from the pulse.
ForcedState effective_pairs(const std::set<int>& opened, const CellLayout& layout);

// Compares three runs with the same stimulus: fault-free, attacked, and
// attacked then reset. A deviation still present at the last sample is
// stuck_at when the reset run is clean and permanent otherwise; anything
// shorter is a transient named after the direction of its first flip.
// Throws InvalidArgument when time axes, clock or stimulus differ.
FaultClass classify(const Trace& reference, const Trace& observed, const Trace& post_reset);

// When the laser fires relative to the register clock.
struct AttackTiming {
  double clock_mhz = 2.0;
  bool allow_any_clock = false;
  // Fraction of the period after the start of the fire cycle; 0.25 is the
  // middle of clk-low.
  double fire_phase = 0.25;
  // Cycle index of the shot; negative means one cycle after the register
  // has been filled with the input bit.
  int fire_cycle = -1;

  void validate() const;
};

struct AttackRun {
  Trace reference;
  Trace observed;
  Trace post_reset;
  FaultClass fault = FaultClass::none;
};

// Runs constant-input attacks on one register and classifies them. The
// classification memo is keyed by the effective pair set, so a scan only
// simulates each distinct set once. Safe to share between threads.
class ShotEvaluator {
 public:
  ShotEvaluator(ShiftRegister reg, AttackTiming timing = {});

  const ShiftRegister& shift_register() const { return reg_; }
  const AttackTiming& timing() const { return timing_; }
  double period_ns() const { return 1000.0 / timing_.clock_mhz; }
  int fire_cycle() const;
  double fire_time_ns() const;
  // Long enough for the pulse to end and any deviation to reach q_out.
  int cycles_for(double duration_ns) const;

  // `damage` stays forced from the shot to the end of the observed run;
  // with damage_survives_reset it is also present in the post-reset run.
  AttackRun simulate(const ForcedState& pairs, double duration_ns, int input_bit, const ForcedState& damage = {},
                     bool damage_survives_reset = false) const;

  FaultClass evaluate(const ForcedState& pairs, double duration_ns, int input_bit) const;

  // Attack with the input held at input_bit, then shift `pattern` through
  // and flush. True when every pattern bit comes out unchanged.
  bool shifts_cleanly_after(const ForcedState& pairs, double duration_ns, int input_bit,
                            std::span<const std::uint8_t> pattern) const;

  std::size_t memo_size() const;

 private:
  ShiftRegister reg_;
  AttackTiming timing_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, FaultClass> memo_;
};

// Per-watt unit intensity of every site of a layout at every shot centre,
// shared by scans and calibration. value(c, s) times the beam power and
// the site coupling is the site's mean gate-region intensity.
class SiteIntensityTable {
 public:
  SiteIntensityTable(const CellLayout& layout, std::vector<Point> centers, double waist,
                     double pitch = kDefaultSamplePitch, int jobs = 1);

  std::size_t center_count() const { return centers_.size(); }
  std::size_t site_count() const { return site_ids_.size(); }
  const std::vector<Point>& centers() const { return centers_; }
  double waist() const { return waist_; }
  double unit(std::size_t center, std::size_t site) const { return unit_[center * site_ids_.size() + site]; }

  // Same result as effective_pairs(opened_sites(...)) for a shot at centre c.
  ForcedState effective(std::size_t center, double power_w, const FaultThresholds& thresholds) const;
  // Largest threshold scale at which each pair still opens: for pair p,
  // min over its sites of coupling * unit / channel ratio, where the PMOS
  // ratio is i_crit_pmos / i_crit_nmos. Indexed like pair_ids().
  std::vector<double> pair_strengths(std::size_t center, double pmos_ratio) const;
  const std::vector<int>& pair_ids() const { return pair_ids_; }
  Channel pair_channel(std::size_t pair_index) const { return pair_channel_[pair_index]; }

 private:
  std::vector<Point> centers_;
  double waist_;
  std::vector<int> site_ids_;
  std::vector<double> coupling_;
  std::vector<Channel> channel_;
  std::vector<double> unit_;
  std::vector<int> pair_ids_;
  std::vector<Channel> pair_channel_;
  std::vector<std::array<std::size_t, 2>> pair_sites_;
};

}  // namespace jicgsim
