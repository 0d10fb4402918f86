#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "jicgsim/layout.hpp"

namespace jicgsim {

enum class Logic : std::uint8_t { zero, one, x };

// Transistor pairs held conducting ("opened") by a laser shot during
// [t_start, t_end) nanoseconds.
struct ForcedState {
  std::set<int> open_nmos_pairs;
  std::set<int> open_pmos_pairs;
  double t_start = -std::numeric_limits<double>::infinity();
  double t_end = std::numeric_limits<double>::infinity();

  bool empty() const { return open_nmos_pairs.empty() && open_pmos_pairs.empty(); }
  bool active_at(double t) const { return t >= t_start && t < t_end; }

  friend bool operator==(const ForcedState&, const ForcedState&) = default;
};

// JICG NAND: input k drives NMOS pair nmos_pairs[k] in the series
// pull-down chain and PMOS pair pmos_pairs[k] in the parallel pull-up.
struct NandGate {
  std::string gate_id;
  std::vector<int> inputs;
  int output = 0;
  std::vector<int> nmos_pairs;
  std::vector<int> pmos_pairs;
};

// Pull-down conducts iff every position has input 1 or an opened NMOS pair;
// pull-up conducts iff some position has input 0 or an opened PMOS pair.
// Contention resolves to 0; no conducting network gives X.
// Throws InvalidArgument on arity mismatch.
Logic eval_nand(const NandGate& gate, std::span<const bool> inputs, const ForcedState& forced);

// Same rule with the opened pairs given as per-input bit masks.
Logic eval_nand_masked(std::span<const bool> inputs, unsigned nmos_open, unsigned pmos_open);

// Nets of one flip-flop. Gate Gk drives net kG1 + (k - 1).
enum FlipFlopNet : int { kNetD = 0, kNetClk, kNetClr, kNetG1, kNetG2, kNetG3, kNetG4, kNetG5, kNetG6, kNetCount };

using NetValues = std::array<bool, kNetCount>;

// Positive-edge D flip-flop from six NANDs (three SR latches):
//
//   G1 = NAND(clk, G4, G2)   G2 = NAND(G3, clk)   G3 = NAND(G4, G2)
//   G4 = NAND(G1, d)         G5 = NAND(G2, G6)    G6 = NAND(G1, G5, clr_n)
//
// Q is G5 and /Q is G6. While clk is low, pulling G2 or G6 low sets the
// stored bit and pulling G1 or G5 low clears it.
struct FlipFlop {
  static constexpr int kGates = 6;
  static constexpr std::array<int, kGates> kArity{3, 2, 2, 2, 2, 3};

  std::array<NandGate, kGates> gates;

  // Pair ids assigned in layout-builder order starting at first_pair_id.
  static FlipFlop standard(int first_pair_id = 0);
  // Pair ids taken from a flip-flop placement inside `layout`.
  static FlipFlop from_placement(const CellLayout& layout, const Placement& ff);
  // `layout` is a single flip-flop cell (kind flipflop).
  static FlipFlop from_layout(const CellLayout& layout);

  int max_pair_id() const;
};

struct Pins {
  bool d = false;
  bool clk = false;
  bool clr_n = true;
};

struct SettleResult {
  bool stable = true;
  int iterations = 0;
};

// Synchronous fixed-point iteration of the six gates with d/clk/clr pinned.
// X outputs hold the previous net value. Gives up after 8 x gate count
// sweeps and reports the instant as unstable.
SettleResult settle(const FlipFlop& ff, NetValues& nets, Pins pins, const ForcedState& forced);

// Per-gate opened-pair masks of one stage.
struct StageForcing {
  std::array<std::uint8_t, FlipFlop::kGates> nmos{};
  std::array<std::uint8_t, FlipFlop::kGates> pmos{};

  bool any() const;
};

SettleResult settle_masked(const FlipFlop& ff, NetValues& nets, Pins pins, const StageForcing& forcing);

class ShiftRegister {
 public:
  explicit ShiftRegister(std::vector<FlipFlop> stages);

  static ShiftRegister standard(int n_stages);
  static ShiftRegister from_layout(const CellLayout& register_layout);
  // Stage `target` uses the pair ids of ff_layout; the others get fresh ids.
  // target < 0 selects the last stage.
  static ShiftRegister with_target(const CellLayout& ff_layout, int n_stages, int target = -1);

  int size() const { return static_cast<int>(stages_.size()); }
  const FlipFlop& stage(int i) const { return stages_.at(i); }

  // Resolves pair ids to stage/gate/input slots. Throws InvalidArgument for
  // pair ids that are not part of the register or have the wrong channel.
  std::vector<StageForcing> resolve(const ForcedState& forced) const;

 private:
  struct Slot {
    int stage;
    int gate;
    int input;
    Channel channel;
  };

  std::vector<FlipFlop> stages_;
  std::unordered_map<int, Slot> slots_;
};

// Sampled waveforms; every channel shares time_ns.
struct Trace {
  std::vector<double> time_ns;
  std::vector<double> laser;
  std::vector<std::uint8_t> clk;
  std::vector<std::uint8_t> d_in;
  std::vector<std::uint8_t> q_out;
  bool unstable = false;

  std::size_t size() const { return time_ns.size(); }
};

inline constexpr std::array<double, 5> kStandardClocksMhz{2.0, 4.0, 7.0, 10.0, 20.0};

// Timing: cycle k spans [k T, (k + 1) T) with clk low in the first half,
// so the rising edge at k T + T/2 captures stimulus[k]. The register is
// cleared through clr_n before t = 0. Settles happen at every half clock
// and at every forcing-window boundary; samples are taken
// samples_per_cycle times per cycle.
struct TraceRequest {
  double clock_mhz = 2.0;
  bool allow_any_clock = false;
  int samples_per_cycle = 8;
  std::vector<std::uint8_t> stimulus;
  ForcedState shot;
  double laser_power = 0.0;
  // Overlay that is also active outside the shot, used to model damage.
  ForcedState damage;
};

Trace run_trace(const ShiftRegister& reg, const TraceRequest& request);

// Constant input for n_cycles cycles. Throws InvalidArgument unless
// n_cycles >= 2 * reg.size() and the clock is one of the standard ones
// (or allow_any_clock is set).
Trace run_trace(const ShiftRegister& reg, double clock_mhz, int input_bit, const ForcedState& shot, int n_cycles,
                double laser_power = 0.0, bool allow_any_clock = false);

std::string trace_to_csv(const Trace& trace);

}  // namespace jicgsim
