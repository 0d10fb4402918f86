#include "jicgsim/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "jicgsim/errors.hpp"

namespace jicgsim {

namespace {

using GateInputs = std::array<int, 3>;

// Net feeding each input position, in layout column order.
constexpr std::array<GateInputs, FlipFlop::kGates> kWiring{{
    {kNetClk, kNetG4, kNetG2},
    {kNetG3, kNetClk, -1},
    {kNetG4, kNetG2, -1},
    {kNetG1, kNetD, -1},
    {kNetG2, kNetG6, -1},
    {kNetG1, kNetG5, kNetClr},
}};

constexpr int kSettleSweepsPerGate = 8;

NandGate make_gate(int g) {
  NandGate gate;
  gate.gate_id = "G" + std::to_string(g + 1);
  gate.output = kNetG1 + g;
  for (int k = 0; k < FlipFlop::kArity[g]; ++k) gate.inputs.push_back(kWiring[g][k]);
  return gate;
}

}  // namespace

Logic eval_nand_masked(std::span<const bool> inputs, unsigned nmos_open, unsigned pmos_open) {
  bool pull_down = true;
  bool pull_up = false;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    pull_down = pull_down && (inputs[k] || ((nmos_open >> k) & 1u));
    pull_up = pull_up || !inputs[k] || ((pmos_open >> k) & 1u);
  }
  if (pull_down) return Logic::zero;
  return pull_up ? Logic::one : Logic::x;
}

Logic eval_nand(const NandGate& gate, std::span<const bool> inputs, const ForcedState& forced) {
  const std::size_t n = gate.inputs.size();
  if (inputs.size() != n || gate.nmos_pairs.size() != n || gate.pmos_pairs.size() != n) {
    throw InvalidArgument("gate " + gate.gate_id + " expects " + std::to_string(n) + " inputs, got " +
                          std::to_string(inputs.size()));
  }
  unsigned nmos = 0;
  unsigned pmos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (forced.open_nmos_pairs.count(gate.nmos_pairs[k])) nmos |= 1u << k;
    if (forced.open_pmos_pairs.count(gate.pmos_pairs[k])) pmos |= 1u << k;
  }
  return eval_nand_masked(inputs, nmos, pmos);
}

FlipFlop FlipFlop::standard(int first_pair_id) {
  FlipFlop ff;
  int next = first_pair_id;
  for (int g = 0; g < kGates; ++g) {
    ff.gates[g] = make_gate(g);
    for (int k = 0; k < kArity[g]; ++k) {
      ff.gates[g].nmos_pairs.push_back(next++);
      ff.gates[g].pmos_pairs.push_back(next++);
    }
  }
  return ff;
}

FlipFlop FlipFlop::from_placement(const CellLayout& layout, const Placement& ff_placement) {
  FlipFlop ff;
  for (int g = 0; g < kGates; ++g) {
    const std::string label = "G" + std::to_string(g + 1);
    auto it = std::find_if(ff_placement.children.begin(), ff_placement.children.end(),
                           [&](const Placement& p) { return p.label == label; });
    if (it == ff_placement.children.end()) {
      throw InvalidArgument("flip-flop placement '" + ff_placement.label + "' has no gate " + label);
    }
    if (static_cast<int>(it->children.size()) != kArity[g]) {
      throw InvalidArgument("gate " + label + " needs " + std::to_string(kArity[g]) + " inverter columns");
    }
    ff.gates[g] = make_gate(g);
    for (const Placement& column : it->children) {
      int nmos = -1;
      int pmos = -1;
      for (int id : column.site_ids) {
        const auto& s = layout.site(id);
        (s.channel == Channel::nmos ? nmos : pmos) = s.pair_id;
      }
      if (nmos < 0 || pmos < 0) throw InvalidArgument("inverter column in " + label + " lacks a transistor pair");
      ff.gates[g].nmos_pairs.push_back(nmos);
      ff.gates[g].pmos_pairs.push_back(pmos);
    }
  }
  return ff;
}

FlipFlop FlipFlop::from_layout(const CellLayout& layout) {
  if (layout.kind != CellKind::flipflop) throw InvalidArgument("layout is not a flip-flop cell");
  Placement whole{"FF", CellKind::flipflop, {layout.bounds.x0, layout.bounds.y0}, layout.bounds, {}, layout.children};
  return from_placement(layout, whole);
}

int FlipFlop::max_pair_id() const {
  int m = -1;
  for (const auto& g : gates) {
    for (int p : g.nmos_pairs) m = std::max(m, p);
    for (int p : g.pmos_pairs) m = std::max(m, p);
  }
  return m;
}

bool StageForcing::any() const {
  for (int g = 0; g < FlipFlop::kGates; ++g) {
    if (nmos[g] || pmos[g]) return true;
  }
  return false;
}

SettleResult settle_masked(const FlipFlop& ff, NetValues& nets, Pins pins, const StageForcing& forcing) {
  nets[kNetD] = pins.d;
  nets[kNetClk] = pins.clk;
  nets[kNetClr] = pins.clr_n;
  const int cap = kSettleSweepsPerGate * FlipFlop::kGates;
  std::array<bool, 3> in{};
  for (int iter = 1; iter <= cap; ++iter) {
    NetValues next = nets;
    for (int g = 0; g < FlipFlop::kGates; ++g) {
      const auto& gate = ff.gates[g];
      const std::size_t n = gate.inputs.size();
      for (std::size_t k = 0; k < n; ++k) in[k] = nets[gate.inputs[k]];
      const Logic v = eval_nand_masked(std::span<const bool>(in.data(), n), forcing.nmos[g], forcing.pmos[g]);
      if (v != Logic::x) next[gate.output] = v == Logic::one;
    }
    if (next == nets) return {true, iter};
    nets = next;
  }
  return {false, cap};
}

SettleResult settle(const FlipFlop& ff, NetValues& nets, Pins pins, const ForcedState& forced) {
  StageForcing forcing;
  for (int g = 0; g < FlipFlop::kGates; ++g) {
    const auto& gate = ff.gates[g];
    for (std::size_t k = 0; k < gate.inputs.size(); ++k) {
      if (forced.open_nmos_pairs.count(gate.nmos_pairs[k])) forcing.nmos[g] |= 1u << k;
      if (forced.open_pmos_pairs.count(gate.pmos_pairs[k])) forcing.pmos[g] |= 1u << k;
    }
  }
  return settle_masked(ff, nets, pins, forcing);
}

ShiftRegister::ShiftRegister(std::vector<FlipFlop> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw InvalidArgument("a register needs at least one stage");
  for (int s = 0; s < size(); ++s) {
    for (int g = 0; g < FlipFlop::kGates; ++g) {
      const auto& gate = stages_[s].gates[g];
      for (int k = 0; k < static_cast<int>(gate.inputs.size()); ++k) {
        for (auto [pair, channel] : {std::pair{gate.nmos_pairs[k], Channel::nmos}, {gate.pmos_pairs[k], Channel::pmos}}) {
          if (!slots_.emplace(pair, Slot{s, g, k, channel}).second) {
            throw InvalidArgument("pair id " + std::to_string(pair) + " is used twice in the register");
          }
        }
      }
    }
  }
}

ShiftRegister ShiftRegister::standard(int n_stages) {
  if (n_stages < 1) throw InvalidArgument("a register needs at least one stage");
  std::vector<FlipFlop> stages;
  int next = 0;
  for (int i = 0; i < n_stages; ++i) {
    stages.push_back(FlipFlop::standard(next));
    next = stages.back().max_pair_id() + 1;
  }
  return ShiftRegister(std::move(stages));
}

ShiftRegister ShiftRegister::from_layout(const CellLayout& register_layout) {
  std::vector<FlipFlop> stages;
  for (const auto& child : register_layout.children) {
    if (child.kind == CellKind::flipflop) stages.push_back(FlipFlop::from_placement(register_layout, child));
  }
  if (stages.empty() && register_layout.kind == CellKind::flipflop) {
    stages.push_back(FlipFlop::from_layout(register_layout));
  }
  return ShiftRegister(std::move(stages));
}

ShiftRegister ShiftRegister::with_target(const CellLayout& ff_layout, int n_stages, int target) {
  if (n_stages < 1) throw InvalidArgument("a register needs at least one stage");
  if (target < 0) target = n_stages - 1;
  if (target >= n_stages) throw InvalidArgument("target stage " + std::to_string(target) + " out of range");
  const FlipFlop target_ff = FlipFlop::from_layout(ff_layout);
  int next = 0;
  for (int p : ff_layout.pair_ids()) next = std::max(next, p + 1);
  std::vector<FlipFlop> stages;
  for (int i = 0; i < n_stages; ++i) {
    if (i == target) {
      stages.push_back(target_ff);
    } else {
      stages.push_back(FlipFlop::standard(next));
      next = stages.back().max_pair_id() + 1;
    }
  }
  return ShiftRegister(std::move(stages));
}

std::vector<StageForcing> ShiftRegister::resolve(const ForcedState& forced) const {
  std::vector<StageForcing> out(stages_.size());
  auto apply = [&](int pair, Channel channel) {
    auto it = slots_.find(pair);
    if (it == slots_.end()) throw InvalidArgument("pair id " + std::to_string(pair) + " is not in the register");
    const Slot& slot = it->second;
    if (slot.channel != channel) {
      throw InvalidArgument("pair id " + std::to_string(pair) + " forced with the wrong channel type");
    }
    auto& masks = channel == Channel::nmos ? out[slot.stage].nmos : out[slot.stage].pmos;
    masks[slot.gate] |= static_cast<std::uint8_t>(1u << slot.input);
  };
  for (int p : forced.open_nmos_pairs) apply(p, Channel::nmos);
  for (int p : forced.open_pmos_pairs) apply(p, Channel::pmos);
  return out;
}

namespace {

constexpr double kTimeEps = 1e-9;

struct Simulator {
  const ShiftRegister& reg;
  std::vector<NetValues> state;
  bool unstable = false;

  explicit Simulator(const ShiftRegister& r) : reg(r), state(r.size(), NetValues{}) {}

  // Edge-safe update: every stage first sees its predecessor's output from
  // before this instant, then the chain relaxes with live values.
  void step(bool d0, bool clk, bool clr_n, std::span<const StageForcing> forcing) {
    const int n = reg.size();
    std::vector<bool> snapshot(n);
    for (int i = 0; i < n; ++i) snapshot[i] = state[i][kNetG5];
    for (int i = 0; i < n; ++i) {
      const bool d = i == 0 ? d0 : snapshot[i - 1];
      unstable |= !settle_masked(reg.stage(i), state[i], {d, clk, clr_n}, forcing[i]).stable;
    }
    for (int pass = 0; pass < n + 2; ++pass) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        const bool d = i == 0 ? d0 : state[i - 1][kNetG5];
        const NetValues before = state[i];
        unstable |= !settle_masked(reg.stage(i), state[i], {d, clk, clr_n}, forcing[i]).stable;
        changed |= before != state[i];
      }
      if (!changed) break;
    }
  }
};

std::vector<StageForcing> merge(const std::vector<StageForcing>& a, const std::vector<StageForcing>& b) {
  std::vector<StageForcing> out = a;
  for (std::size_t s = 0; s < out.size(); ++s) {
    for (int g = 0; g < FlipFlop::kGates; ++g) {
      out[s].nmos[g] |= b[s].nmos[g];
      out[s].pmos[g] |= b[s].pmos[g];
    }
  }
  return out;
}

bool standard_clock(double mhz) {
  return std::any_of(kStandardClocksMhz.begin(), kStandardClocksMhz.end(),
                     [mhz](double f) { return std::abs(f - mhz) < 1e-12; });
}

}  // namespace

Trace run_trace(const ShiftRegister& reg, const TraceRequest& request) {
  if (!(request.clock_mhz > 0.0)) throw InvalidArgument("clock frequency must be positive");
  if (!request.allow_any_clock && !standard_clock(request.clock_mhz)) {
    throw InvalidArgument("clock must be one of 2, 4, 7, 10 or 20 MHz");
  }
  if (request.samples_per_cycle < 2) throw InvalidArgument("need at least two samples per cycle");
  const int n_cycles = static_cast<int>(request.stimulus.size());
  if (n_cycles < 2 * reg.size()) {
    throw InvalidArgument("trace of " + std::to_string(n_cycles) + " cycles cannot flush a " +
                          std::to_string(reg.size()) + "-stage register");
  }

  const double period = 1000.0 / request.clock_mhz;
  const double half = 0.5 * period;
  const double end = n_cycles * period;

  std::vector<double> events;
  for (int k = 0; k < 2 * n_cycles; ++k) events.push_back(k * half);
  for (const ForcedState* f : {&request.shot, &request.damage}) {
    for (double t : {f->t_start, f->t_end}) {
      if (std::isfinite(t) && t > 0.0 && t < end) events.push_back(t);
    }
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end(), [](double a, double b) { return std::abs(a - b) < kTimeEps; }),
               events.end());

  const auto shot_forcing = reg.resolve(request.shot);
  const auto damage_forcing = reg.resolve(request.damage);
  const auto both_forcing = merge(shot_forcing, damage_forcing);
  const std::vector<StageForcing> no_forcing(reg.size());
  auto forcing_at = [&](double t) -> const std::vector<StageForcing>& {
    const bool shot = !request.shot.empty() && request.shot.active_at(t + kTimeEps);
    const bool damage = !request.damage.empty() && request.damage.active_at(t + kTimeEps);
    if (shot && damage) return both_forcing;
    if (shot) return shot_forcing;
    if (damage) return damage_forcing;
    return no_forcing;
  };
  auto cycle_of = [&](double t) { return std::clamp(static_cast<int>(std::floor(t / period + kTimeEps)), 0, n_cycles - 1); };
  auto clk_at = [&](double t) { return t - cycle_of(t) * period >= half - kTimeEps; };

  Simulator sim(reg);
  const bool d0 = request.stimulus.front() != 0;
  sim.step(d0, false, false, forcing_at(0.0));
  sim.step(d0, false, true, forcing_at(0.0));

  Trace trace;
  trace.time_ns.reserve(static_cast<std::size_t>(n_cycles) * request.samples_per_cycle);
  std::size_t next_event = 0;
  for (int j = 0; j < n_cycles * request.samples_per_cycle; ++j) {
    const double ts = j * period / request.samples_per_cycle;
    while (next_event < events.size() && events[next_event] <= ts + kTimeEps) {
      const double te = events[next_event++];
      sim.step(request.stimulus[cycle_of(te)] != 0, clk_at(te), true, forcing_at(te));
    }
    const bool laser_on = request.shot.active_at(ts + kTimeEps) && std::isfinite(request.shot.t_start);
    trace.time_ns.push_back(ts);
    trace.laser.push_back(laser_on ? request.laser_power : 0.0);
    trace.clk.push_back(clk_at(ts));
    trace.d_in.push_back(request.stimulus[cycle_of(ts)]);
    trace.q_out.push_back(sim.state.back()[kNetG5]);
  }
  trace.unstable = sim.unstable;
  return trace;
}

Trace run_trace(const ShiftRegister& reg, double clock_mhz, int input_bit, const ForcedState& shot, int n_cycles,
                double laser_power, bool allow_any_clock) {
  if (input_bit != 0 && input_bit != 1) throw InvalidArgument("input bit must be 0 or 1");
  if (n_cycles < 2 * reg.size()) {
    throw InvalidArgument("trace of " + std::to_string(n_cycles) + " cycles cannot flush a " +
                          std::to_string(reg.size()) + "-stage register");
  }
  TraceRequest request;
  request.clock_mhz = clock_mhz;
  request.allow_any_clock = allow_any_clock;
  request.stimulus.assign(n_cycles, static_cast<std::uint8_t>(input_bit));
  request.shot = shot;
  request.laser_power = laser_power;
  return run_trace(reg, request);
}

std::string trace_to_csv(const Trace& trace) {
  std::string out = "time_ns,laser,clk,d_in,q_out\n";
  char line[96];
  for (std::size_t i = 0; i < trace.size(); ++i) {
    std::snprintf(line, sizeof line, "%.3f,%.4f,%d,%d,%d\n", trace.time_ns[i], trace.laser[i], trace.clk[i],
                  trace.d_in[i], trace.q_out[i]);
    out += line;
  }
  return out;
}

}  // namespace jicgsim
