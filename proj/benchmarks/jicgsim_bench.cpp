#include <benchmark/benchmark.h>

#include "jicgsim/beam.hpp"
#include "jicgsim/campaign.hpp"
#include "jicgsim/circuit.hpp"
#include "jicgsim/fault.hpp"

using namespace jicgsim;

namespace {

const CellLayout& ff() {
  static const CellLayout l = build_flipflop_layout({0, 0});
  return l;
}

// Threshold from a measured-spot calibration; fixed here so the
// benchmarks do not pay for one.
constexpr double kIcritNmos = 1.5209295514359354e-3;

void BM_MeanIntensityOverSite(benchmark::State& state) {
  BeamShot s;
  s.objective = find_objective(20);
  s.power_fraction = 0.5;
  s.center = {21.0, 8.0};
  const Rect region = ff().sites.front().gate_region;
  for (auto _ : state) benchmark::DoNotOptimize(mean_intensity_over(s, region, ff()));
}
BENCHMARK(BM_MeanIntensityOverSite);

void BM_RunTrace(benchmark::State& state) {
  const ShotEvaluator ev(ShiftRegister::with_target(ff(), 4));
  ForcedState shot;
  shot.open_nmos_pairs = {ev.shift_register().stage(3).gates[5].nmos_pairs[0]};
  shot.t_start = ev.fire_time_ns();
  shot.t_end = shot.t_start + 50.0;
  const int cycles = ev.cycles_for(50.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_trace(ev.shift_register(), 2.0, 0, shot, cycles, 1.0, false));
  }
}
BENCHMARK(BM_RunTrace);

void BM_Scan(benchmark::State& state) {
  EngineOptions opt;
  opt.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    // A fresh engine each round keeps the intensity table and memo cold.
    const ScanEngine e(ff(), FaultThresholds::from_nmos(kIcritNmos), opt);
    benchmark::DoNotOptimize(e.scan(e.default_grid(), {20, SpotModel::measured, 1.0, 50.0, 0}));
  }
}
BENCHMARK(BM_Scan)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Escalate(benchmark::State& state) {
  for (auto _ : state) {
    const ScanEngine e(ff(), FaultThresholds::from_nmos(kIcritNmos));
    benchmark::DoNotOptimize(escalate(e, e.default_grid(), EscalationLadder::standard(), 0));
  }
}
BENCHMARK(BM_Escalate)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
BENCHMARK_MAIN();
