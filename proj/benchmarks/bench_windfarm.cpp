#include <benchmark/benchmark.h>

#include "windfarm/aero_tables.hpp"
#include "windfarm/analysis.hpp"
#include "windfarm/scenario_config.hpp"
#include "windfarm/simulation.hpp"
#include "windfarm/turbine.hpp"
#include "windfarm/wake_field.hpp"

namespace wf = windfarm;

namespace {

const wf::AeroTables& tables() {
  static const wf::AeroTables t = wf::AeroTables::generate_default();
  return t;
}

void BM_TableLookup(benchmark::State& state) {
  double tsr = 3.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tables().power_coefficient(tsr, 0.05));
    tsr = tsr > 12.0 ? 3.0 : tsr + 0.013;
  }
}
BENCHMARK(BM_TableLookup);

void BM_TurbineStep(benchmark::State& state) {
  wf::Turbine turbine(wf::TurbineParams{}, tables());
  turbine.initialize_steady(13.0, 3.0e6);
  for (auto _ : state) benchmark::DoNotOptimize(turbine.step(3.0e6, 13.0, 0.1));
}
BENCHMARK(BM_TurbineStep);

void BM_Scenario(benchmark::State& state) {
  wf::ScenarioConfig c;
  c.duration = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(wf::run_scenario(c, tables()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.step_count()));
}
BENCHMARK(BM_Scenario)->Arg(400)->Arg(1200)->Unit(benchmark::kMillisecond);

void BM_SpectrumSweep(benchmark::State& state) {
  wf::SweepOptions o;
  o.exhaustive = state.range(0) <= 6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wf::sweep_patterns(0.96352, 0.004952, 0.5, 0.1, static_cast<std::size_t>(state.range(0)), o));
  }
}
BENCHMARK(BM_SpectrumSweep)->Arg(3)->Arg(6)->Arg(9)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
