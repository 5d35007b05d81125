// Serial reference paths against the OpenMP ones.
//   prosim_bench --benchmark_filter=Candidates

#include <benchmark/benchmark.h>
#include <omp.h>

#include <vector>

#include "prosim/dispatch.hpp"
#include "prosim/investor.hpp"
#include "synthetic_fleet.hpp"

using namespace prosim;

namespace {

const FleetDataset& fleet() {
    static const FleetDataset f = synth::make_fleet({8, 2012, 15.4});
    return f;
}

CandidateGrid coarse_grid() {
    CandidateGrid g;
    g.pv_step = 1.0;
    g.battery_step = 2.0;
    return g;
}

void BM_DispatchTotals(benchmark::State& state) {
    const auto& h = fleet().households.front();
    AssetLedger ledger;
    ledger.add_pv(1, 4.0);
    ledger.add_battery(1, 10.0);
    const TechnicalParams tech;
    const auto years = year_states(ledger, tech, 1, 10);
    std::vector<AnnualEnergy> annual(years.size());
    const auto index = DispatchIndex::build(h.demand, h.insolation);
    const bool indexed = state.range(0) != 0;
    for (auto _ : state) {
        const double soc = dispatch_totals(h.demand, h.insolation, years, tech, 0.0, annual,
                                           indexed ? &index : nullptr);
        benchmark::DoNotOptimize(soc);
        benchmark::DoNotOptimize(annual.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(years.size() * h.demand.size()));
    state.SetLabel(indexed ? "indexed" : "plain");
}
BENCHMARK(BM_DispatchTotals)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

// four scalar dispatches against one four-lane batch
void BM_DispatchBatch(benchmark::State& state) {
    const auto& h = fleet().households.front();
    const TechnicalParams tech;
    const std::size_t lanes = kDispatchLanes;
    std::vector<std::vector<YearState>> per_lane;
    for (std::size_t l = 0; l < lanes; ++l) {
        AssetLedger ledger;
        ledger.add_pv(1, 2.0 + l);
        if (l > 0) ledger.add_battery(1, 2.5 * l);
        per_lane.push_back(year_states(ledger, tech, 1, 10));
    }
    const std::size_t n_years = per_lane.front().size();
    std::vector<YearState> years(n_years * lanes);
    for (std::size_t y = 0; y < n_years; ++y)
        for (std::size_t l = 0; l < lanes; ++l) years[y * lanes + l] = per_lane[l][y];
    std::vector<AnnualEnergy> annual(years.size());
    const std::vector<double> soc0(lanes, 0.0);
    const auto index = DispatchIndex::build(h.demand, h.insolation);
    const bool batched = state.range(0) != 0;
    for (auto _ : state) {
        if (batched) {
            dispatch_totals_batch(h.demand, h.insolation, years, lanes, tech, soc0, annual, {}, &index);
        } else {
            for (std::size_t l = 0; l < lanes; ++l)
                benchmark::DoNotOptimize(
                    dispatch_totals(h.demand, h.insolation, per_lane[l], tech, 0.0, std::span(annual).first(n_years)));
        }
        benchmark::DoNotOptimize(annual.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(years.size() * h.demand.size()));
    state.SetLabel(batched ? "4-lane batch" : "4x scalar");
}
BENCHMARK(BM_DispatchBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Candidates(benchmark::State& state) {
    const auto& h = fleet().households.front();
    const ScenarioParams params;
    const TechnicalParams tech;
    AssetLedger ledger;
    ledger.add_pv(1, 1.5);
    const Appraisal appraisal(h, ledger, 3, params, tech);
    const auto candidates = enumerate_candidates(coarse_grid());
    const auto mode = state.range(0) == 0 ? Execution::serial : Execution::parallel;
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_candidates(appraisal, candidates, mode));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(candidates.size()));
    state.SetLabel(mode == Execution::serial ? "serial" : "parallel, " + std::to_string(omp_get_max_threads()) + " threads");
}
BENCHMARK(BM_Candidates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_Households(benchmark::State& state) {
    ScenarioParams params;
    params.sim_years = 3;
    params.fit_fraction = 0.25;
    const TechnicalParams tech;
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(simulate_households(fleet(), params, tech, coarse_grid(), workers));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(fleet().households.size()));
}
BENCHMARK(BM_Households)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime()->Iterations(1);

}  // namespace

BENCHMARK_MAIN();
