// Serial reference vs OpenMP kernels: batch snapshot solves and the
// calibration objective.

#include "fixtures.h"
#include "pipenet/calibration.h"
#include "pipenet/kernels.h"

#include <benchmark/benchmark.h>

using namespace pipenet;

namespace {

struct Batch {
    Network net = parse_network(fixtures::forest_433_text());
    Schedule demands;
    Schedule boundary;

    explicit Batch(std::size_t steps)
    {
        demands = demand_schedule(net, fixtures::diurnal_demands(net, steps, 900, 7));
        boundary = constant_boundary(net, steps);
    }
};

void solve_steps(benchmark::State& state, kernels::Execution exec)
{
    const Batch b(static_cast<std::size_t>(state.range(0)));
    SolverConfig cfg;
    for (auto _ : state) {
        auto states = kernels::solve_steps(b.net, b.demands, b.boundary, {}, cfg, exec);
        benchmark::DoNotOptimize(states.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
    state.counters["threads"] = exec == kernels::Execution::Parallel ? kernels::max_threads() : 1;
}

struct Fit {
    Network net = parse_network(fixtures::calibration_text());
    CalibrationData data;
    RoughnessGroups groups = RoughnessGroups::from_network(net);

    Fit()
    {
        const auto d = fixtures::calibration_demands(net, 96, 900, 11);
        const auto obs = fixtures::synthetic_observations(net, d, fixtures::kCalibrationSites, 0.1, 5);
        data = make_calibration_data(net, d, obs, fixtures::kCalibrationSites, std::string("SysPres"));
    }
};

void objective_eval(benchmark::State& state, kernels::Execution exec)
{
    const Fit f;
    for (auto _ : state) {
        benchmark::DoNotOptimize(objective(f.net, f.data, f.groups, {}, exec));
    }
    state.counters["threads"] = exec == kernels::Execution::Parallel ? kernels::max_threads() : 1;
}

}  // namespace

BENCHMARK_CAPTURE(solve_steps, serial, kernels::Execution::Serial)->Arg(24)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(solve_steps, parallel, kernels::Execution::Parallel)->Arg(24)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(objective_eval, serial, kernels::Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(objective_eval, parallel, kernels::Execution::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
