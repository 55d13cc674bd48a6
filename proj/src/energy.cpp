#include "pipenet/energy.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pipenet {

void EnergyConfig::validate() const
{
    if (!(efficiency > 0.0 && efficiency <= 1.0)) {
        throw std::invalid_argument("pump efficiency must be in (0, 1]");
    }
    if (!(density > 0.0) || !(gravity > 0.0) || !(tariff >= 0.0) || !(emission_factor >= 0.0)) {
        throw std::invalid_argument("energy settings must be positive");
    }
}

EnergySummary pumping_energy(std::span<const double> flows, std::span<const double> lifts, double step_s,
                             const EnergyConfig& cfg)
{
    cfg.validate();
    if (flows.size() != lifts.size()) {
        throw std::invalid_argument("pumping_energy: flow and lift series differ in length");
    }
    if (!(step_s > 0.0)) {
        throw std::invalid_argument("pumping_energy: step must be positive");
    }
    double joules = 0.0;
    double cubic_metres = 0.0;
    for (std::size_t t = 0; t < flows.size(); ++t) {
        if (lifts[t] < 0.0) {
            throw std::invalid_argument("pumping_energy: negative lift at step " + std::to_string(t) +
                                        " (suction above delivery)");
        }
        const double q = std::max(flows[t], 0.0);
        joules += cfg.density * cfg.gravity * q * lifts[t] / cfg.efficiency * step_s;
        cubic_metres += q * step_s;
    }
    EnergySummary s;
    const double kwh = joules / 3.6e6;
    s.energy_mwh = kwh / 1000.0;
    s.cost = kwh * cfg.tariff;
    s.ghg_tonnes = kwh * cfg.emission_factor / 1000.0;
    s.volume_ml = cubic_metres / 1000.0;
    if (s.volume_ml > 0.0) {
        s.unit_kwh_per_ml = kwh / s.volume_ml;
    }
    return s;
}

EnergySummary pumping_energy(const SetpointRun& run, const EnergyConfig& cfg)
{
    std::vector<double> flows;
    std::vector<double> lifts;
    for (const SetpointStep& step : run.steps) {
        for (std::size_t k = 0; k < run.stations.size(); ++k) {
            const double z = run.station_elevation[k];
            flows.push_back(step.station_flow[k]);
            lifts.push_back(z + step.setpoint - cfg.suction_head.value_or(z));
        }
    }
    return pumping_energy(flows, lifts, run.step, cfg);
}

LevelOfService level_of_service(std::span<const double> min_downstream, double step_s, double service_head)
{
    LevelOfService los;
    std::vector<double> deficit;
    for (double p : min_downstream) {
        deficit.push_back(std::isnan(p) ? 0.0 : std::max(0.0, service_head - p));
    }
    std::size_t run = 0;
    std::size_t longest = 0;
    for (double d : deficit) {
        if (d > 0.0) {
            ++los.violation_steps;
            los.max_deficit = std::max(los.max_deficit, d);
            longest = std::max(longest, ++run);
        } else {
            run = 0;
        }
    }
    los.longest_violation = static_cast<double>(longest) * step_s;
    if (los.max_deficit > 0.0) {
        std::size_t at_max = 0;
        std::size_t best = 0;
        for (double d : deficit) {
            at_max = d >= los.max_deficit - 0.01 ? at_max + 1 : 0;
            best = std::max(best, at_max);
        }
        los.max_deficit_duration = static_cast<double>(best) * step_s;
    }
    return los;
}

LevelOfService level_of_service(const SetpointRun& run, double service_head)
{
    return level_of_service(run.min_downstream(), run.step, service_head);
}

RunSummary summarize(const SetpointRun& run, const EnergyConfig& energy, double service_head)
{
    return {run.average_setpoint(), pumping_energy(run, energy), level_of_service(run, service_head),
            run.infeasible_steps()};
}

RunComparison compare_runs(const SetpointRun& a, const SetpointRun& b, const EnergyConfig& energy,
                           double service_head)
{
    if (a.steps.size() != b.steps.size() || a.step != b.step ||
        (!a.steps.empty() && a.steps.front().time != b.steps.front().time)) {
        throw std::invalid_argument("compare_runs: runs cover different horizons");
    }
    RunComparison c{summarize(a, energy, service_head), summarize(b, energy, service_head), {}};
    const auto row = [&](std::string name, std::string unit, double x, double y) {
        c.rows.push_back({std::move(name), std::move(unit), x, y, x - y, x != 0.0 ? (x - y) / x * 100.0 : 0.0});
    };
    row("average_setpoint", "m", c.a.average_setpoint, c.b.average_setpoint);
    row("energy", "MWh", c.a.energy.energy_mwh, c.b.energy.energy_mwh);
    row("cost", "currency", c.a.energy.cost, c.b.energy.cost);
    row("ghg", "t CO2-e", c.a.energy.ghg_tonnes, c.b.energy.ghg_tonnes);
    row("volume", "ML", c.a.energy.volume_ml, c.b.energy.volume_ml);
    row("unit_energy", "kWh/ML", c.a.energy.unit_kwh_per_ml.value_or(0.0),
        c.b.energy.unit_kwh_per_ml.value_or(0.0));
    return c;
}

}  // namespace pipenet
