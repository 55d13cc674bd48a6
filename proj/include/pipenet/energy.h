#pragma once

// Pumping energy, cost, emissions and level-of-service figures for a
// setpoint run.
//
// Hydraulic power per station and step is rho g Q H_lift / eta with
// H_lift = (station elevation + setpoint) - suction HGL; energy sums power
// over the step length. Reverse flow into a station counts as zero.

#include "pipenet/setpoint.h"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pipenet {

struct EnergyConfig {
    double efficiency = 0.8;
    double density = 998.0;  // kg/m^3
    double gravity = 9.81;   // m/s^2
    std::optional<double> suction_head;  // HGL, m; station elevation when unset
    double tariff = 0.109;               // currency per kWh
    double emission_factor = 1.09;       // kg CO2-e per kWh

    void validate() const;
};

struct EnergySummary {
    double energy_mwh = 0.0;
    double cost = 0.0;
    double ghg_tonnes = 0.0;
    double volume_ml = 0.0;
    std::optional<double> unit_kwh_per_ml;  // unset when nothing was pumped
};

// flows m^3/s and lifts m per step. Throws std::invalid_argument on a
// negative lift or mismatched lengths.
EnergySummary pumping_energy(std::span<const double> flows, std::span<const double> lifts, double step_s,
                             const EnergyConfig& cfg = {});

EnergySummary pumping_energy(const SetpointRun& run, const EnergyConfig& cfg = {});

struct LevelOfService {
    std::size_t violation_steps = 0;
    double max_deficit = 0.0;            // m
    double max_deficit_duration = 0.0;   // s, longest run at (within 0.01 m of) the max deficit
    double longest_violation = 0.0;      // s, longest run of any deficit
};

// Deficit per step is max(0, service - min_downstream); steps without an
// active outlet (NaN) have none.
LevelOfService level_of_service(std::span<const double> min_downstream, double step_s, double service_head);
LevelOfService level_of_service(const SetpointRun& run, double service_head);

struct RunSummary {
    double average_setpoint = 0.0;
    EnergySummary energy;
    LevelOfService los;
    std::size_t infeasible_steps = 0;
};

RunSummary summarize(const SetpointRun& run, const EnergyConfig& energy, double service_head);

struct Delta {
    std::string quantity;
    std::string unit;
    double a = 0.0;
    double b = 0.0;
    double change = 0.0;   // a - b
    double percent = 0.0;  // (a - b) / a * 100, 0 when a is 0
};

struct RunComparison {
    RunSummary a;
    RunSummary b;
    std::vector<Delta> rows;  // setpoint, energy, cost, GHG, volume, unit energy
};

// a is the reference (typically the baseline). Throws std::invalid_argument
// when the runs cover different horizons.
RunComparison compare_runs(const SetpointRun& a, const SetpointRun& b, const EnergyConfig& energy = {},
                           double service_head = 35.0);

}  // namespace pipenet
