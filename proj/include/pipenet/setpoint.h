#pragma once

// Irrigation outlet head loss and pump pressure setpoint selection.
//
// The pump station is a fixed-head boundary at HGL = station elevation +
// setpoint r. Each step, outlet downstream pressure is the network
// pressure head at the outlet minus the outlet loss
//
//   p_l(q) = a2 q^2 + a1 q + a0        (q in L/s)
//
// and the next setpoint moves by the gap between the service head and the
// lowest downstream pressure over outlets currently drawing water.

#include "pipenet/hydraulics.h"
#include "pipenet/network.h"
#include "pipenet/timetable.h"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pipenet {

struct OutletLossModel {
    double a0 = 5.95;     // m
    double a1 = 0.0456;   // m per L/s
    double a2 = 0.00221;  // m per (L/s)^2
    double q_max_lps = 100.0;
    std::string diameter_class = "DN150";

    // DN150 coefficients scaled by (150/DN)^4 for another DN class.
    static OutletLossModel for_class(std::string_view diameter_class);
};

// Throws std::invalid_argument for negative flow. Flows above q_max are
// evaluated and reported through `extrapolated`.
double outlet_headloss(const OutletLossModel& model, double q_lps, bool* extrapolated = nullptr);

struct DownstreamPressure {
    double head = 0.0;  // m
    bool negative = false;
};

DownstreamPressure downstream_pressure(double upstream_head, double q_lps, const OutletLossModel& model);

struct Outlet {
    std::string id;
    std::size_t node = 0;
    std::size_t junction = 0;  // junction column
    OutletLossModel model;
};

// Every outlet node in lexicographic id order, with [OUTLETS] coefficients
// where given and class-scaled defaults otherwise.
std::vector<Outlet> network_outlets(const Network& net);

struct CriticalOutlet {
    std::string id;
    double downstream_head = 0.0;  // m
};

// Lowest downstream pressure over outlets with demand > 0; ties go to the
// smaller id. nullopt when no outlet is active. `demands` per junction in
// m^3/s.
std::optional<CriticalOutlet> critical_pressure(const Network& net, const std::vector<Outlet>& outlets,
                                                const HydraulicState& state,
                                                std::span<const double> demands);

// Piecewise-linear map from total system flow (L/s) to setpoint (m),
// clamped outside its range.
class SetpointCurve {
public:
    explicit SetpointCurve(std::vector<std::pair<double, double>> points);

    // 0 L/s -> 81.9 m, 3500 L/s -> 102.3 m.
    static SetpointCurve linear_default();

    double at(double flow_lps) const;
    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

// One "flow_lps setpoint_m" pair per line.
SetpointCurve parse_curve(std::string_view text);

std::vector<double> baseline_setpoints(const SetpointCurve& curve, std::span<const double> system_flow_lps);

// Sum of all demand columns used by the network, L/s per step.
std::vector<double> system_flow(const Network& net, const TimeTable& demands);

struct SetpointConfig {
    double service_head = 35.0;  // m
    double min_setpoint = 81.9;  // m
    double max_setpoint = 102.3; // m
    double relaxation = 1.0;     // fraction of the correction applied, (0, 1]
    SolverConfig solver;

    void validate() const;
};

struct SetpointStep {
    double time = 0.0;
    double setpoint = 0.0;  // m
    std::optional<std::string> critical_outlet;
    double min_downstream = 0.0;  // m, NaN when no outlet is active
    double system_flow = 0.0;     // L/s delivered by the station(s)
    std::vector<double> station_flow;  // m^3/s per station column
    bool infeasible = false;      // setpoint at its upper bound and still short
};

struct SetpointRun {
    double step = 900.0;  // s
    std::vector<std::string> stations;
    std::vector<double> station_elevation;  // m
    std::vector<SetpointStep> steps;

    std::size_t infeasible_steps() const;
    double average_setpoint() const;
    std::vector<double> setpoints() const;
    std::vector<double> min_downstream() const;
};

// Closed loop: r(t+1) = clamp(r(t) + relaxation * (service - min p_d(t))),
// held when no outlet is active. The demand table must be on a uniform grid.
SetpointRun select_setpoints(const Network& net, const TimeTable& demands, double r0,
                             const SetpointConfig& cfg = {});

// Open loop: runs a given setpoint trace (e.g. from the baseline curve).
SetpointRun evaluate_setpoints(const Network& net, const TimeTable& demands,
                               std::span<const double> setpoints, const SetpointConfig& cfg = {});

}  // namespace pipenet
