#pragma once

// Grouped roughness calibration: pipes of one material share a roughness
// height, and the group values are fitted to observed pressure heads by
// minimising
//
//   F = sum_j (1/T_j) sum_t (p_obs[j](t) - p_sim[j](t))^2
//
// over sites j, skipping missing observations (T_j counts the rest).

#include "pipenet/hydraulics.h"
#include "pipenet/kernels.h"
#include "pipenet/network.h"
#include "pipenet/timetable.h"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pipenet {

struct RoughnessGroup {
    std::string material;
    double roughness_mm = 0.0;
    double min_mm = 0.001;
    double max_mm = 50.0;
};

class RoughnessGroups {
public:
    RoughnessGroups() = default;
    explicit RoughnessGroups(std::vector<RoughnessGroup> groups);

    // One group per network material, seeded with the roughness of the
    // first pipe of that material.
    static RoughnessGroups from_network(const Network& net, double min_mm = 0.001, double max_mm = 50.0);

    const std::vector<RoughnessGroup>& groups() const { return groups_; }
    std::size_t size() const { return groups_.size(); }
    std::optional<std::size_t> find(std::string_view material) const;
    double roughness(std::string_view material) const;  // throws std::out_of_range
    void set_roughness(std::size_t group, double roughness_mm);

    // Per-pipe roughness. Throws std::invalid_argument if a network
    // material has no group.
    std::vector<double> per_pipe(const Network& net) const;

private:
    std::vector<RoughnessGroup> groups_;
};

// One group per line: material roughness_mm [min_mm max_mm]
RoughnessGroups parse_groups(std::string_view text);
RoughnessGroups load_groups(const std::string& path);
std::string write_groups(const RoughnessGroups& groups);

// Aligned inputs for one calibration or validation period.
struct CalibrationData {
    Schedule demands;                // steps x junctions, m^3/s
    Schedule boundary;               // steps x fixed nodes, m
    std::vector<std::string> sites;  // node ids
    Schedule observed;               // steps x sites, pressure head m, NaN = missing
    std::vector<double> observed_system_flow;  // L/s per step, empty if not measured
};

// Builds CalibrationData from tables on the same time grid. Observed
// columns are keyed by node id. If `station_column` names a pressure
// column, the station boundary follows it (HGL = z + p); otherwise the
// source settings hold. `flow_column` optionally names a system flow
// series (L/s) in `flows`.
CalibrationData make_calibration_data(const Network& net, const TimeTable& demands,
                                      const TimeTable& observed, const std::vector<std::string>& sites,
                                      const std::optional<std::string>& station_column = std::nullopt,
                                      const TimeTable* flows = nullptr,
                                      const std::optional<std::string>& flow_column = std::nullopt);

struct SimulatedSites {
    Schedule pressure;                // steps x sites, m
    std::vector<double> system_flow;  // L/s per step, total leaving fixed nodes
};

SimulatedSites simulate_sites(const Network& net, const CalibrationData& data,
                              std::span<const double> roughness_per_pipe, const SolverConfig& cfg = {},
                              kernels::Execution exec = kernels::Execution::Serial);

// F above for two steps x sites matrices. Throws on a shape mismatch.
double objective_value(const Schedule& observed, const Schedule& simulated);

double objective(const Network& net, const CalibrationData& data, const RoughnessGroups& groups,
                 const SolverConfig& cfg = {}, kernels::Execution exec = kernels::Execution::Serial);

struct FitMetrics {
    std::string site;
    std::size_t samples = 0;
    double avg_observed = 0.0;
    double avg_simulated = 0.0;
    double pct_diff = 0.0;  // (avg_observed - avg_simulated) / avg_observed * 100
    double rmse = 0.0;
    double mae = 0.0;
};

// Over steps where both values are present. Throws std::invalid_argument
// on a length mismatch.
FitMetrics fit_metrics(std::string site, std::span<const double> observed,
                       std::span<const double> simulated);
std::vector<FitMetrics> fit_metrics(const std::vector<std::string>& sites, const Schedule& observed,
                                    const Schedule& simulated);

struct CalibrationOptions {
    int max_iterations = 50;
    double relative_tolerance = 1e-9;  // stop when F improves by less than this fraction
    double absolute_tolerance = 1e-14;  // F below this is an exact fit
    double gradient_tolerance = 1e-10;
    int patience = 12;          // rejected steps in a row before giving up
    int multistart = 0;         // extra random starts inside the bounds
    std::uint64_t seed = 1;
    double fd_step = 1e-3;      // relative finite-difference step on roughness
    SolverConfig solver;
    kernels::Execution execution = kernels::Execution::Serial;
};

// dF/d(roughness) per group by central differences with the configured
// relative step.
std::vector<double> objective_gradient(const Network& net, const CalibrationData& data,
                                       const RoughnessGroups& groups, const CalibrationOptions& opts = {});

struct CalibrationResult {
    RoughnessGroups groups;
    double objective = 0.0;
    double initial_objective = 0.0;
    double sum_rmse = 0.0;  // m
    std::vector<FitMetrics> sites;
    std::optional<FitMetrics> system_flow;  // L/s, when measured
    int iterations = 0;
    int evaluations = 0;
    int failed_evaluations = 0;  // solver failures treated as +inf
    bool converged = false;
    std::string message;
    std::vector<std::string> warnings;
};

// Bounded Levenberg-Marquardt on log roughness with finite-difference
// Jacobians, optionally from several starts; the best point is kept.
CalibrationResult calibrate(const Network& net, const CalibrationData& data, const RoughnessGroups& init,
                            const CalibrationOptions& opts = {});

struct ValidationResult {
    double objective = 0.0;
    double sum_rmse = 0.0;
    std::vector<FitMetrics> sites;
    std::optional<FitMetrics> system_flow;
    SimulatedSites simulated;
};

ValidationResult validate(const Network& net, const CalibrationData& data, const RoughnessGroups& groups,
                          const SolverConfig& cfg = {},
                          kernels::Execution exec = kernels::Execution::Serial);

}  // namespace pipenet
