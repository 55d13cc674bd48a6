#pragma once

// Synthetic networks and time series used by the tests, the benchmark and
// the demo-data generator. All generators are deterministic.

#include "pipenet/network.h"
#include "pipenet/scada.h"
#include "pipenet/timetable.h"

#include <cstdint>
#include <string>
#include <vector>

namespace pipenet::fixtures {

// 2019-12-28T00:00:00Z
inline constexpr double kEpoch = 1577491200.0;

// Reservoir R1 (z=100 m, head 100 m) and junction J1 (z=50 m) joined by
// pipe P1 declared J1 -> R1 (L=1000 m, D=300 mm, DICL).
std::string two_node_text();

// Reservoir at `head` feeding junction J1 through one pipe R1 -> J1.
std::string single_pipe_text(double head, double length_m, double diameter_mm,
                             double roughness_mm, const std::string& material = "DICL");

// Two branched trees fed by PS1 and PS2 (both pump-role fixed nodes):
// 433 pipes, 433 junctions, 435 nodes. Outlets carry demand columns.
std::string forest_433_text();

// Looped rows x cols grid fed from reservoir R at one corner.
std::string grid_text(int rows, int cols);

// Triangle of junctions A, B, C plus a spur from reservoir R to A.
std::string triangle_text();

// 100-pipe tree with the four material groups, a pump station PS and
// pressure sites RTU1..RTU5. Pipe roughness in the file is `truth`.
struct MaterialTruth {
    double mscl = 10.6;
    double dicl = 0.44;
    double grp = 2.91;
    double mpvc = 0.01;
};
std::string calibration_text(const MaterialTruth& truth = {});
inline const std::vector<std::string> kCalibrationSites = {"RTU1", "RTU2", "RTU3", "RTU4", "RTU5"};

// Demand table (L/s) for every demand column of `net`: smooth diurnal
// base plus per-node phase, 15-minute steps.
TimeTable diurnal_demands(const Network& net, std::size_t steps, double step_s,
                          std::uint64_t seed, double scale = 1.0);

// Calibration-fixture demands: outlets 20-50 L/s, the long laterals at
// RTU4/RTU5 80-120 L/s, each with an independent diurnal phase.
TimeTable calibration_demands(const Network& net, std::size_t steps, double step_s,
                              std::uint64_t seed);

// Irrigation network for setpoint studies: pump station PS at z=50 m,
// DN150 outlets on laterals. With `balancing_tank` a second fixed-head
// node (reservoir role) floats on the far end of the main.
std::string setpoint_text(bool balancing_tank = false, double outlet_elevation_offset = 0.0);

// Larger irrigation district for two-day setpoint studies: pump station PS
// at z=50 m, `mains` GRP main segments, two DICL laterals per main node and
// `outlets_per_lateral` DN150 outlets per lateral. Outlet elevations start
// at `outlet_base_elevation` and vary by a few metres.
std::string district_text(int mains, int outlets_per_lateral, double outlet_base_elevation);

// Outlet orders: each outlet switches on for whole-hour blocks.
TimeTable order_demands(const Network& net, std::size_t steps, double step_s, std::uint64_t seed,
                        double peak_lps);

TimeTable constant_demands(const Network& net, std::size_t steps, double step_s, double lps);

// Two days of 1-minute pump-station and RTU pressures on the calibration
// network plus system flow. Flow drops to near zero for four windows;
// while static every HGL equals a common level. `offsets` (one per RTU)
// are added to the RTU readings; the station sensor SysPres is exact.
struct StaticScenario {
    TimeTable pressures;  // m, keyed by sensor id
    TimeTable flow;       // L/s, column "Sys_Flow"
    std::vector<SensorMeta> sensors;
    std::vector<StaticWindow> true_windows;
};
StaticScenario static_scenario(const std::vector<double>& offsets, double noise_sd,
                               std::uint64_t seed);

// Pressure heads (m) at `sites` simulated with the network's own pipe
// roughness, plus Gaussian noise. Also adds a "SysPres" column holding the
// exact station pressure head.
TimeTable synthetic_observations(const Network& net, const TimeTable& demands,
                                 const std::vector<std::string>& sites, double noise_sd,
                                 std::uint64_t seed);

// 20 pipes, two materials (DICL trunk, mPVC branches), reservoir R.
std::string small_calibration_text(double dicl_mm = 1.0, double mpvc_mm = 0.05);

}  // namespace pipenet::fixtures
