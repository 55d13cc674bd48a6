// Writes a self-contained demo data set: networks, demand and SCADA CSVs,
// sensor metadata, roughness groups, a baseline curve and a config file.

#include "fixtures.h"
#include "pipenet/calibration.h"
#include "pipenet/io.h"
#include "pipenet/setpoint.h"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>

using namespace pipenet;

namespace {

std::string sensors_text(const std::vector<SensorMeta>& sensors)
{
    std::ostringstream out;
    out << "# id node elevation_m kind\n";
    for (const SensorMeta& s : sensors) {
        out << s.id << ' ' << s.node_id << ' ' << format_exact(s.elevation) << ' '
            << (s.kind == SensorKind::Flow ? "flow" : "pressure") << '\n';
    }
    return out.str();
}

TimeTable total_flow(const Network& net, const TimeTable& demands)
{
    TimeTable t(demands.times(), {});
    t.add_column({"Sys_Flow", Unit::LitresPerSecond, system_flow(net, demands)});
    return t;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Write the pipenet demo data set", "make_demo"};
    std::string dir = "demo";
    app.add_option("dir", dir, "Output directory");
    CLI11_PARSE(app, argc, argv);

    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };

    // Calibration: four materials, one calibration day and one validation day.
    const std::string cal_text = fixtures::calibration_text();
    const Network cal = parse_network(cal_text);
    write_text_file(path("calibration.net"), cal_text);
    const auto cal_day = fixtures::calibration_demands(cal, 96, 900, 11);
    const auto val_day = fixtures::calibration_demands(cal, 96, 900, 12);
    write_text_file(path("cal_demands.csv"), write_timetable(cal_day));
    write_text_file(path("val_demands.csv"), write_timetable(val_day));
    write_text_file(path("cal_observed.csv"),
                    write_timetable(fixtures::synthetic_observations(cal, cal_day, fixtures::kCalibrationSites, 0.1, 5)));
    write_text_file(path("val_observed.csv"),
                    write_timetable(fixtures::synthetic_observations(cal, val_day, fixtures::kCalibrationSites, 0.1, 6)));
    write_text_file(path("cal_flow.csv"), write_timetable(total_flow(cal, cal_day)));
    write_text_file(path("groups_init.txt"),
                    write_groups(RoughnessGroups({{"MSCL", 1.0}, {"DICL", 1.0}, {"GRP", 1.0}, {"mPVC", 1.0}})));

    // Raw SCADA logs with constant sensor offsets on the RTUs.
    const auto sc = fixtures::static_scenario({0.2, -12.6, 3.0, 0.9, 3.5}, 0.05, 3);
    write_text_file(path("scada_pressures.csv"), write_timetable(sc.pressures));
    write_text_file(path("scada_flow.csv"), write_timetable(sc.flow));
    write_text_file(path("sensors.txt"), sensors_text(sc.sensors));

    // Two days of outlet orders on a district network.
    const std::string district = fixtures::district_text(12, 5, 83.0);
    const Network dn = parse_network(district);
    write_text_file(path("district.net"), district);
    write_text_file(path("orders.csv"), write_timetable(fixtures::order_demands(dn, 192, 900, 28, 40.0)));
    write_text_file(path("curve.txt"), "# system flow L/s, setpoint m\n0 81.9\n3500 102.3\n");

    write_text_file(path("config.ini"), R"(; pipenet demo configuration
[solver]
max_iterations = 100

[energy]
efficiency = 0.8
tariff = 0.109
emission_factor = 1.09

[setpoint]
service_head = 35

[preprocess]
step = 900
method = interpolate
reference = SysPres
flow_column = Sys_Flow

[calibration]
max_iterations = 50
)");
    std::cout << "demo data written to " << dir << '\n';
    return 0;
}
