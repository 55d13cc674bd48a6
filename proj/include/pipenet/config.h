#pragma once

// Run configuration: an INI file with one section per module, e.g.
//
//   [solver]
//   max_iterations = 60
//   [energy]
//   efficiency = 0.75
//
// Comment lines start with ';'. Command-line overrides use the same
// "section.key=value" keys and are applied on top of the file.

#include "pipenet/calibration.h"
#include "pipenet/energy.h"
#include "pipenet/scada.h"
#include "pipenet/setpoint.h"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pipenet {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PreprocessConfig {
    double step = 900.0;  // s, output grid
    ResampleMethod method = ResampleMethod::InterpolateLinear;
    std::size_t max_gap = 4;            // samples bridged by fill_gaps
    double static_threshold = 10.0;     // L/s
    double static_min_duration = 900.0; // s
    std::string reference = "SysPres";
    std::string flow_column = "Sys_Flow";
    OffsetRules rules;
};

struct CalibrationConfig {
    CalibrationOptions options;
    double min_roughness = 0.001;  // mm, default group bounds
    double max_roughness = 50.0;
};

struct Config {
    SolverConfig solver;
    EnergyConfig energy;
    SetpointConfig setpoint;  // setpoint.solver mirrors `solver`
    PreprocessConfig preprocess;
    CalibrationConfig calibration;

    void validate() const;
};

// Every key is optional. Unknown sections/keys and malformed values throw
// ConfigError. `overrides` are "section.key=value" strings.
Config parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
Config load_config(const std::string& path, const std::vector<std::string>& overrides = {});

// Every recognised key with its current value, in file order.
std::string write_config(const Config& cfg);

}  // namespace pipenet
