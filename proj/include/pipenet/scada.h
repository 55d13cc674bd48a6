#pragma once

// Sensor data preparation: resampling irregular logs onto a grid, filling
// short gaps, finding static (near-zero flow) periods and estimating
// constant pressure-sensor offsets from them.

#include "pipenet/network.h"
#include "pipenet/timetable.h"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pipenet {

enum class ResampleMethod { InterpolateLinear, DownsampleMean, HoldLast };

std::optional<ResampleMethod> parse_resample_method(std::string_view name);
std::string_view resample_method_name(ResampleMethod method);

// Grid from ceil(start/step)*step to floor(end/step)*step.
//   InterpolateLinear: between the raw samples either side; NaN if either
//                      of them is missing.
//   DownsampleMean:    mean of the valid samples in [t, t + step).
//   HoldLast:          last valid sample at or before t (deadband logs).
// Throws std::invalid_argument for an empty grid or an all-NaN column.
TimeTable resample(const TimeTable& raw, double step, ResampleMethod method);

// Linear fill of interior NaN runs no longer than max_gap samples.
TimeTable fill_gaps(const TimeTable& table, std::size_t max_gap = 4);

struct StaticWindow {
    double start = 0.0;  // first sample time, s
    double end = 0.0;    // last sample time, s

    bool operator==(const StaticWindow&) const = default;
};

// Maximal runs with |flow| <= threshold lasting at least min_duration,
// where a run of n samples lasts n * step. Missing samples break a run.
std::vector<StaticWindow> detect_static_windows(const TimeTable& flow, std::string_view column,
                                                double threshold_lps = 10.0,
                                                double min_duration_s = 900.0);

enum class SensorKind { Pressure, Flow };

struct SensorMeta {
    std::string id;
    std::string node_id;
    double elevation = 0.0;  // m
    SensorKind kind = SensorKind::Pressure;
};

// One sensor per line: id node_id elevation_m pressure|flow
std::vector<SensorMeta> parse_sensors(std::string_view text);
std::vector<SensorMeta> load_sensors(const std::string& path);

// Throws if a sensor names a node missing from `net`; returns warnings
// for elevations that disagree with the node by more than 0.01 m.
std::vector<std::string> check_sensors(const Network& net, const std::vector<SensorMeta>& sensors);

enum class OffsetConfidence { Ok, LowData, Inconsistent };
std::string_view confidence_name(OffsetConfidence c);

struct SensorOffset {
    std::string sensor;
    double offset = 0.0;         // m, sensor HGL minus reference HGL
    std::size_t windows = 0;     // windows with usable samples
    double window_stddev = 0.0;  // m, spread of the per-sample differences
    OffsetConfidence confidence = OffsetConfidence::LowData;
};

struct OffsetReport {
    std::string reference;
    std::vector<SensorOffset> sensors;  // pressure sensors in metadata order

    const SensorOffset* find(std::string_view sensor) const;
};

struct OffsetRules {
    std::size_t min_windows = 3;
    double max_stddev = 0.2;  // m
};

// Pressure columns are keyed by sensor id and hold pressure head in m.
// For each sensor, offset = median over windows of the window mean of
// (p + z) - (p_ref + z_ref).
OffsetReport estimate_offsets(const TimeTable& pressures, const std::vector<SensorMeta>& sensors,
                              const std::string& reference, const std::vector<StaticWindow>& windows,
                              const OffsetRules& rules = {});

// Subtracts the offset from every sensor whose estimate is Ok. Others pass
// through unchanged with a warning.
TimeTable apply_corrections(const TimeTable& pressures, const OffsetReport& report,
                            std::vector<std::string>* warnings = nullptr);

std::string format_offset_report(const OffsetReport& report);

}  // namespace pipenet
