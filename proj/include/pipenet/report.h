#pragma once

// Reports as sectioned key = value text (machine readable) and as aligned
// plain-text tables (human readable). Sections named "group.row" that sit
// next to each other render as one table with a row per section.

#include "pipenet/calibration.h"
#include "pipenet/energy.h"
#include "pipenet/setpoint.h"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pipenet {

struct ReportSection {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    ReportSection& text(std::string key, std::string value);
    ReportSection& number(std::string key, double value);  // six significant digits
    ReportSection& count(std::string key, std::size_t value);
    ReportSection& flag(std::string key, bool value);

    const std::string* find(std::string_view key) const;
};

struct Report {
    std::vector<ReportSection> sections;

    ReportSection& add(std::string name);
    const ReportSection* find(std::string_view name) const;
};

std::string write_report(const Report& report);

// Reads text produced by write_report (or any ';'-commented INI file).
Report parse_report(std::string_view text);

std::string render_table(const Report& report);

// Blocks: [calibration], [roughness.<material>], [sites.<id>],
// [flow.system_flow] and [warnings].
Report calibration_report(const CalibrationResult& result);
Report validation_report(const ValidationResult& result);

// [comparison.<quantity>] rows with old/new values,
// plus level-of-service and infeasibility per run.
Report comparison_report(const RunComparison& comparison);

// Summary of one setpoint run.
Report run_report(const RunSummary& summary, std::string_view mode);

// Per-step CSV: timestamp, setpoint_m, min_downstream_m, critical_outlet,
// system_flow_lps, infeasible.
std::string write_trace(const SetpointRun& run);

}  // namespace pipenet
