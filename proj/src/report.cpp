#include "pipenet/report.h"

#include "pipenet/io.h"
#include "pipenet/timetable.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pipenet {

ReportSection& ReportSection::text(std::string key, std::string value)
{
    entries.emplace_back(std::move(key), std::move(value));
    return *this;
}

ReportSection& ReportSection::number(std::string key, double value)
{
    return text(std::move(key), format_number(value));
}

ReportSection& ReportSection::count(std::string key, std::size_t value)
{
    return text(std::move(key), std::to_string(value));
}

ReportSection& ReportSection::flag(std::string key, bool value)
{
    return text(std::move(key), value ? "true" : "false");
}

const std::string* ReportSection::find(std::string_view key) const
{
    for (const auto& [k, v] : entries) {
        if (k == key) {
            return &v;
        }
    }
    return nullptr;
}

ReportSection& Report::add(std::string name)
{
    sections.push_back({std::move(name), {}});
    return sections.back();
}

const ReportSection* Report::find(std::string_view name) const
{
    for (const ReportSection& s : sections) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

std::string write_report(const Report& report)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < report.sections.size(); ++i) {
        const ReportSection& s = report.sections[i];
        out << (i ? "\n" : "") << '[' << s.name << "]\n";
        for (const auto& [k, v] : s.entries) {
            out << k << " = " << v << '\n';
        }
    }
    return out.str();
}

Report parse_report(std::string_view text)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument("report line " + std::to_string(e.line()) + ": " + e.message());
    }
    Report r;
    for (const auto& [name, body] : tree) {
        ReportSection& s = r.add(name);
        for (const auto& [k, v] : body) {
            s.text(k, v.data());
        }
    }
    return r;
}

namespace {

std::string group_of(const std::string& name)
{
    const auto dot = name.rfind('.');
    return dot == std::string::npos ? std::string() : name.substr(0, dot);
}

std::string pad(const std::string& s, std::size_t width, bool right)
{
    if (s.size() >= width) {
        return s;
    }
    const std::string fill(width - s.size(), ' ');
    return right ? fill + s : s + fill;
}

bool numeric(const std::string& s)
{
    double v = 0.0;
    return s == "nan" || s == "-" || parse_double(s, v);
}

void render_group(std::ostringstream& out, const std::string& group,
                  const std::vector<const ReportSection*>& rows)
{
    std::vector<std::string> columns;
    for (const ReportSection* s : rows) {
        for (const auto& e : s->entries) {
            if (std::find(columns.begin(), columns.end(), e.first) == columns.end()) {
                columns.push_back(e.first);
            }
        }
    }
    std::vector<std::vector<std::string>> cells;
    cells.push_back({group});
    for (const auto& c : columns) {
        cells.back().push_back(c);
    }
    for (const ReportSection* s : rows) {
        std::vector<std::string> line{s->name.substr(group.size() + 1)};
        for (const auto& c : columns) {
            const std::string* v = s->find(c);
            line.push_back(v ? *v : "-");
        }
        cells.push_back(std::move(line));
    }
    std::vector<std::size_t> width(columns.size() + 1, 0);
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            width[i] = std::max(width[i], line[i].size());
        }
    }
    for (std::size_t r = 0; r < cells.size(); ++r) {
        std::string line;
        for (std::size_t i = 0; i < cells[r].size(); ++i) {
            const bool right = i > 0 && r > 0 && numeric(cells[r][i]);
            line += (i ? "  " : "") + pad(cells[r][i], width[i], right || (i > 0 && r == 0));
        }
        while (!line.empty() && line.back() == ' ') {
            line.pop_back();
        }
        out << line << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t w : width) {
                total += w;
            }
            out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
        }
    }
}

}  // namespace

std::string render_table(const Report& report)
{
    std::ostringstream out;
    bool first = true;
    for (std::size_t i = 0; i < report.sections.size();) {
        out << (first ? "" : "\n");
        first = false;
        const ReportSection& s = report.sections[i];
        const std::string group = group_of(s.name);
        if (group.empty()) {
            out << s.name << '\n';
            std::size_t w = 0;
            for (const auto& e : s.entries) {
                w = std::max(w, e.first.size());
            }
            for (const auto& [k, v] : s.entries) {
                out << "  " << pad(k, w, false) << "  " << v << '\n';
            }
            ++i;
            continue;
        }
        std::vector<const ReportSection*> rows;
        while (i < report.sections.size() && group_of(report.sections[i].name) == group) {
            rows.push_back(&report.sections[i]);
            ++i;
        }
        render_group(out, group, rows);
    }
    return out.str();
}

namespace {

void add_metrics(Report& r, const std::string& name, const FitMetrics& m, const char* unit)
{
    const std::string u = unit;
    r.add(name)
        .count("samples", m.samples)
        .number("avg_observed_" + u, m.avg_observed)
        .number("avg_simulated_" + u, m.avg_simulated)
        .number("pct_diff", m.pct_diff)
        .number("rmse_" + u, m.rmse)
        .number("mae_" + u, m.mae);
}

void add_fit(Report& r, const std::vector<FitMetrics>& sites, const std::optional<FitMetrics>& flow)
{
    for (const FitMetrics& m : sites) {
        add_metrics(r, "sites." + m.site, m, "m");
    }
    if (flow) {
        add_metrics(r, "flow." + flow->site, *flow, "lps");
    }
}

}  // namespace

Report calibration_report(const CalibrationResult& result)
{
    Report r;
    r.add("calibration")
        .number("objective", result.objective)
        .number("initial_objective", result.initial_objective)
        .number("sum_rmse_m", result.sum_rmse)
        .count("iterations", static_cast<std::size_t>(result.iterations))
        .count("evaluations", static_cast<std::size_t>(result.evaluations))
        .count("failed_evaluations", static_cast<std::size_t>(result.failed_evaluations))
        .flag("converged", result.converged)
        .text("message", result.message);
    for (const RoughnessGroup& g : result.groups.groups()) {
        r.add("roughness." + g.material)
            .number("roughness_mm", g.roughness_mm)
            .number("min_mm", g.min_mm)
            .number("max_mm", g.max_mm);
    }
    add_fit(r, result.sites, result.system_flow);
    if (!result.warnings.empty()) {
        ReportSection& w = r.add("warnings");
        for (std::size_t i = 0; i < result.warnings.size(); ++i) {
            w.text("w" + std::to_string(i + 1), result.warnings[i]);
        }
    }
    return r;
}

Report validation_report(const ValidationResult& result)
{
    Report r;
    r.add("validation").number("objective", result.objective).number("sum_rmse_m", result.sum_rmse);
    add_fit(r, result.sites, result.system_flow);
    return r;
}

namespace {

void add_los(Report& r, const std::string& name, const RunSummary& s)
{
    r.add(name)
        .count("violation_steps", s.los.violation_steps)
        .number("max_deficit_m", s.los.max_deficit)
        .number("max_deficit_duration_h", s.los.max_deficit_duration / 3600.0)
        .number("longest_violation_h", s.los.longest_violation / 3600.0)
        .count("infeasible_steps", s.infeasible_steps);
}

}  // namespace

Report comparison_report(const RunComparison& c)
{
    Report r;
    for (const Delta& d : c.rows) {
        r.add("comparison." + d.quantity)
            .text("unit", d.unit)
            .number("old", d.a)
            .number("new", d.b)
            .number("change", d.change)
            .number("percent", d.percent);
    }
    add_los(r, "service.old", c.a);
    add_los(r, "service.new", c.b);
    return r;
}

Report run_report(const RunSummary& s, std::string_view mode)
{
    Report r;
    ReportSection& run = r.add("run");
    run.text("mode", std::string(mode))
        .number("average_setpoint_m", s.average_setpoint)
        .number("energy_mwh", s.energy.energy_mwh)
        .number("cost", s.energy.cost)
        .number("ghg_tonnes", s.energy.ghg_tonnes)
        .number("volume_ml", s.energy.volume_ml);
    if (s.energy.unit_kwh_per_ml) {
        run.number("unit_energy_kwh_per_ml", *s.energy.unit_kwh_per_ml);
    } else {
        run.text("unit_energy_kwh_per_ml", "null");
    }
    add_los(r, "service.run", s);
    return r;
}

std::string write_trace(const SetpointRun& run)
{
    std::ostringstream out;
    out << "timestamp,setpoint_m,min_downstream_m,critical_outlet,system_flow_lps,infeasible\n";
    for (const SetpointStep& s : run.steps) {
        out << format_timestamp(s.time) << ',' << format_number(s.setpoint) << ',';
        if (!std::isnan(s.min_downstream)) {
            out << format_number(s.min_downstream);
        }
        out << ',' << s.critical_outlet.value_or("") << ',' << format_number(s.system_flow) << ','
            << (s.infeasible ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace pipenet
