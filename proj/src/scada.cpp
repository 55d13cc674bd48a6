#include "pipenet/scada.h"

#include "pipenet/io.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pipenet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double median(std::vector<double> v)
{
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

std::vector<double> resample_column(const std::vector<double>& times, const std::vector<double>& v,
                                    const std::vector<double>& grid, double step,
                                    ResampleMethod method)
{
    std::vector<double> out(grid.size(), kNaN);
    const std::size_t n = times.size();
    switch (method) {
    case ResampleMethod::InterpolateLinear:
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double t = grid[k];
            const auto hi = std::lower_bound(times.begin(), times.end(), t);
            const auto i = static_cast<std::size_t>(hi - times.begin());
            if (i < n && times[i] == t) {
                out[k] = v[i];
            } else if (i > 0 && i < n && !std::isnan(v[i - 1]) && !std::isnan(v[i])) {
                const double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
                out[k] = v[i - 1] + w * (v[i] - v[i - 1]);
            }
        }
        break;
    case ResampleMethod::DownsampleMean: {
        std::size_t i = 0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            while (i < n && times[i] < grid[k]) {
                ++i;
            }
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t j = i; j < n && times[j] < grid[k] + step; ++j) {
                if (!std::isnan(v[j])) {
                    sum += v[j];
                    ++count;
                }
            }
            if (count > 0) {
                out[k] = sum / static_cast<double>(count);
            }
        }
        break;
    }
    case ResampleMethod::HoldLast: {
        std::size_t i = 0;
        double last = kNaN;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            while (i < n && times[i] <= grid[k]) {
                if (!std::isnan(v[i])) {
                    last = v[i];
                }
                ++i;
            }
            out[k] = last;
        }
        break;
    }
    }
    return out;
}

}  // namespace

std::optional<ResampleMethod> parse_resample_method(std::string_view name)
{
    if (name == "interpolate" || name == "interpolate_linear") {
        return ResampleMethod::InterpolateLinear;
    }
    if (name == "mean" || name == "downsample_mean") {
        return ResampleMethod::DownsampleMean;
    }
    if (name == "hold" || name == "hold_last") {
        return ResampleMethod::HoldLast;
    }
    return std::nullopt;
}

std::string_view resample_method_name(ResampleMethod method)
{
    switch (method) {
    case ResampleMethod::InterpolateLinear:
        return "interpolate_linear";
    case ResampleMethod::DownsampleMean:
        return "downsample_mean";
    case ResampleMethod::HoldLast:
        return "hold_last";
    }
    return "";
}

TimeTable resample(const TimeTable& raw, double step, ResampleMethod method)
{
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw std::invalid_argument("resample: step must be positive");
    }
    if (raw.empty()) {
        throw std::invalid_argument("resample: no samples");
    }
    const double first = std::ceil(raw.start() / step) * step;
    const double last = std::floor(raw.end() / step) * step;
    if (first > last) {
        throw std::invalid_argument("resample: no grid point falls inside the record");
    }
    const auto count = static_cast<std::size_t>(std::llround((last - first) / step)) + 1;
    TimeTable out = TimeTable::uniform(first, step, count);
    for (const Series& s : raw.columns()) {
        if (std::all_of(s.values.begin(), s.values.end(), [](double x) { return std::isnan(x); })) {
            throw std::invalid_argument("resample: column '" + s.key + "' has no valid samples");
        }
        out.add_column({s.key, s.unit, resample_column(raw.times(), s.values, out.times(), step, method)});
    }
    return out;
}

TimeTable fill_gaps(const TimeTable& table, std::size_t max_gap)
{
    std::vector<Series> columns = table.columns();
    const auto& t = table.times();
    for (Series& s : columns) {
        auto& v = s.values;
        std::size_t i = 0;
        while (i < v.size()) {
            if (!std::isnan(v[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < v.size() && std::isnan(v[j])) {
                ++j;
            }
            if (i > 0 && j < v.size() && j - i <= max_gap) {
                const double t0 = t[i - 1];
                const double t1 = t[j];
                for (std::size_t k = i; k < j; ++k) {
                    v[k] = v[i - 1] + (t[k] - t0) / (t1 - t0) * (v[j] - v[i - 1]);
                }
            }
            i = j;
        }
    }
    return TimeTable(table.times(), std::move(columns));
}

std::vector<StaticWindow> detect_static_windows(const TimeTable& flow, std::string_view column,
                                                double threshold_lps, double min_duration_s)
{
    if (!flow.step()) {
        throw std::invalid_argument("detect_static_windows: flow series is not on a uniform grid");
    }
    const Series& s = flow.column(column);
    double scale = 1.0;
    if (s.unit == Unit::CubicMetresPerSecond) {
        scale = 1000.0;
    } else if (s.unit != Unit::LitresPerSecond) {
        throw std::invalid_argument("detect_static_windows: column '" + s.key + "' is not a flow");
    }
    const double step = *flow.step();
    std::vector<StaticWindow> out;
    std::size_t i = 0;
    const std::size_t n = s.values.size();
    while (i < n) {
        const auto quiet = [&](std::size_t k) {
            return !std::isnan(s.values[k]) && std::abs(s.values[k] * scale) <= threshold_lps;
        };
        if (!quiet(i)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && quiet(j)) {
            ++j;
        }
        // Small tolerance so that 15 one-minute samples count as 15 minutes.
        if (static_cast<double>(j - i) * step >= min_duration_s - 1e-9) {
            out.push_back({flow.times()[i], flow.times()[j - 1]});
        }
        i = j;
    }
    return out;
}

std::vector<SensorMeta> parse_sensors(std::string_view text)
{
    std::vector<SensorMeta> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        const auto f = split_whitespace(trim(line));
        if (f.empty()) {
            continue;
        }
        const std::string where = "sensor file line " + std::to_string(line_no) + ": ";
        if (f.size() != 4) {
            throw std::invalid_argument(where + "expected 'id node elevation kind'");
        }
        SensorMeta m{std::string(f[0]), std::string(f[1]), 0.0, SensorKind::Pressure};
        if (!parse_double(f[2], m.elevation)) {
            throw std::invalid_argument(where + "bad elevation '" + std::string(f[2]) + "'");
        }
        if (f[3] == "flow") {
            m.kind = SensorKind::Flow;
        } else if (f[3] != "pressure") {
            throw std::invalid_argument(where + "kind must be pressure or flow");
        }
        for (const SensorMeta& other : out) {
            if (other.id == m.id) {
                throw std::invalid_argument(where + "duplicate sensor '" + m.id + "'");
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<SensorMeta> load_sensors(const std::string& path)
{
    try {
        return parse_sensors(read_text_file(path));
    } catch (const std::invalid_argument& e) {
        throw IoError(path, e.what());
    }
}

std::vector<std::string> check_sensors(const Network& net, const std::vector<SensorMeta>& sensors)
{
    std::vector<std::string> warnings;
    for (const SensorMeta& s : sensors) {
        const auto n = net.find_node(s.node_id);
        if (!n) {
            throw std::invalid_argument("sensor '" + s.id + "' refers to unknown node '" + s.node_id + "'");
        }
        const double z = net.nodes()[*n].elevation;
        if (std::abs(z - s.elevation) > 0.01) {
            warnings.push_back("sensor '" + s.id + "' elevation " + format_number(s.elevation) +
                               " m differs from node '" + s.node_id + "' at " + format_number(z) + " m");
        }
    }
    return warnings;
}

std::string_view confidence_name(OffsetConfidence c)
{
    switch (c) {
    case OffsetConfidence::Ok:
        return "ok";
    case OffsetConfidence::LowData:
        return "low_data";
    case OffsetConfidence::Inconsistent:
        return "inconsistent";
    }
    return "";
}

const SensorOffset* OffsetReport::find(std::string_view sensor) const
{
    for (const SensorOffset& s : sensors) {
        if (s.sensor == sensor) {
            return &s;
        }
    }
    return nullptr;
}

OffsetReport estimate_offsets(const TimeTable& pressures, const std::vector<SensorMeta>& sensors,
                              const std::string& reference, const std::vector<StaticWindow>& windows,
                              const OffsetRules& rules)
{
    const auto ref = std::find_if(sensors.begin(), sensors.end(),
                                  [&](const SensorMeta& s) { return s.id == reference; });
    if (ref == sensors.end()) {
        throw std::invalid_argument("estimate_offsets: reference sensor '" + reference + "' is not listed");
    }
    if (!pressures.has(reference)) {
        throw std::invalid_argument("estimate_offsets: no pressure column for reference '" + reference + "'");
    }
    const auto& ref_p = pressures.values(reference);
    const auto& t = pressures.times();

    OffsetReport report{reference, {}};
    for (const SensorMeta& s : sensors) {
        if (s.kind != SensorKind::Pressure) {
            continue;
        }
        if (!pressures.has(s.id)) {
            throw std::invalid_argument("estimate_offsets: no pressure column for sensor '" + s.id + "'");
        }
        const auto& p = pressures.values(s.id);
        std::vector<double> window_means;
        std::vector<double> samples;
        for (const StaticWindow& w : windows) {
            const auto lo = std::lower_bound(t.begin(), t.end(), w.start) - t.begin();
            const auto hi = std::upper_bound(t.begin(), t.end(), w.end) - t.begin();
            double sum = 0.0;
            std::size_t count = 0;
            for (auto k = static_cast<std::size_t>(lo); k < static_cast<std::size_t>(hi); ++k) {
                if (std::isnan(p[k]) || std::isnan(ref_p[k])) {
                    continue;
                }
                const double diff = (p[k] + s.elevation) - (ref_p[k] + ref->elevation);
                samples.push_back(diff);
                sum += diff;
                ++count;
            }
            if (count > 0) {
                window_means.push_back(sum / static_cast<double>(count));
            }
        }

        SensorOffset o;
        o.sensor = s.id;
        o.windows = window_means.size();
        if (!window_means.empty()) {
            o.offset = median(window_means);
            double mean = 0.0;
            for (double d : samples) {
                mean += d;
            }
            mean /= static_cast<double>(samples.size());
            double ss = 0.0;
            for (double d : samples) {
                ss += (d - mean) * (d - mean);
            }
            o.window_stddev = samples.size() > 1 ? std::sqrt(ss / static_cast<double>(samples.size() - 1)) : 0.0;
        }
        if (o.windows < rules.min_windows) {
            o.confidence = OffsetConfidence::LowData;
        } else if (o.window_stddev > rules.max_stddev) {
            o.confidence = OffsetConfidence::Inconsistent;
        } else {
            o.confidence = OffsetConfidence::Ok;
        }
        report.sensors.push_back(std::move(o));
    }
    return report;
}

TimeTable apply_corrections(const TimeTable& pressures, const OffsetReport& report,
                            std::vector<std::string>* warnings)
{
    std::vector<Series> columns = pressures.columns();
    for (Series& s : columns) {
        const SensorOffset* o = report.find(s.key);
        if (!o || s.key == report.reference) {
            continue;
        }
        if (o->confidence != OffsetConfidence::Ok) {
            if (warnings) {
                warnings->push_back("sensor '" + s.key + "' left uncorrected (" +
                                    std::string(confidence_name(o->confidence)) + ")");
            }
            continue;
        }
        for (double& v : s.values) {
            v -= o->offset;
        }
    }
    return TimeTable(pressures.times(), std::move(columns));
}

std::string format_offset_report(const OffsetReport& report)
{
    std::ostringstream out;
    out << "[offsets]\nreference = " << report.reference << '\n';
    for (const SensorOffset& s : report.sensors) {
        out << "\n[offsets." << s.sensor << "]\n"
            << "offset_m = " << format_number(s.offset) << '\n'
            << "static_windows = " << s.windows << '\n'
            << "window_stddev_m = " << format_number(s.window_stddev) << '\n'
            << "confidence = " << confidence_name(s.confidence) << '\n';
    }
    return out.str();
}

}  // namespace pipenet
