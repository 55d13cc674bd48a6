#include "pipenet/timetable.h"

#include "pipenet/io.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace pipenet {

std::string_view unit_label(Unit unit)
{
    switch (unit) {
    case Unit::LitresPerSecond:
        return "L/s";
    case Unit::Metres:
        return "m";
    case Unit::CubicMetresPerSecond:
        return "m3/s";
    }
    return "?";
}

std::optional<Unit> parse_unit(std::string_view label)
{
    label = trim(label);
    if (label == "L/s" || label == "l/s" || label == "lps") {
        return Unit::LitresPerSecond;
    }
    if (label == "m") {
        return Unit::Metres;
    }
    if (label == "m3/s" || label == "m\xC2\xB3/s" || label == "cms") {
        return Unit::CubicMetresPerSecond;
    }
    return std::nullopt;
}

namespace {

bool digits(std::string_view s, std::size_t pos, std::size_t count, int& out)
{
    if (pos + count > s.size()) {
        return false;
    }
    out = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (s[i] < '0' || s[i] > '9') {
            return false;
        }
        out = out * 10 + (s[i] - '0');
    }
    return true;
}

}  // namespace

std::optional<double> parse_timestamp(std::string_view text)
{
    text = trim(text);
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    if (!digits(text, 0, 4, year) || text.size() < 19 || text[4] != '-' ||
        !digits(text, 5, 2, month) || text[7] != '-' || !digits(text, 8, 2, day) ||
        (text[10] != 'T' && text[10] != ' ') || !digits(text, 11, 2, hour) || text[13] != ':' ||
        !digits(text, 14, 2, minute) || text[16] != ':' || !digits(text, 17, 2, second)) {
        return std::nullopt;
    }
    double fraction = 0.0;
    std::size_t pos = 19;
    if (pos < text.size() && text[pos] == '.') {
        std::size_t end = pos + 1;
        while (end < text.size() && text[end] >= '0' && text[end] <= '9') {
            ++end;
        }
        if (end == pos + 1 || !parse_double(text.substr(pos, end - pos), fraction)) {
            return std::nullopt;
        }
        pos = end;
    }
    if (pos < text.size() && text[pos] == 'Z') {
        ++pos;
    }
    if (pos != text.size() || hour > 23 || minute > 59 || second > 59) {
        return std::nullopt;
    }
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                             std::chrono::day{static_cast<unsigned>(day)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<double>(days) * 86400.0 + hour * 3600.0 + minute * 60.0 + second + fraction;
}

std::string format_timestamp(double seconds)
{
    using namespace std::chrono;
    const double whole = std::floor(seconds);
    const auto total = static_cast<long long>(whole);
    long long days = total / 86400;
    long long rem = total % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    const int millis = static_cast<int>(std::lround((seconds - whole) * 1000.0));
    char buf[48];
    if (millis == 0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), rem / 3600, (rem / 60) % 60,
                      rem % 60);
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03d", int(ymd.year()),
                      unsigned(ymd.month()), unsigned(ymd.day()), rem / 3600, (rem / 60) % 60,
                      rem % 60, std::min(millis, 999));
    }
    return buf;
}

TimeTableError::TimeTableError(Kind kind, const std::string& message, std::size_t row,
                               std::size_t column)
    : std::runtime_error(row > 0 ? "row " + std::to_string(row) + ": " + message : message),
      kind_(kind),
      row_(row),
      column_(column)
{
}

TimeTable::TimeTable(std::vector<double> times, std::vector<Series> columns)
    : times_(std::move(times)), columns_(std::move(columns))
{
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw std::invalid_argument("TimeTable: times must be strictly increasing");
        }
    }
    for (const Series& s : columns_) {
        if (s.values.size() != times_.size()) {
            throw std::invalid_argument("TimeTable: column '" + s.key + "' has wrong length");
        }
    }
    if (times_.size() >= 2) {
        const double first = times_[1] - times_[0];
        bool regular = true;
        for (std::size_t i = 2; i < times_.size() && regular; ++i) {
            regular = std::abs((times_[i] - times_[i - 1]) - first) <= 1e-6 * std::max(1.0, first);
        }
        if (regular) {
            step_ = first;
        }
    }
}

TimeTable TimeTable::uniform(double start, double step, std::size_t count)
{
    if (!(step > 0.0)) {
        throw std::invalid_argument("TimeTable::uniform: step must be positive");
    }
    std::vector<double> times(count);
    for (std::size_t i = 0; i < count; ++i) {
        times[i] = start + step * static_cast<double>(i);
    }
    TimeTable table(std::move(times), {});
    table.step_ = step;
    return table;
}

bool TimeTable::has(std::string_view key) const
{
    return std::any_of(columns_.begin(), columns_.end(), [&](const Series& s) { return s.key == key; });
}

const Series& TimeTable::column(std::string_view key) const
{
    for (const Series& s : columns_) {
        if (s.key == key) {
            return s;
        }
    }
    throw std::out_of_range("TimeTable: no column '" + std::string(key) + "'");
}

void TimeTable::add_column(Series series)
{
    if (series.values.size() != times_.size()) {
        throw std::invalid_argument("TimeTable::add_column: column '" + series.key +
                                    "' has wrong length");
    }
    if (has(series.key)) {
        throw std::invalid_argument("TimeTable::add_column: duplicate column '" + series.key + "'");
    }
    columns_.push_back(std::move(series));
}

TimeTable TimeTable::slice(std::size_t first, std::size_t count) const
{
    if (first + count > times_.size()) {
        throw std::out_of_range("TimeTable::slice: range exceeds table");
    }
    std::vector<double> times(times_.begin() + first, times_.begin() + first + count);
    std::vector<Series> cols;
    for (const Series& s : columns_) {
        cols.push_back({s.key, s.unit,
                        std::vector<double>(s.values.begin() + first,
                                            s.values.begin() + first + count)});
    }
    TimeTable out(std::move(times), std::move(cols));
    if (step_) {
        out.step_ = step_;
    }
    return out;
}

std::vector<Gap> find_gaps(const TimeTable& table)
{
    std::vector<Gap> gaps;
    for (const Series& s : table.columns()) {
        std::size_t i = 0;
        while (i < s.values.size()) {
            if (!std::isnan(s.values[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < s.values.size() && std::isnan(s.values[j])) {
                ++j;
            }
            gaps.push_back({s.key, i, j - i});
            i = j;
        }
    }
    return gaps;
}

namespace {

// One RFC-4180 record; returns false on an unterminated quote.
bool split_csv(std::string_view line, std::vector<std::string>& fields)
{
    fields.clear();
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return !quoted;
}

bool is_missing(std::string_view cell)
{
    return cell.empty() || cell == "nan" || cell == "NaN" || cell == "NA";
}

}  // namespace

TimeTable parse_timetable(std::string_view text, std::optional<Unit> unit)
{
    using Kind = TimeTableError::Kind;

    std::optional<Unit> pragma_unit;
    std::vector<std::string> header;
    std::vector<double> times;
    std::vector<std::vector<double>> cols;
    std::vector<std::string> fields;
    std::size_t row = 0;

    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (trim(line).empty()) {
            continue;
        }
        if (line.front() == '#') {
            std::string_view body = trim(line.substr(1));
            if (body.substr(0, 5) == "unit:") {
                pragma_unit = parse_unit(body.substr(5));
                if (!pragma_unit) {
                    throw TimeTableError(Kind::UnitMismatch,
                                         "unknown unit pragma '" + std::string(body) + "'");
                }
            }
            continue;
        }
        if (!split_csv(line, fields)) {
            throw TimeTableError(Kind::Syntax, "unterminated quoted field", row + 1);
        }
        if (header.empty()) {
            for (auto& f : fields) {
                f = std::string(trim(f));
            }
            if (fields.size() < 1 || (fields[0] != "timestamp" && fields[0] != "Timestamp")) {
                throw TimeTableError(Kind::Syntax, "first header column must be 'timestamp'");
            }
            header = fields;
            for (std::size_t c = 1; c < header.size(); ++c) {
                if (header[c].empty()) {
                    throw TimeTableError(Kind::Syntax, "empty column name in header", 0, c + 1);
                }
                for (std::size_t d = 1; d < c; ++d) {
                    if (header[d] == header[c]) {
                        throw TimeTableError(Kind::Syntax, "duplicate column '" + header[c] + "'",
                                             0, c + 1);
                    }
                }
            }
            cols.resize(header.size() - 1);
            continue;
        }
        ++row;
        if (fields.size() != header.size()) {
            throw TimeTableError(Kind::Ragged,
                                 "expected " + std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()),
                                 row);
        }
        const auto t = parse_timestamp(fields[0]);
        if (!t) {
            throw TimeTableError(Kind::UnparseableCell, "bad timestamp '" + fields[0] + "'", row, 1);
        }
        if (!times.empty() && !(*t > times.back())) {
            throw TimeTableError(Kind::NonMonotone, "timestamp does not increase", row, 1);
        }
        times.push_back(*t);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const std::string_view cell = trim(fields[c]);
            double v = std::nan("");
            if (!is_missing(cell) && !parse_double(cell, v)) {
                throw TimeTableError(Kind::UnparseableCell,
                                     "cannot parse '" + std::string(cell) + "' in column '" +
                                         header[c] + "'",
                                     row, c + 1);
            }
            cols[c - 1].push_back(v);
        }
    }

    if (header.empty()) {
        throw TimeTableError(Kind::Syntax, "missing header row");
    }
    if (unit && pragma_unit && *unit != *pragma_unit) {
        throw TimeTableError(Kind::UnitMismatch,
                             "file declares unit " + std::string(unit_label(*pragma_unit)) +
                                 " but " + std::string(unit_label(*unit)) + " was requested");
    }
    const auto resolved = unit ? unit : pragma_unit;
    if (!resolved) {
        throw TimeTableError(Kind::UnitMismatch, "no unit declared (use a '# unit:' line)");
    }

    std::vector<Series> series;
    for (std::size_t c = 1; c < header.size(); ++c) {
        series.push_back({header[c], *resolved, std::move(cols[c - 1])});
    }
    return TimeTable(std::move(times), std::move(series));
}

TimeTable load_timetable(const std::string& path, std::optional<Unit> unit)
{
    return parse_timetable(read_text_file(path), unit);
}

std::string write_timetable(const TimeTable& table)
{
    std::ostringstream out;
    if (!table.columns().empty()) {
        const Unit u = table.columns().front().unit;
        const bool uniform_unit = std::all_of(table.columns().begin(), table.columns().end(),
                                              [&](const Series& s) { return s.unit == u; });
        if (uniform_unit) {
            out << "# unit: " << unit_label(u) << '\n';
        }
    }
    out << "timestamp";
    for (const Series& s : table.columns()) {
        out << ',' << s.key;
    }
    out << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << format_timestamp(table.times()[i]);
        for (const Series& s : table.columns()) {
            out << ',';
            if (!std::isnan(s.values[i])) {
                out << format_number(s.values[i]);
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace pipenet
