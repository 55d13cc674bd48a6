#pragma once

// Unit-tagged time series loaded from CSV. Timestamps are seconds since
// the Unix epoch (UTC, no leap seconds).

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pipenet {

enum class Unit { LitresPerSecond, Metres, CubicMetresPerSecond };

std::string_view unit_label(Unit unit);
std::optional<Unit> parse_unit(std::string_view label);

// ISO-8601 "YYYY-MM-DDTHH:MM:SS[.fff][Z]" (a space may replace 'T').
std::optional<double> parse_timestamp(std::string_view text);
std::string format_timestamp(double seconds);

class TimeTableError : public std::runtime_error {
public:
    enum class Kind { Syntax, NonMonotone, UnparseableCell, UnitMismatch, Ragged };

    TimeTableError(Kind kind, const std::string& message, std::size_t row = 0, std::size_t column = 0);

    Kind kind() const { return kind_; }
    std::size_t row() const { return row_; }  // 1-based data row, header excluded
    std::size_t column() const { return column_; }

private:
    Kind kind_;
    std::size_t row_;
    std::size_t column_;
};

struct Series {
    std::string key;
    Unit unit = Unit::Metres;
    std::vector<double> values;  // NaN marks a missing sample
};

class TimeTable {
public:
    TimeTable() = default;
    // Throws std::invalid_argument if times are not strictly increasing or
    // a column length differs from the number of times.
    TimeTable(std::vector<double> times, std::vector<Series> columns);

    // Uniform grid starting at `start` with `count` samples.
    static TimeTable uniform(double start, double step, std::size_t count);

    std::size_t size() const { return times_.size(); }
    bool empty() const { return times_.empty(); }
    double start() const { return times_.empty() ? 0.0 : times_.front(); }
    double end() const { return times_.empty() ? 0.0 : times_.back(); }
    // Grid spacing; nullopt when the sampling is irregular.
    std::optional<double> step() const { return step_; }
    const std::vector<double>& times() const { return times_; }

    const std::vector<Series>& columns() const { return columns_; }
    bool has(std::string_view key) const;
    const Series& column(std::string_view key) const;  // throws std::out_of_range
    const std::vector<double>& values(std::string_view key) const { return column(key).values; }

    void add_column(Series series);

    // Rows [first, first + count).
    TimeTable slice(std::size_t first, std::size_t count) const;

private:
    std::vector<double> times_;
    std::optional<double> step_;
    std::vector<Series> columns_;
};

// A run of missing samples in one column.
struct Gap {
    std::string key;
    std::size_t first = 0;
    std::size_t length = 0;
};

std::vector<Gap> find_gaps(const TimeTable& table);

// `unit` may come from the caller or from a "# unit: <label>" pragma; if
// both are present they must agree. Empty cells and "nan" parse as missing.
TimeTable parse_timetable(std::string_view text, std::optional<Unit> unit = std::nullopt);
TimeTable load_timetable(const std::string& path, std::optional<Unit> unit = std::nullopt);

std::string write_timetable(const TimeTable& table);

}  // namespace pipenet
