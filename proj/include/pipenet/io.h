#pragma once

// File access and the number formatting shared by every writer.

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pipenet {

class IoError : public std::runtime_error {
public:
    IoError(std::string path, const std::string& message);
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// Six significant digits; "nan" for NaN. Used for all CSV/report floats.
std::string format_number(double value);

// Shortest decimal form that parses back to the same double.
std::string format_exact(double value);

// Parses a complete token as a finite double.
bool parse_double(std::string_view token, double& out);

// Splits on spaces/tabs, dropping empty fields.
std::vector<std::string_view> split_whitespace(std::string_view line);

std::string_view trim(std::string_view s);

}  // namespace pipenet
