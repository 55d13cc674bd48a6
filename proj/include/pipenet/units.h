#pragma once

// Unit conversions. Everything inside the library is SI except pipe
// roughness, which stays in millimetres as it is quoted in the field.

#include <numbers>

namespace pipenet::units {

inline constexpr double kLitresPerCubicMetre = 1000.0;
inline constexpr double kMillimetresPerMetre = 1000.0;
inline constexpr double kSecondsPerHour = 3600.0;

constexpr double lps_to_m3s(double lps) { return lps / kLitresPerCubicMetre; }
constexpr double m3s_to_lps(double m3s) { return m3s * kLitresPerCubicMetre; }

constexpr double mm_to_m(double mm) { return mm / kMillimetresPerMetre; }
constexpr double m_to_mm(double m) { return m * kMillimetresPerMetre; }

constexpr double circle_area(double diameter_m)
{
    return std::numbers::pi * diameter_m * diameter_m / 4.0;
}

}  // namespace pipenet::units
