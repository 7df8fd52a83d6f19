#pragma once

// Internal unit system: density veh/km, flux veh/s, length km, time s.
// Speeds are therefore km/s; helpers convert from the units people quote.

namespace lwr::units {

inline constexpr double kMetresPerKm = 1000.0;
inline constexpr double kSecondsPerHour = 3600.0;

constexpr double km_per_s_from_m_per_s(double v) { return v / kMetresPerKm; }
constexpr double m_per_s_from_km_per_s(double v) { return v * kMetresPerKm; }
constexpr double km_per_s_from_km_per_h(double v) { return v / kSecondsPerHour; }
constexpr double km_from_m(double x) { return x / kMetresPerKm; }
constexpr double m_from_km(double x) { return x * kMetresPerKm; }
constexpr double veh_per_s_from_veh_per_h(double q) { return q / kSecondsPerHour; }

}  // namespace lwr::units
