#pragma once

namespace pipeopt::units {

/// Standard gravity, m/s^2.
inline constexpr double kGravity = 9.80665;

/// Seconds per hour; converts m^3/s to m^3/h and back.
inline constexpr double kSecondsPerHour = 3600.0;

inline constexpr double m3h_to_m3s(double q_m3h) { return q_m3h / kSecondsPerHour; }
inline constexpr double m3s_to_m3h(double q_m3s) { return q_m3s * kSecondsPerHour; }

/// Watts to kilowatts (cost rates are $/kWh * kW = $/h).
inline constexpr double kWattsPerKilowatt = 1000.0;

}  // namespace pipeopt::units
