#pragma once

namespace sfwm::constants {

inline constexpr double boltzmann = 1.380649e-23;    // J/K (exact SI)
inline constexpr double speed_of_light = 299792458.0; // m/s (exact SI)

// 87Rb, the working isotope: 86.909180 u.
inline constexpr double rb87_mass = 1.4431606e-25; // kg

// D1 line (5S1/2 -> 5P1/2, 795 nm): both the excitation and the
// anti-Stokes emission live on this manifold.
inline constexpr double rb87_d1_frequency = 377.107463e12; // Hz

} // namespace sfwm::constants
