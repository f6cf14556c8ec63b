#pragma once

#include <cmath>
#include <string>

#include "sfwm/constants.hpp"
#include "sfwm/errors.hpp"

namespace sfwm {

/// Temperature-derived state of the source cell: atomic number density,
/// 1-sigma width of the 1D Doppler profile, and the calibrated resonant
/// optical depth for a reference path length.
struct VaporState {
    double temperature = 0.0;    // K
    double density = 0.0;        // atoms / m^3
    double doppler_sigma = 0.0;  // Hz
    double od_resonant = 0.0;    // dimensionless, at line center over reference_path
    double reference_path = 0.0; // m
};

namespace detail {
// Nesmeyanov's liquid-phase correlation for rubidium vapor pressure,
// log10 P[torr] = 15.88253 - 4529.635/T + 5.8663e-4 T - 2.99138 log10 T.
inline constexpr double rb_vp_a = 15.88253;
inline constexpr double rb_vp_b = 4529.635;
inline constexpr double rb_vp_c = 0.00058663;
inline constexpr double rb_vp_d = 2.99138;
inline constexpr double torr_to_pa = 133.322387415;
} // namespace detail

inline constexpr double vapor_density_t_min = 250.0; // K
inline constexpr double vapor_density_t_max = 500.0; // K

/// Rb number density from the liquid-phase vapor-pressure correlation,
/// n = P(T) / (kB T). Valid for 250 K <= T <= 500 K.
inline double vapor_density(double temperature) {
    if (!(temperature >= vapor_density_t_min && temperature <= vapor_density_t_max)) {
        throw validation_error("vapor_density: temperature " + std::to_string(temperature) +
                               " K outside correlation range [250, 500] K");
    }
    const double log10_p_torr = detail::rb_vp_a - detail::rb_vp_b / temperature +
                                detail::rb_vp_c * temperature -
                                detail::rb_vp_d * std::log10(temperature);
    const double pressure = std::pow(10.0, log10_p_torr) * detail::torr_to_pa;
    return pressure / (constants::boltzmann * temperature);
}

/// 1-sigma of the 1D Doppler-broadened line: sigma = nu0 * sqrt(kB T / (m c^2)).
inline double doppler_sigma(double temperature, double line_frequency, double atomic_mass) {
    if (!(temperature > 0.0) || !(line_frequency > 0.0) || !(atomic_mass > 0.0)) {
        throw validation_error("doppler_sigma: all inputs must be positive");
    }
    const double c2 = constants::speed_of_light * constants::speed_of_light;
    return line_frequency * std::sqrt(constants::boltzmann * temperature / (atomic_mass * c2));
}

inline VaporState make_vapor_state(double temperature, double od_resonant = 3.4,
                                   double reference_path = 0.075,
                                   double line_frequency = constants::rb87_d1_frequency,
                                   double atomic_mass = constants::rb87_mass) {
    if (!(od_resonant >= 0.0)) throw validation_error("make_vapor_state: od_resonant < 0");
    if (!(reference_path > 0.0)) throw validation_error("make_vapor_state: reference_path <= 0");
    VaporState s;
    s.temperature = temperature;
    s.density = vapor_density(temperature);
    s.doppler_sigma = doppler_sigma(temperature, line_frequency, atomic_mass);
    s.od_resonant = od_resonant;
    s.reference_path = reference_path;
    return s;
}

/// Optical depth rescaled linearly to an arbitrary path length.
inline double scaled_od(const VaporState& state, double path_length) {
    if (!(path_length >= 0.0)) throw validation_error("scaled_od: negative path length");
    return state.od_resonant * (path_length / state.reference_path);
}

/// Transmission through a Doppler (Gaussian) absorption profile:
/// T = exp(-od * exp(-detuning^2 / (2 sigma^2))), in (0, 1].
inline double line_transmission(double od, double detuning, double sigma) {
    if (!(od >= 0.0)) throw validation_error("line_transmission: od < 0");
    if (!(sigma > 0.0)) throw validation_error("line_transmission: doppler_sigma <= 0");
    const double x = detuning / sigma;
    return std::exp(-od * std::exp(-0.5 * x * x));
}

} // namespace sfwm
