#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sfwm/constants.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/vapor.hpp"

namespace sfwm {

/// Excitation/detection beam arrangement around the cell output viewport.
/// displacement_z = 0 puts the viewport at the center of the interaction
/// area; positive z moves the cell so more of the interaction volume is
/// inside the vapor.
struct BeamGeometry {
    double crossing_angle = 0.0;             // rad, in (0, pi/2)
    double excitation_diameter = 0.0;        // m (2 w_l)
    double detection_diameter = 0.0;         // m
    double stokes_antistokes_splitting = 0.0; // Hz
    double waist = 0.0;                      // m, Gaussian mode waist
    double cell_length = 0.0;                // m
    double displacement_z = 0.0;             // m, signed
};

/// Distance over which the Stokes/anti-Stokes splitting accumulates a pi
/// phase error: d = c / (2 * splitting).
inline double phase_mismatch_length(double splitting) {
    if (!(splitting > 0.0)) throw validation_error("phase_mismatch_length: splitting <= 0");
    return constants::speed_of_light / (2.0 * splitting);
}

/// Longitudinal extent of the excitation/detection mode overlap.
inline double overlap_length(double angle, double excitation_diameter,
                             double detection_diameter) {
    if (!(angle > 0.0) || !(angle < std::numbers::pi / 2.0)) {
        throw validation_error("overlap_length: angle outside (0, pi/2)");
    }
    return (excitation_diameter + detection_diameter) / std::sin(angle);
}

/// Smallest crossing angle whose overlap still fits within the phase-mismatch
/// length; inverse of overlap_length at L = phase_length.
inline double optimal_angle(double excitation_diameter, double detection_diameter,
                            double phase_length) {
    const double sum = excitation_diameter + detection_diameter;
    if (!(sum > 0.0) || !(phase_length > 0.0)) {
        throw validation_error("optimal_angle: non-positive input");
    }
    if (!(sum < phase_length)) {
        throw infeasible_error("optimal_angle: beam diameters exceed phase-mismatch length");
    }
    return std::asin(sum / phase_length);
}

namespace detail {
// FWHM -> sigma for a Gaussian: 2 sqrt(2 ln 2).
inline const double fwhm_to_sigma = 2.0 * std::sqrt(2.0 * std::log(2.0));

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}
} // namespace detail

/// Fraction of the longitudinal interaction weight inside the cell when the
/// viewport sits at z. The weight is a unit Gaussian centered on the
/// interaction area with FWHM equal to the interaction length.
inline double effective_atom_fraction(double z, double interaction_length) {
    if (!(interaction_length > 0.0)) {
        throw validation_error("effective_atom_fraction: interaction_length <= 0");
    }
    const double sigma = interaction_length / detail::fwhm_to_sigma;
    return detail::normal_cdf(z / sigma);
}

/// Mean transmission of anti-Stokes photons emitted across the interaction
/// profile, exp(-od(path)) averaged over the Gaussian weight. The vapor path
/// for an emission point s is the in-cell stretch to the viewport,
/// max(0, z - s); points outside the cell contribute unit transmission.
/// Evaluated by Simpson quadrature over +-8 sigma with `resolution` panels.
inline double antistokes_mean_transmission(double z, double interaction_length,
                                           const VaporState& vapor, int resolution = 4096) {
    if (!(interaction_length > 0.0)) {
        throw validation_error("antistokes_mean_transmission: interaction_length <= 0");
    }
    if (resolution < 8) throw validation_error("antistokes_mean_transmission: resolution < 8");
    const double sigma = interaction_length / detail::fwhm_to_sigma;
    const double kappa = vapor.od_resonant / vapor.reference_path; // OD per meter
    if (kappa == 0.0) return 1.0;

    const double lo = -8.0 * sigma;
    const double hi = std::min(z, 8.0 * sigma);
    if (hi <= lo) return 1.0; // interaction volume entirely outside the cell

    // In-cell attenuated part by composite Simpson (even panel count).
    int n = resolution % 2 == 0 ? resolution : resolution + 1;
    const double h = (hi - lo) / n;
    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    auto integrand = [&](double s) {
        const double u = s / sigma;
        return inv_norm * std::exp(-0.5 * u * u - kappa * (z - s));
    };
    double acc = integrand(lo) + integrand(hi);
    for (int i = 1; i < n; ++i) {
        acc += integrand(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    const double incell = acc * h / 3.0;
    const double outcell = 1.0 - detail::normal_cdf(z / sigma);
    const double t = outcell + incell;
    return std::clamp(t, 0.0, 1.0);
}

inline double overlap_length(const BeamGeometry& g) {
    return overlap_length(g.crossing_angle, g.excitation_diameter, g.detection_diameter);
}

inline double phase_mismatch_length(const BeamGeometry& g) {
    return phase_mismatch_length(g.stokes_antistokes_splitting);
}

/// In-cell portion of the overlap at the configured displacement; the
/// viewport truncation is the only shortening mechanism.
inline double effective_overlap_length(const BeamGeometry& g) {
    const double full = overlap_length(g);
    return full * effective_atom_fraction(g.displacement_z, full);
}

/// A configuration is phase matched when the in-cell overlap does not exceed
/// the phase-mismatch length (with a fractional slack).
inline bool phase_matched(const BeamGeometry& g, double slack = 0.1) {
    return effective_overlap_length(g) <= phase_mismatch_length(g) * (1.0 + slack);
}

} // namespace sfwm
