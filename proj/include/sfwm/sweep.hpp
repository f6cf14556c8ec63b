#pragma once

#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "sfwm/budget.hpp"
#include "sfwm/config.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/geometry.hpp"
#include "sfwm/vapor.hpp"

namespace sfwm {

enum class SweepAxis { temperature, power, displacement };

inline const char* axis_name(SweepAxis a) {
    switch (a) {
        case SweepAxis::temperature: return "temperature_c";
        case SweepAxis::power: return "pump_power_mw";
        case SweepAxis::displacement: return "displacement_mm";
    }
    return "axis";
}

inline SweepAxis axis_from_name(const std::string& s) {
    if (s == "temperature") return SweepAxis::temperature;
    if (s == "power") return SweepAxis::power;
    if (s == "displacement") return SweepAxis::displacement;
    throw validation_error("unknown sweep axis '" + s +
                           "' (expected temperature|power|displacement)");
}

struct SweepRow {
    double axis_value = 0.0;
    double m_stokes = 0.0;      // Hz
    double m_antistokes = 0.0;  // Hz
    double coincidences = 0.0;  // Hz
    double g2_peak = 0.0;
    double bandwidth_mhz = 0.0;
    std::string flag; // empty = ok; otherwise why the point is unreliable
};

struct SweepResult {
    std::string axis;
    std::vector<SweepRow> rows;
};

namespace detail {

// Shared scaling state for one sweep: baseline longitudinal overlap fraction
// f0 and attenuated-atom integral A0 at the configured operating point.
struct SweepModel {
    RateBudget base;
    double interaction_length = 0.0;
    double z0 = 0.0;
    double kappa0 = 0.0; // resonant OD per meter at the configured temperature
    double f0 = 0.0;
    double a0 = 0.0;
    double noise_stokes_intrinsic = 0.0; // N_S0 minus the orphaned-pair share
    double density0 = 0.0;
    double bandwidth_mhz = 0.0;

    // Attenuated-atom integral A = f + Tbar - 1 (both from the same Gaussian
    // longitudinal weight), the anti-Stokes analogue of the atom fraction f.
    double attenuated_fraction(double z, double kappa) const {
        VaporState v;
        v.od_resonant = kappa;
        v.reference_path = 1.0;
        const double f = effective_atom_fraction(z, interaction_length);
        const double t = antistokes_mean_transmission(z, interaction_length, v);
        return std::max(0.0, f + t - 1.0);
    }

    /// Budget at a scaled operating point: source scale s (density x power),
    /// overlap fraction f, attenuated integral a. Pairs and anti-Stokes noise
    /// follow the attenuated integral; Stokes noise follows the bare atom
    /// number plus the Stokes partners of absorbed pairs.
    RateBudget at(double s, double f, double a) const {
        RateBudget b = base;
        b.pair_rate = base.pair_rate * s * (a / a0);
        b.noise_antistokes = base.noise_antistokes * s * (a / a0);
        // f >= a holds analytically; the max() only absorbs quadrature noise
        b.noise_stokes = noise_stokes_intrinsic * s * (f / f0) +
                         std::max(0.0, base.pair_rate * s * (f - a) / a0);
        return b;
    }
};

inline SweepModel make_sweep_model(const ExperimentConfig& cfg) {
    SweepModel m;
    m.base = make_budget(cfg);
    const BeamGeometry g = make_geometry(cfg);
    m.interaction_length = overlap_length(g);
    m.z0 = g.displacement_z;
    m.kappa0 = cfg.vapor.od_resonant / cfg.vapor.reference_path_m;
    m.f0 = effective_atom_fraction(m.z0, m.interaction_length);
    m.a0 = m.attenuated_fraction(m.z0, m.kappa0);
    if (!(m.f0 > 1e-9) || !(m.a0 > 1e-12)) {
        throw validation_error("sweep: configured displacement leaves no interaction volume "
                               "inside the cell");
    }
    const double orphan = m.base.pair_rate * (m.f0 - m.a0) / m.a0;
    m.noise_stokes_intrinsic = m.base.noise_stokes - orphan;
    if (m.noise_stokes_intrinsic < 0.0) {
        throw validation_error("sweep: Stokes noise below the absorbed-pair floor at the "
                               "configured operating point");
    }
    m.density0 = vapor_density(cfg.vapor.temperature_c + 273.15);
    m.bandwidth_mhz = bandwidth_from_width(fwhm(make_filtered_waveform(cfg))) / 1e6;
    return m;
}

inline SweepRow evaluate_row(const SweepModel& m, const ExperimentConfig& cfg, SweepAxis axis,
                             double x) {
    SweepRow row;
    row.axis_value = x;
    row.bandwidth_mhz = m.bandwidth_mhz;
    try {
        double s = 1.0, f = m.f0, a = m.a0;
        switch (axis) {
            case SweepAxis::temperature: {
                const double nf = vapor_density(x + 273.15) / m.density0;
                s = nf;
                a = m.attenuated_fraction(m.z0, m.kappa0 * nf);
                break;
            }
            case SweepAxis::power: {
                if (!cfg.budget.pump_power_mw) {
                    throw validation_error("power sweep needs budget.pump_power_mw as the "
                                           "baseline");
                }
                if (!(x > 0.0)) throw validation_error("pump power must be > 0");
                s = x / *cfg.budget.pump_power_mw;
                if (x < cfg.budget.min_valid_power_mw) row.flag = "below_model_validity";
                break;
            }
            case SweepAxis::displacement: {
                const double z = x * 1e-3;
                f = effective_atom_fraction(z, m.interaction_length);
                a = m.attenuated_fraction(z, m.kappa0);
                break;
            }
        }
        const RateBudget b = m.at(s, f, a);
        const Singles singles = forward_singles(b);
        const Coincidences c = forward_coincidences(b);
        row.m_stokes = singles.stokes;
        row.m_antistokes = singles.antistokes;
        row.coincidences = c.total();
        row.g2_peak = c.noise > 0.0 ? 1.0 + c.signal / c.noise
                                    : std::numeric_limits<double>::infinity();
    } catch (const error& e) {
        if (row.flag.empty()) row.flag = std::string("infeasible: ") + e.what();
    }
    return row;
}

} // namespace detail

/// Evaluate the forward model over a linearly spaced axis. Per-point
/// infeasibilities land in the row's flag, never abort the sweep. Row order
/// follows the axis regardless of evaluation parallelism.
inline SweepResult run_sweep(const ExperimentConfig& cfg, SweepAxis axis, double from,
                             double to, int steps, int threads = 1) {
    if (steps < 1) throw validation_error("sweep: steps must be >= 1");
    if (steps > 1 && !(to > from)) {
        throw validation_error("sweep: axis range must be increasing");
    }
    const detail::SweepModel model = detail::make_sweep_model(cfg);

    SweepResult result;
    result.axis = axis_name(axis);
    result.rows.resize(steps);
    auto value_at = [&](int i) {
        return steps == 1 ? from : from + (to - from) * static_cast<double>(i) / (steps - 1);
    };
    if (threads <= 1) {
        for (int i = 0; i < steps; ++i) {
            result.rows[i] = detail::evaluate_row(model, cfg, axis, value_at(i));
        }
    } else {
        std::vector<std::future<SweepRow>> futures;
        futures.reserve(steps);
        for (int i = 0; i < steps; ++i) {
            futures.push_back(std::async(std::launch::async, [&, i] {
                return detail::evaluate_row(model, cfg, axis, value_at(i));
            }));
        }
        for (int i = 0; i < steps; ++i) result.rows[i] = futures[i].get();
    }
    return result;
}

inline void write_sweep_csv(const SweepResult& r, std::ostream& out) {
    out << r.axis << ",m_stokes_hz,m_antistokes_hz,coincidences_hz,g2_peak,bandwidth_mhz,flag\n";
    char line[256];
    for (const SweepRow& row : r.rows) {
        std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,", row.axis_value,
                      row.m_stokes, row.m_antistokes, row.coincidences, row.g2_peak,
                      row.bandwidth_mhz);
        out << line << row.flag << '\n';
    }
}

} // namespace sfwm
