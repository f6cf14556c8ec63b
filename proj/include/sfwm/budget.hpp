#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "sfwm/errors.hpp"

namespace sfwm {

/// Informational split of the single-channel noise into the share produced
/// by the competing four-wave-mixing (Raman) processes.
struct NoiseBreakdown {
    double raman_stokes = 0.0;     // Hz, <= noise_stokes
    double raman_antistokes = 0.0; // Hz, <= noise_antistokes
};

/// Source-side rate budget. pair_rate is the true pair rate emitted into the
/// detection modes; noise rates are per-channel uncorrelated photons that
/// suffer the same detection losses as the pairs; backgrounds (dark counts)
/// do not.
struct RateBudget {
    double pair_rate = 0.0;             // Hz (P)
    double noise_stokes = 0.0;          // Hz (N_S)
    double noise_antistokes = 0.0;      // Hz (N_AS)
    double eta_stokes = 1.0;            // (0, 1]
    double eta_antistokes = 1.0;        // (0, 1]
    double background_stokes = 0.0;     // Hz (B_S)
    double background_antistokes = 0.0; // Hz (B_AS)
    double window = 0.0;                // s (coincidence window)
    std::optional<NoiseBreakdown> raman;
};

struct Singles {
    double stokes = 0.0;     // Hz (M_S)
    double antistokes = 0.0; // Hz (M_AS)
};

struct Coincidences {
    double signal = 0.0; // Hz (C_sg)
    double noise = 0.0;  // Hz (C_ns)
    double total() const { return signal + noise; }
};

struct CorrelationSummary {
    double g2_cross_peak = 0.0;
    double g2_ss = 0.0;
    double g2_asas = 0.0;
    double cs_factor = 0.0;   // g2_cross^2 / (g2_ss * g2_asas)
    double g2_heralded = 0.0; // 2 * g2_asas / g2_cross
};

inline void validate_budget(const RateBudget& b) {
    auto nonneg = [](double v, const char* name) {
        if (!(v >= 0.0)) throw validation_error(std::string("RateBudget: ") + name + " < 0");
    };
    nonneg(b.pair_rate, "pair_rate");
    nonneg(b.noise_stokes, "noise_stokes");
    nonneg(b.noise_antistokes, "noise_antistokes");
    nonneg(b.background_stokes, "background_stokes");
    nonneg(b.background_antistokes, "background_antistokes");
    if (!(b.eta_stokes > 0.0 && b.eta_stokes <= 1.0) ||
        !(b.eta_antistokes > 0.0 && b.eta_antistokes <= 1.0)) {
        throw validation_error("RateBudget: efficiencies must lie in (0, 1]");
    }
    if (!(b.window > 0.0)) throw validation_error("RateBudget: window <= 0");
}

/// Detected singles rates: M = eta (P + N) + B per channel.
inline Singles forward_singles(const RateBudget& b) {
    validate_budget(b);
    return {b.eta_stokes * (b.pair_rate + b.noise_stokes) + b.background_stokes,
            b.eta_antistokes * (b.pair_rate + b.noise_antistokes) + b.background_antistokes};
}

/// Zero-delay coincidence rates within the window: the detected pair rate
/// C_sg = eta_S eta_AS P and the accidental rate C_ns from every uncorrelated
/// pairing of noise, pairs, and backgrounds.
inline Coincidences forward_coincidences(const RateBudget& b) {
    validate_budget(b);
    const double p = b.pair_rate, ns = b.noise_stokes, nas = b.noise_antistokes;
    const double es = b.eta_stokes, eas = b.eta_antistokes;
    const double bs = b.background_stokes, bas = b.background_antistokes;
    Coincidences c;
    c.signal = es * eas * p;
    c.noise = (es * eas * (p * ns + p * nas + ns * nas) + es * (p + ns) * bas +
               eas * (p + nas) * bs + bs * bas) *
              b.window;
    return c;
}

/// Peak of the normalized cross-correlation, g2(0) = 1 + C_sg / C_ns.
inline double g2_peak(const RateBudget& b) {
    const Coincidences c = forward_coincidences(b);
    if (!(c.noise > 0.0)) {
        throw validation_error("g2_peak: accidental rate is zero (noiseless ideal)");
    }
    return 1.0 + c.signal / c.noise;
}

/// Invert measured singles and coincidences into (P, N_S, N_AS).
///
/// Substituting N(P) from the singles equations into the coincidence sum
/// collapses it to C(P) = eta_S eta_AS P (1 - P dt) + M_S M_AS dt, which is
/// strictly increasing on the physical interval, so a bisection bracketed by
/// [0, min((M_S-B_S)/eta_S, (M_AS-B_AS)/eta_AS)] recovers the unique root.
inline RateBudget solve_budget(double m_s, double m_as, double coincidence_rate,
                               double eta_s, double eta_as, double b_s, double b_as,
                               double window) {
    if (!(eta_s > 0.0 && eta_s <= 1.0) || !(eta_as > 0.0 && eta_as <= 1.0)) {
        throw validation_error("solve_budget: efficiencies must lie in (0, 1]");
    }
    if (!(b_s >= 0.0 && b_as >= 0.0)) throw validation_error("solve_budget: background < 0");
    if (!(window > 0.0)) throw validation_error("solve_budget: window <= 0");
    if (!(m_s > b_s) || !(m_as > b_as)) {
        throw validation_error("solve_budget: measured singles must exceed backgrounds");
    }
    if (!(coincidence_rate > 0.0)) {
        throw inconsistent_measurement_error("solve_budget: coincidence rate must be positive");
    }

    const double s_s = (m_s - b_s) / eta_s;    // P + N_S
    const double s_as = (m_as - b_as) / eta_as; // P + N_AS

    auto coincidence_of = [&](double p) {
        RateBudget b;
        b.pair_rate = p;
        b.noise_stokes = s_s - p;
        b.noise_antistokes = s_as - p;
        b.eta_stokes = eta_s;
        b.eta_antistokes = eta_as;
        b.background_stokes = b_s;
        b.background_antistokes = b_as;
        b.window = window;
        return forward_coincidences(b).total();
    };

    const double floor = coincidence_of(0.0); // = M_S M_AS dt, accidentals only
    if (coincidence_rate < floor * (1.0 - 1e-12)) {
        throw inconsistent_measurement_error(
            "solve_budget: coincidence rate " + std::to_string(coincidence_rate) +
            " Hz below the accidental floor " + std::to_string(floor) +
            " Hz implied by the singles");
    }
    // Stay on the increasing branch of the quadratic (P < 1/(2 dt)).
    const double p_top = std::min(std::min(s_s, s_as), 0.5 / window);
    if (coincidence_rate > coincidence_of(p_top) * (1.0 + 1e-12)) {
        throw infeasible_error(
            "solve_budget: coincidences imply a pair rate above the singles budget");
    }

    double lo = 0.0, hi = p_top;
    for (int i = 0; i < 200 && (hi - lo) > 1e-14 * p_top; ++i) {
        const double mid = 0.5 * (lo + hi);
        (coincidence_of(mid) < coincidence_rate ? lo : hi) = mid;
    }
    const double p = 0.5 * (lo + hi);

    RateBudget b;
    b.pair_rate = p;
    b.noise_stokes = std::max(0.0, s_s - p);
    b.noise_antistokes = std::max(0.0, s_as - p);
    b.eta_stokes = eta_s;
    b.eta_antistokes = eta_as;
    b.background_stokes = b_s;
    b.background_antistokes = b_as;
    b.window = window;
    return b;
}

/// Cauchy-Schwarz violation factor; F > 1 certifies nonclassical correlations.
inline double cs_violation(double g2_cross, double g2_ss, double g2_asas) {
    if (!(g2_cross > 0.0) || !(g2_ss > 0.0) || !(g2_asas > 0.0)) {
        throw validation_error("cs_violation: inputs must be positive");
    }
    return g2_cross * g2_cross / (g2_ss * g2_asas);
}

/// Heralded autocorrelation estimate of the anti-Stokes field,
/// g2_her = 2 g2_ASAS / g2_S,AS; < 1 indicates single-photon character.
inline double heralded_g2(double g2_asas, double g2_cross) {
    if (!(g2_cross > 0.0)) throw validation_error("heralded_g2: g2_cross <= 0");
    if (!(g2_asas >= 0.0)) throw validation_error("heralded_g2: g2_asas < 0");
    return 2.0 * g2_asas / g2_cross;
}

/// Remove uncorrelated dark counts from the singles normalization:
/// (g2 - 1) is rescaled by M_S M_AS / ((M_S - B_S)(M_AS - B_AS)).
inline double background_correct(double g2_raw, double m_s, double m_as, double b_s,
                                 double b_as) {
    if (!(g2_raw >= 1.0)) throw validation_error("background_correct: g2_raw < 1");
    if (!(m_s > b_s) || !(m_as > b_as)) {
        throw infeasible_error("background_correct: singles must exceed backgrounds");
    }
    return 1.0 + (g2_raw - 1.0) * (m_s * m_as) / ((m_s - b_s) * (m_as - b_as));
}

/// Rescale the source terms for a different atom number and pump power;
/// pairs and noise scale together, backgrounds are unaffected.
inline RateBudget scale_budget(const RateBudget& b, double density_factor,
                               double power_factor) {
    if (!(density_factor > 0.0) || !(power_factor > 0.0)) {
        throw validation_error("scale_budget: factors must be positive");
    }
    const double f = density_factor * power_factor;
    RateBudget out = b;
    out.pair_rate *= f;
    out.noise_stokes *= f;
    out.noise_antistokes *= f;
    if (out.raman) {
        out.raman->raman_stokes *= f;
        out.raman->raman_antistokes *= f;
    }
    return out;
}

inline CorrelationSummary make_correlation_summary(double g2_cross, double g2_ss,
                                                   double g2_asas) {
    CorrelationSummary s;
    s.g2_cross_peak = g2_cross;
    s.g2_ss = g2_ss;
    s.g2_asas = g2_asas;
    s.cs_factor = cs_violation(g2_cross, g2_ss, g2_asas);
    s.g2_heralded = heralded_g2(g2_asas, g2_cross);
    return s;
}

} // namespace sfwm
