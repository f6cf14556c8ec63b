#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sfwm/errors.hpp"

namespace sfwm {

/// Normalized biphoton temporal intensity profile on a uniform grid.
/// Bin k covers [origin + k*bin_width, origin + (k+1)*bin_width); intensity
/// holds the bin-averaged density in 1/s, so sum(intensity)*bin_width = 1.
/// tau = 0 is the Stokes detection time.
struct Waveform {
    double bin_width = 0.0; // s
    double origin = 0.0;    // s, left edge of bin 0
    std::vector<double> intensity;

    double total() const {
        double acc = 0.0;
        for (double v : intensity) acc += v;
        return acc * bin_width;
    }
};

/// Lorentzian frequency filter (Fabry-Perot etalon line).
struct FilterSpec {
    double lorentzian_fwhm = 0.0;    // Hz
    double peak_transmission = 1.0;  // (0, 1]
};

inline void validate_filter(const FilterSpec& f) {
    if (!(f.lorentzian_fwhm > 0.0)) throw validation_error("FilterSpec: fwhm <= 0");
    if (!(f.peak_transmission > 0.0 && f.peak_transmission <= 1.0)) {
        throw validation_error("FilterSpec: peak_transmission outside (0, 1]");
    }
}

/// One-sided exponential wavepacket, intensity ~ exp(-decay_rate * tau) for
/// tau >= 0. Bins hold exact integrals over the bin, so normalization is
/// exact by construction.
inline Waveform ideal_waveform(double decay_rate, double bin_width, double span) {
    if (!(decay_rate > 0.0)) throw validation_error("ideal_waveform: decay_rate <= 0");
    if (!(bin_width > 0.0)) throw validation_error("ideal_waveform: bin_width <= 0");
    if (!(span >= 10.0 / decay_rate)) {
        throw validation_error("ideal_waveform: span shorter than 10 decay times truncates "
                               "the wavepacket");
    }
    const std::size_t n = static_cast<std::size_t>(std::ceil(span / bin_width));
    Waveform w;
    w.bin_width = bin_width;
    w.origin = 0.0;
    w.intensity.resize(n);
    const double x = decay_rate * bin_width;
    const double norm = 1.0 - std::exp(-x * static_cast<double>(n)); // truncated tail mass
    // bin integral: exp(-x k) (1 - exp(-x)); divide by bin width -> density
    const double step = std::exp(-x);
    double left = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double right = left * step;
        w.intensity[k] = (left - right) / (norm * bin_width);
        left = right;
    }
    return w;
}

/// Convolve with the one-sided exponential impulse response of a Lorentzian
/// filter (decay rate pi * fwhm); one application per filtered channel.
/// Output is renormalized on the extended grid.
inline Waveform filter_impulse_convolve(const Waveform& w, const FilterSpec& f) {
    validate_filter(f);
    if (w.intensity.empty() || !(w.bin_width > 0.0)) {
        throw validation_error("filter_impulse_convolve: empty waveform");
    }
    if (!(w.bin_width <= 0.1 / f.lorentzian_fwhm)) {
        throw validation_error("filter_impulse_convolve: bin width cannot resolve the filter "
                               "impulse response (need bin <= 0.1/fwhm)");
    }
    const double a = std::numbers::pi * f.lorentzian_fwhm;
    const double x = a * w.bin_width;
    // kernel bins out to ~exp(-30): beyond that the response is negligible
    const std::size_t klen =
        static_cast<std::size_t>(std::ceil(30.0 / x)) + 1;
    std::vector<double> kernel(klen);
    {
        const double step = std::exp(-x);
        double left = 1.0;
        for (std::size_t k = 0; k < klen; ++k) {
            const double right = left * step;
            kernel[k] = left - right; // bin mass of the unit response
            left = right;
        }
    }
    Waveform out;
    out.bin_width = w.bin_width;
    out.origin = w.origin;
    out.intensity.assign(w.intensity.size() + klen - 1, 0.0);
    for (std::size_t i = 0; i < w.intensity.size(); ++i) {
        const double wi = w.intensity[i];
        if (wi == 0.0) continue;
        for (std::size_t k = 0; k < klen; ++k) out.intensity[i + k] += wi * kernel[k];
    }
    double total = out.total();
    if (!(total > 0.0)) throw shape_error("filter_impulse_convolve: zero output");
    for (double& v : out.intensity) v /= total;
    return out;
}

/// Full width at half maximum of a unimodal profile, found by linear
/// interpolation between bin centers. If the above-half run touches an array
/// edge (a sharp support boundary, e.g. an unfiltered exponential), the
/// crossing is taken at that edge bin's center.
inline double fwhm(const Waveform& w) {
    if (w.intensity.size() < 2 || !(w.bin_width > 0.0)) {
        throw shape_error("fwhm: waveform too short");
    }
    const auto it = std::max_element(w.intensity.begin(), w.intensity.end());
    const double peak = *it;
    if (!(peak > 0.0)) throw shape_error("fwhm: flat or empty profile");
    const std::size_t ip = static_cast<std::size_t>(it - w.intensity.begin());
    const double half = 0.5 * peak;

    // the above-half region must be one contiguous run, otherwise multimodal
    std::size_t lo = ip, hi = ip;
    while (lo > 0 && w.intensity[lo - 1] > half) --lo;
    while (hi + 1 < w.intensity.size() && w.intensity[hi + 1] > half) ++hi;
    for (std::size_t i = 0; i < w.intensity.size(); ++i) {
        if (w.intensity[i] > half && (i < lo || i > hi)) {
            throw shape_error("fwhm: profile is multimodal at half maximum");
        }
    }

    auto center = [&](std::size_t i) {
        return w.origin + (static_cast<double>(i) + 0.5) * w.bin_width;
    };
    double left = center(lo);
    if (lo > 0) {
        const double y0 = w.intensity[lo - 1], y1 = w.intensity[lo];
        left = center(lo - 1) + w.bin_width * (half - y0) / (y1 - y0);
    }
    double right = center(hi);
    if (hi + 1 < w.intensity.size()) {
        const double y0 = w.intensity[hi], y1 = w.intensity[hi + 1];
        right = center(hi) + w.bin_width * (y0 - half) / (y0 - y1);
    }
    if (!(right > left)) throw shape_error("fwhm: degenerate profile width");
    return right - left;
}

/// Spectral bandwidth estimate from a temporal width: delta_nu = 1 / FWHM.
inline double bandwidth_from_width(double temporal_fwhm) {
    if (!(temporal_fwhm > 0.0)) throw validation_error("bandwidth_from_width: fwhm <= 0");
    return 1.0 / temporal_fwhm;
}

inline Waveform apply_filters(Waveform w, const std::vector<FilterSpec>& filters) {
    for (const FilterSpec& f : filters) w = filter_impulse_convolve(w, f);
    return w;
}

/// Invert the post-filter width: find the wavepacket decay rate whose
/// filtered FWHM equals 1/target_bandwidth. Monotone in the decay rate, so
/// bisection; throws infeasible_error when the filters alone are already
/// wider than the target.
inline double fit_decay_rate(double target_bandwidth, const std::vector<FilterSpec>& filters,
                             double bin_width = 0.0) {
    if (!(target_bandwidth > 0.0)) throw validation_error("fit_decay_rate: bandwidth <= 0");
    const double target_width = 1.0 / target_bandwidth;
    double max_filter = 0.0;
    for (const FilterSpec& f : filters) {
        validate_filter(f);
        max_filter = std::max(max_filter, f.lorentzian_fwhm);
    }
    if (bin_width <= 0.0) {
        bin_width = target_width / 200.0;
        if (max_filter > 0.0) bin_width = std::min(bin_width, 0.05 / max_filter);
    }
    auto width_of = [&](double decay) {
        Waveform w = ideal_waveform(decay, bin_width, 14.0 / decay);
        return fwhm(apply_filters(std::move(w), filters));
    };

    double lo = 0.2 * std::numbers::ln2 / target_width; // unfiltered width ~5x target
    double hi = 2e4 / target_width;
    if (width_of(hi) > target_width) {
        throw infeasible_error("fit_decay_rate: filters are narrower than the requested "
                               "bandwidth allows");
    }
    if (width_of(lo) < target_width) {
        throw infeasible_error("fit_decay_rate: target bandwidth below the search range");
    }
    for (int i = 0; i < 80 && (hi - lo) > 1e-9 * hi; ++i) {
        const double mid = std::sqrt(lo * hi); // geometric: the scale spans decades
        (width_of(mid) > target_width ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

} // namespace sfwm
