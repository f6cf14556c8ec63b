#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include "sfwm/errors.hpp"
#include "sfwm/montecarlo.hpp"

namespace sfwm {

/// Binned, normalized g2(tau) estimate. Bin k covers
/// [tau_min + k*bin, tau_min + (k+1)*bin) on an exact picosecond grid; a
/// delay on a bin edge goes to the upper bin. normalized = counts /
/// (R1 R2 bin duration); std_error = normalized / sqrt(counts).
struct CorrelationHistogram {
    double bin_width = 0.0; // s
    double tau_min = 0.0;   // s
    double tau_max = 0.0;   // s
    std::vector<std::uint64_t> counts;
    std::vector<double> normalized;
    std::vector<double> std_error;
    double rate1 = 0.0;    // Hz
    double rate2 = 0.0;    // Hz
    double duration = 0.0; // s
    bool empty = false;
    std::int64_t bin_ps = 0;
    std::int64_t tau_min_ps = 0;

    std::size_t bins() const { return counts.size(); }
    double bin_center(std::size_t k) const {
        return (static_cast<double>(tau_min_ps) +
                (static_cast<double>(k) + 0.5) * static_cast<double>(bin_ps)) *
               1e-12;
    }
    /// Bin index holding delay tau = 0 (its left edge).
    std::size_t zero_bin() const {
        return static_cast<std::size_t>(-tau_min_ps / bin_ps);
    }
};

/// All-pairs-in-window cross-correlation of two sorted streams: counts every
/// (t1, t2) pair with t2 - t1 in [-tau_range, +tau_range), via a two-pointer
/// sliding window (O(N * mean window occupancy)). This is the intensity
/// correlation; it is not start-stop counting, which diverges from it at
/// high rates.
inline CorrelationHistogram cross_correlate(const TimestampStream& s1,
                                            const TimestampStream& s2, double bin_width,
                                            double tau_range, int threads = 1) {
    if (!(bin_width > 0.0)) throw validation_error("cross_correlate: bin_width <= 0");
    if (!(tau_range >= bin_width)) {
        throw validation_error("cross_correlate: tau_range smaller than one bin");
    }
    validate_stream_sorted(s1);
    validate_stream_sorted(s2);

    CorrelationHistogram h;
    h.bin_ps = std::llround(bin_width * 1e12);
    if (h.bin_ps < 1) throw validation_error("cross_correlate: bin_width below 1 ps");
    const std::int64_t range_ps = std::llround(tau_range * 1e12);
    const std::int64_t half_bins = (range_ps + h.bin_ps - 1) / h.bin_ps;
    const std::int64_t nbins = 2 * half_bins;
    h.tau_min_ps = -half_bins * h.bin_ps;
    h.bin_width = static_cast<double>(h.bin_ps) * 1e-12;
    h.tau_min = static_cast<double>(h.tau_min_ps) * 1e-12;
    h.tau_max = static_cast<double>(-h.tau_min_ps) * 1e-12;
    h.counts.assign(static_cast<std::size_t>(nbins), 0);

    const double duration = std::max(s1.duration, s2.duration);
    h.duration = duration;
    if (s1.records.empty() || s2.records.empty() || !(duration > 0.0)) {
        h.empty = true;
        h.normalized.assign(h.counts.size(), 0.0);
        h.std_error.assign(h.counts.size(), 0.0);
        return h;
    }
    h.rate1 = static_cast<double>(s1.records.size()) / duration;
    h.rate2 = static_cast<double>(s2.records.size()) / duration;

    const auto& r1 = s1.records;
    const auto& r2 = s2.records;
    const std::int64_t tau_lo = h.tau_min_ps;
    const std::int64_t tau_hi = -h.tau_min_ps;

    auto count_block = [&](std::size_t begin, std::size_t end,
                           std::vector<std::uint64_t>& counts) {
        std::size_t lo = 0;
        for (std::size_t i = begin; i < end; ++i) {
            const std::int64_t t1 = static_cast<std::int64_t>(r1[i].time_ps);
            while (lo < r2.size() &&
                   static_cast<std::int64_t>(r2[lo].time_ps) < t1 + tau_lo) {
                ++lo;
            }
            for (std::size_t j = lo;
                 j < r2.size() && static_cast<std::int64_t>(r2[j].time_ps) < t1 + tau_hi;
                 ++j) {
                const std::int64_t tau = static_cast<std::int64_t>(r2[j].time_ps) - t1;
                ++counts[static_cast<std::size_t>((tau - tau_lo) / h.bin_ps)];
            }
        }
    };

    if (threads <= 1 || r1.size() < 4096) {
        count_block(0, r1.size(), h.counts);
    } else {
        // Contiguous blocks of s1 against the whole of s2: each pair is
        // counted by exactly one block, so the merged histogram equals the
        // single-pass result bin for bin.
        const int n = std::min<int>(threads, 64);
        std::vector<std::vector<std::uint64_t>> local(
            n, std::vector<std::uint64_t>(h.counts.size(), 0));
        std::vector<std::thread> pool;
        pool.reserve(n);
        const std::size_t per = (r1.size() + n - 1) / n;
        for (int t = 0; t < n; ++t) {
            const std::size_t begin = std::min(r1.size(), per * static_cast<std::size_t>(t));
            const std::size_t end = std::min(r1.size(), begin + per);
            pool.emplace_back([&, begin, end, t] { count_block(begin, end, local[t]); });
        }
        for (auto& t : pool) t.join();
        for (const auto& l : local) {
            for (std::size_t k = 0; k < h.counts.size(); ++k) h.counts[k] += l[k];
        }
    }

    const double denom = h.rate1 * h.rate2 * h.bin_width * duration;
    h.normalized.resize(h.counts.size());
    h.std_error.resize(h.counts.size());
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double c = static_cast<double>(h.counts[k]);
        h.normalized[k] = c / denom;
        h.std_error[k] = h.counts[k] >= 1 ? h.normalized[k] / std::sqrt(c) : 0.0;
    }
    return h;
}

/// Autocorrelation via an HBT split: route the stream 50/50 and
/// cross-correlate the halves; symmetric in tau within statistics.
inline CorrelationHistogram auto_correlate(const TimestampStream& s, double bin_width,
                                           double tau_range, std::uint64_t seed,
                                           int threads = 1) {
    const auto halves = hbt_split(s, seed);
    return cross_correlate(halves.first, halves.second, bin_width, tau_range, threads);
}

struct PeakSummary {
    double g2_peak = 0.0;
    double peak_tau = 0.0;               // s
    double fwhm_window = 0.0;            // s
    double coincidences_in_window = 0.0; // Hz
};

/// Locate the correlation peak, the FWHM of (g2 - 1) by linear interpolation
/// between bin centers, and the coincidence rate integrated over that window.
/// Requires a bin with normalized > 1 + 5 * std_error.
inline PeakSummary peak_and_window(const CorrelationHistogram& h) {
    if (h.empty || h.counts.empty()) throw no_peak_error("peak_and_window: empty histogram");
    std::size_t ip = 0;
    double peak = -1.0;
    for (std::size_t k = 0; k < h.normalized.size(); ++k) {
        if (h.normalized[k] > peak) {
            peak = h.normalized[k];
            ip = k;
        }
    }
    if (!(peak > 1.0 + 5.0 * h.std_error[ip])) {
        throw no_peak_error("peak_and_window: no bin exceeds 1 + 5 sigma");
    }
    const double half = 1.0 + 0.5 * (peak - 1.0);

    std::size_t lo = ip, hi = ip;
    while (lo > 0 && h.normalized[lo - 1] > half) --lo;
    while (hi + 1 < h.normalized.size() && h.normalized[hi + 1] > half) ++hi;

    double left = h.bin_center(lo);
    if (lo > 0) {
        const double y0 = h.normalized[lo - 1], y1 = h.normalized[lo];
        left = h.bin_center(lo - 1) + h.bin_width * (half - y0) / (y1 - y0);
    }
    double right = h.bin_center(hi);
    if (hi + 1 < h.normalized.size()) {
        const double y0 = h.normalized[hi], y1 = h.normalized[hi + 1];
        right = h.bin_center(hi) + h.bin_width * (y0 - half) / (y0 - y1);
    }

    PeakSummary p;
    p.g2_peak = peak;
    p.peak_tau = h.bin_center(ip);
    p.fwhm_window = right - left;
    std::uint64_t in_window = 0;
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        const double c = h.bin_center(k);
        if (c >= left && c <= right) in_window += h.counts[k];
    }
    p.coincidences_in_window = static_cast<double>(in_window) / h.duration;
    return p;
}

} // namespace sfwm
