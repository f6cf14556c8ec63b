#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <utility>
#include <vector>

#include "sfwm/biphoton.hpp"
#include "sfwm/budget.hpp"
#include "sfwm/errors.hpp"

namespace sfwm {

inline constexpr std::uint8_t channel_stokes = 0;
inline constexpr std::uint8_t channel_antistokes = 1;

struct StreamRecord {
    std::uint64_t time_ps = 0;
    std::uint8_t channel = 0;

    friend bool operator==(const StreamRecord&, const StreamRecord&) = default;
};

/// Time-ordered detector click stream. Timestamps are picoseconds from the
/// start of the run and are strictly below duration.
struct TimestampStream {
    std::vector<StreamRecord> records;
    double duration = 0.0; // s
    std::uint64_t seed = 0;
};

struct SimulationOptions {
    double chunk_seconds = 1.0;       // generation chunk; fixed layout, thread-independent
    std::uint64_t max_events = 100'000'000;
    int threads = 1;
    // Optional pairwise-correlated (thermal-like) noise: target zero-delay
    // autocorrelation of each noise process and its coherence time.
    double bunching_factor = 1.0;     // [1, 2)
    double bunching_coherence = 1e-9; // s
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
    return splitmix64(splitmix64(seed ^ 0x6a09e667f3bcc909ULL) + chunk);
}

// Uniform in [0, 1) from the full 64-bit state; engine-portable and exact.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double exp_gap(std::mt19937_64& rng, double rate) {
    return -std::log1p(-uniform01(rng)) / rate;
}

// Inverse CDF of the binned waveform; the fractional part of u doubles as
// the uniform intra-bin jitter.
struct WaveformSampler {
    double origin = 0.0;
    double bin_width = 0.0;
    std::vector<double> cdf; // cumulative bin mass

    explicit WaveformSampler(const Waveform& w) : origin(w.origin), bin_width(w.bin_width) {
        cdf.reserve(w.intensity.size());
        double acc = 0.0;
        for (double v : w.intensity) {
            acc += v * w.bin_width;
            cdf.push_back(acc);
        }
    }

    double sample(double u) const {
        const double target = u * cdf.back();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
        const std::size_t k = std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
        const double lo = k == 0 ? 0.0 : cdf[k - 1];
        const double mass = cdf[k] - lo;
        const double frac = mass > 0.0 ? (target - lo) / mass : 0.5;
        return origin + (static_cast<double>(k) + frac) * bin_width;
    }
};

} // namespace detail

inline void validate_stream_sorted(const TimestampStream& s) {
    for (std::size_t i = 1; i < s.records.size(); ++i) {
        if (s.records[i].time_ps < s.records[i - 1].time_ps) {
            throw validation_error("timestamp stream is not time-sorted at record " +
                                   std::to_string(i));
        }
    }
}

/// Keep only one channel's records (stream metadata preserved).
inline TimestampStream filter_channel(const TimestampStream& s, std::uint8_t channel) {
    TimestampStream out;
    out.duration = s.duration;
    out.seed = s.seed;
    for (const StreamRecord& r : s.records) {
        if (r.channel == channel) out.records.push_back(r);
    }
    return out;
}

/// Generate a synthetic click stream realizing the budget's statistics:
/// a Poisson pair process thinned per channel with anti-Stokes delays drawn
/// from the waveform, per-channel Poisson noise at eta*N (optionally with
/// thermal bunching), and unthinned backgrounds. Bit-exact for a fixed
/// (parameters, seed) regardless of thread count: generation is chunked with
/// per-chunk derived seeds and merged in chunk order.
inline TimestampStream simulate_stream(const RateBudget& b, const Waveform& w,
                                       double duration, std::uint64_t seed,
                                       const SimulationOptions& opt = {}) {
    validate_budget(b);
    if (!(duration > 0.0)) throw validation_error("simulate_stream: duration <= 0");
    if (std::abs(w.total() - 1.0) > 1e-6) {
        throw validation_error("simulate_stream: waveform is not normalized");
    }
    if (!(opt.chunk_seconds > 0.0)) throw validation_error("simulate_stream: chunk <= 0");
    if (!(opt.bunching_factor >= 1.0)) {
        throw validation_error("simulate_stream: bunching_factor < 1");
    }

    const Singles singles = forward_singles(b);
    const double expected = (singles.stokes + singles.antistokes) * duration;
    if (expected > static_cast<double>(opt.max_events)) {
        throw capacity_error("simulate_stream: expected event count " +
                             std::to_string(static_cast<std::uint64_t>(expected)) +
                             " exceeds the cap of " + std::to_string(opt.max_events));
    }

    const detail::WaveformSampler sampler(w);
    const std::uint64_t duration_ps = static_cast<std::uint64_t>(std::llround(duration * 1e12));
    const std::uint64_t chunk_ps =
        static_cast<std::uint64_t>(std::llround(opt.chunk_seconds * 1e12));
    const std::uint64_t nchunks = (duration_ps + chunk_ps - 1) / chunk_ps;

    // bunched-noise parameters: q/(1+q) = (beta - 1) * rate * coherence
    auto bunching_q = [&](double rate) {
        if (opt.bunching_factor == 1.0 || rate <= 0.0) return 0.0;
        if (!(opt.bunching_coherence > 0.0)) {
            throw validation_error("simulate_stream: bunching coherence <= 0");
        }
        const double y = (opt.bunching_factor - 1.0) * rate * opt.bunching_coherence;
        if (!(y < 1.0)) {
            throw validation_error("simulate_stream: bunching target infeasible at this "
                                   "rate/coherence");
        }
        return y / (1.0 - y);
    };
    const double noise_rate_s = b.eta_stokes * b.noise_stokes;
    const double noise_rate_as = b.eta_antistokes * b.noise_antistokes;
    const double q_s = bunching_q(noise_rate_s);
    const double q_as = bunching_q(noise_rate_as);

    auto generate_chunk = [&](std::uint64_t ci) {
        std::vector<StreamRecord> out;
        std::mt19937_64 rng(detail::chunk_seed(seed, ci));
        const std::uint64_t base_ps = ci * chunk_ps;
        const double chunk_len =
            std::min(opt.chunk_seconds, duration - static_cast<double>(ci) * opt.chunk_seconds);

        auto emit = [&](double offset_s, std::uint8_t ch) {
            const std::uint64_t t =
                base_ps + static_cast<std::uint64_t>(std::llround(offset_s * 1e12));
            if (t < duration_ps) out.push_back({t, ch});
        };

        // Draw order is fixed (pairs, Stokes noise, anti-Stokes noise,
        // backgrounds); changing it would break bit-exact reproducibility.
        if (b.pair_rate > 0.0) {
            for (double t = detail::exp_gap(rng, b.pair_rate); t < chunk_len;
                 t += detail::exp_gap(rng, b.pair_rate)) {
                const bool click_s = detail::uniform01(rng) < b.eta_stokes;
                const bool click_as = detail::uniform01(rng) < b.eta_antistokes;
                const double delay = sampler.sample(detail::uniform01(rng));
                if (click_s) emit(t, channel_stokes);
                if (click_as) emit(t + delay, channel_antistokes);
            }
        }

        auto noise_process = [&](double rate, double q, std::uint8_t ch) {
            if (rate <= 0.0) return;
            const double base_rate = rate / (1.0 + q);
            for (double t = detail::exp_gap(rng, base_rate); t < chunk_len;
                 t += detail::exp_gap(rng, base_rate)) {
                emit(t, ch);
                if (q > 0.0 && detail::uniform01(rng) < q) {
                    const double mag =
                        -std::log1p(-detail::uniform01(rng)) * opt.bunching_coherence;
                    const double tw = detail::uniform01(rng) < 0.5 ? t - mag : t + mag;
                    const double abs_s = static_cast<double>(ci) * opt.chunk_seconds + tw;
                    if (abs_s >= 0.0 && abs_s < duration) emit(tw, ch);
                }
            }
        };
        noise_process(noise_rate_s, q_s, channel_stokes);
        noise_process(noise_rate_as, q_as, channel_antistokes);
        noise_process(b.background_stokes, 0.0, channel_stokes);
        noise_process(b.background_antistokes, 0.0, channel_antistokes);
        return out;
    };

    std::vector<std::vector<StreamRecord>> parts(nchunks);
    if (opt.threads <= 1 || nchunks <= 1) {
        for (std::uint64_t i = 0; i < nchunks; ++i) parts[i] = generate_chunk(i);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        const int n = std::min<int>(opt.threads, static_cast<int>(nchunks));
        pool.reserve(n);
        for (int t = 0; t < n; ++t) {
            pool.emplace_back([&] {
                for (std::uint64_t i = next.fetch_add(1); i < nchunks; i = next.fetch_add(1)) {
                    parts[i] = generate_chunk(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    TimestampStream stream;
    stream.duration = duration;
    stream.seed = seed;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    stream.records.reserve(total);
    for (const auto& p : parts) {
        stream.records.insert(stream.records.end(), p.begin(), p.end());
    }
    std::sort(stream.records.begin(), stream.records.end(),
              [](const StreamRecord& a, const StreamRecord& b2) {
                  return a.time_ps != b2.time_ps ? a.time_ps < b2.time_ps
                                                 : a.channel < b2.channel;
              });
    return stream;
}

/// 50/50 beam-splitter routing for autocorrelation measurements: every record
/// lands in exactly one output, so counts are conserved.
inline std::pair<TimestampStream, TimestampStream> hbt_split(const TimestampStream& s,
                                                             std::uint64_t seed) {
    std::mt19937_64 rng(detail::splitmix64(seed ^ 0xa5a5a5a5a5a5a5a5ULL));
    TimestampStream a, b;
    a.duration = b.duration = s.duration;
    a.seed = b.seed = seed;
    for (const StreamRecord& r : s.records) {
        (detail::uniform01(rng) < 0.5 ? a : b).records.push_back(r);
    }
    return {std::move(a), std::move(b)};
}

} // namespace sfwm
