#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sfwm/biphoton.hpp"
#include "sfwm/correlate.hpp"
#include "sfwm/errors.hpp"
#include "sfwm/montecarlo.hpp"

namespace sfwm {

// Stream file layout: a 16-byte header ("SFWMTAG1" + 8 reserved zero bytes)
// followed by fixed-width 9-byte records, each a little-endian unsigned
// 64-bit picosecond timestamp plus one channel byte. Records are sorted by
// (timestamp, channel); there is no footer.
inline constexpr std::array<char, 8> stream_magic = {'S', 'F', 'W', 'M', 'T', 'A', 'G', '1'};
inline constexpr std::size_t stream_header_size = 16;
inline constexpr std::size_t stream_record_size = 9;

inline void write_stream(const std::string& path, const TimestampStream& s) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out.write(stream_magic.data(), stream_magic.size());
    const char zeros[8] = {};
    out.write(zeros, sizeof zeros);
    std::vector<char> buf;
    buf.reserve(s.records.size() * stream_record_size);
    for (const StreamRecord& r : s.records) {
        std::uint64_t t = r.time_ps;
        for (int i = 0; i < 8; ++i) {
            buf.push_back(static_cast<char>(t & 0xffu));
            t >>= 8;
        }
        buf.push_back(static_cast<char>(r.channel));
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw io_error("short write to '" + path + "'");
}

/// Read and validate a stream file. The format carries no duration, so the
/// stream duration is `duration` when given, otherwise (last timestamp + 1 ps).
inline TimestampStream read_stream(const std::string& path,
                                   std::optional<double> duration = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "' for reading");
    std::vector<char> data((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());

    if (data.size() < stream_header_size) {
        throw io_error("'" + path + "': truncated header at byte offset " +
                           std::to_string(data.size()),
                       data.size());
    }
    for (std::size_t i = 0; i < stream_magic.size(); ++i) {
        if (data[i] != stream_magic[i]) {
            throw io_error("'" + path + "': bad magic at byte offset " + std::to_string(i), i);
        }
    }
    for (std::size_t i = 8; i < stream_header_size; ++i) {
        if (data[i] != 0) {
            throw io_error("'" + path + "': nonzero reserved byte at offset " +
                               std::to_string(i),
                           i);
        }
    }
    const std::size_t body = data.size() - stream_header_size;
    if (body % stream_record_size != 0) {
        const std::size_t offset =
            stream_header_size + (body / stream_record_size) * stream_record_size;
        throw io_error("'" + path + "': truncated record at byte offset " +
                           std::to_string(offset),
                       offset);
    }

    TimestampStream s;
    s.records.resize(body / stream_record_size);
    const unsigned char* p =
        reinterpret_cast<const unsigned char*>(data.data()) + stream_header_size;
    std::uint64_t prev = 0;
    for (std::size_t k = 0; k < s.records.size(); ++k, p += stream_record_size) {
        std::uint64_t t = 0;
        for (int i = 7; i >= 0; --i) t = (t << 8) | p[i];
        const std::uint8_t ch = p[8];
        const std::size_t offset = stream_header_size + k * stream_record_size;
        if (ch > 1) {
            throw io_error("'" + path + "': invalid channel tag at byte offset " +
                               std::to_string(offset + 8),
                           offset + 8);
        }
        if (k > 0 && t < prev) {
            throw io_error("'" + path + "': records out of order at byte offset " +
                               std::to_string(offset),
                           offset);
        }
        prev = t;
        s.records[k] = {t, ch};
    }
    s.duration = duration.value_or(
        s.records.empty() ? 0.0 : static_cast<double>(prev + 1) * 1e-12);
    return s;
}

inline void write_stream_csv(const std::string& path, const TimestampStream& s) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "timestamp_ps,channel\n";
    for (const StreamRecord& r : s.records) {
        out << r.time_ps << ',' << static_cast<int>(r.channel) << '\n';
    }
    if (!out) throw io_error("short write to '" + path + "'");
}

inline void export_waveform_csv(const std::string& path, const Waveform& w) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "tau_seconds,intensity_per_second\n";
    char line[64];
    for (std::size_t k = 0; k < w.intensity.size(); ++k) {
        const double tau = w.origin + (static_cast<double>(k) + 0.5) * w.bin_width;
        std::snprintf(line, sizeof line, "%.9e,%.9e\n", tau, w.intensity[k]);
        out << line;
    }
    if (!out) throw io_error("short write to '" + path + "'");
}

inline void export_histogram_csv(const std::string& path, const CorrelationHistogram& h) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << "tau_seconds,counts,g2,stderr\n";
    char line[128];
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        std::snprintf(line, sizeof line, "%.9e,%llu,%.9e,%.9e\n", h.bin_center(k),
                      static_cast<unsigned long long>(h.counts[k]), h.normalized[k],
                      h.std_error[k]);
        out << line;
    }
    if (!out) throw io_error("short write to '" + path + "'");
}

} // namespace sfwm
