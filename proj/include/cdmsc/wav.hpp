#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <vector>

#include "cdmsc/common.hpp"

namespace cdmsc::wav {

struct Info {
    std::uint32_t sample_rate = 0;
    std::uint64_t num_samples = 0;  // per channel
    std::uint16_t channels = 0;
    std::uint16_t bits_per_sample = 0;
};

namespace detail {

struct ChunkHeader {
    char id[4];
    std::uint32_t size;
};

inline bool read_chunk_header(std::istream& in, ChunkHeader& h) {
    in.read(h.id, 4);
    if (!in) return false;
    h.size = le::read<std::uint32_t>(in);
    return static_cast<bool>(in);
}

inline bool id_is(const ChunkHeader& h, const char* s) {
    return h.id[0] == s[0] && h.id[1] == s[1] && h.id[2] == s[2] && h.id[3] == s[3];
}

}  // namespace detail

// Parses RIFF/WAVE headers. When samples != nullptr the PCM data is decoded to
// floats in [-1, 1); otherwise only the header is inspected.
inline Info read(const std::filesystem::path& path, std::vector<double>* samples) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path.string());

    detail::ChunkHeader riff{};
    if (!detail::read_chunk_header(in, riff) || !detail::id_is(riff, "RIFF"))
        throw IoFailure("not a RIFF file: " + path.string());
    char wave[4];
    in.read(wave, 4);
    if (!in || wave[0] != 'W' || wave[1] != 'A' || wave[2] != 'V' || wave[3] != 'E')
        throw IoFailure("not a WAVE file: " + path.string());

    Info info;
    bool have_fmt = false;
    detail::ChunkHeader ch{};
    while (detail::read_chunk_header(in, ch)) {
        if (detail::id_is(ch, "fmt ")) {
            auto format = le::read<std::uint16_t>(in);
            info.channels = le::read<std::uint16_t>(in);
            info.sample_rate = le::read<std::uint32_t>(in);
            le::read<std::uint32_t>(in);  // byte rate
            le::read<std::uint16_t>(in);  // block align
            info.bits_per_sample = le::read<std::uint16_t>(in);
            if (ch.size > 16) in.seekg(ch.size - 16, std::ios::cur);
            if (format != 1)
                throw IoFailure("unsupported WAV format tag " + std::to_string(format) +
                                " in " + path.string());
            if (info.channels != 1)
                throw IoFailure("only mono WAV supported: " + path.string());
            if (info.bits_per_sample != 16)
                throw IoFailure("only 16-bit PCM supported: " + path.string());
            have_fmt = true;
        } else if (detail::id_is(ch, "data")) {
            if (!have_fmt) throw IoFailure("data chunk before fmt: " + path.string());
            info.num_samples = ch.size / 2;
            if (samples) {
                samples->resize(info.num_samples);
                std::vector<char> raw(ch.size);
                in.read(raw.data(), ch.size);
                if (!in) throw IoFailure("truncated data chunk: " + path.string());
                for (std::uint64_t i = 0; i < info.num_samples; ++i) {
                    std::int16_t s;
                    std::memcpy(&s, raw.data() + 2 * i, 2);
                    (*samples)[i] = static_cast<double>(s) / 32768.0;
                }
            }
            return info;
        } else {
            in.seekg(ch.size + (ch.size & 1), std::ios::cur);
        }
        if (!in) break;
    }
    throw IoFailure("no data chunk in " + path.string());
}

inline Info probe(const std::filesystem::path& path) { return read(path, nullptr); }

// 16-bit PCM mono; samples are clamped to [-1, 1].
inline void write(const std::filesystem::path& path, const std::vector<double>& samples,
                  std::uint32_t sample_rate) {
    atomic_write_file(path, [&](std::ostream& out) {
        const std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * 2);
        out.write("RIFF", 4);
        le::write<std::uint32_t>(out, 36 + data_size);
        out.write("WAVE", 4);
        out.write("fmt ", 4);
        le::write<std::uint32_t>(out, 16);
        le::write<std::uint16_t>(out, 1);  // PCM
        le::write<std::uint16_t>(out, 1);  // mono
        le::write<std::uint32_t>(out, sample_rate);
        le::write<std::uint32_t>(out, sample_rate * 2);
        le::write<std::uint16_t>(out, 2);
        le::write<std::uint16_t>(out, 16);
        out.write("data", 4);
        le::write<std::uint32_t>(out, data_size);
        for (double v : samples) {
            double c = std::clamp(v, -1.0, 1.0 - 1.0 / 32768.0);
            auto s = static_cast<std::int16_t>(std::lround(c * 32768.0));
            le::write<std::int16_t>(out, s);
        }
    });
}

}  // namespace cdmsc::wav
