#pragma once

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cdmsc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define CDMSC_DEFINE_ERROR(NAME)                        \
    struct NAME : Error {                               \
        explicit NAME(const std::string& what_arg)      \
            : Error(std::string(#NAME ": ") + what_arg) {} \
    }

// corpus
CDMSC_DEFINE_ERROR(MalformedName);
CDMSC_DEFINE_ERROR(OutOfRangeId);
CDMSC_DEFINE_ERROR(EmptyCorpus);
CDMSC_DEFINE_ERROR(IoFailure);
CDMSC_DEFINE_ERROR(DegenerateSplit);
// dsp
CDMSC_DEFINE_ERROR(EmptyInput);
CDMSC_DEFINE_ERROR(WrongSampleRate);
CDMSC_DEFINE_ERROR(NoFrames);
CDMSC_DEFINE_ERROR(AlreadyStandardized);
CDMSC_DEFINE_ERROR(BandMismatch);
CDMSC_DEFINE_ERROR(BadCacheFile);
// nn
CDMSC_DEFINE_ERROR(ShapeMismatch);
CDMSC_DEFINE_ERROR(NonScalarLoss);
CDMSC_DEFINE_ERROR(MissingGradient);
CDMSC_DEFINE_ERROR(LabelOutOfRange);
CDMSC_DEFINE_ERROR(NumericFailure);
// model
CDMSC_DEFINE_ERROR(ParamBudgetViolation);
CDMSC_DEFINE_ERROR(EmptyBatch);
// train
CDMSC_DEFINE_ERROR(EmptySplit);
CDMSC_DEFINE_ERROR(DivergedLoss);
CDMSC_DEFINE_ERROR(MissingCheckpoint);
// eval
CDMSC_DEFINE_ERROR(LengthMismatch);
CDMSC_DEFINE_ERROR(NoSupport);
CDMSC_DEFINE_ERROR(MissingPredictions);
CDMSC_DEFINE_ERROR(MissingEvaluation);
// config
CDMSC_DEFINE_ERROR(ConfigError);

#undef CDMSC_DEFINE_ERROR

// FNV-1a, used for seeding substreams and content digests.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a64(s.data(), s.size(), h);
}

// Fixed 6-decimal float format for all CSV output.
inline std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

namespace detail {
inline std::atomic<int>& worker_count_slot() {
    static std::atomic<int> n{0};  // 0 = auto
    return n;
}
}  // namespace detail

inline void set_worker_count(int n) { detail::worker_count_slot().store(n); }

inline int worker_count() {
    int n = detail::worker_count_slot().load();
    if (n > 0) return n;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw > 8 ? 8 : hw);
}

// Runs fn(i) for i in [0, n). Each index is handled by exactly one worker and
// every per-index computation is self-contained, so results do not depend on
// the worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    int workers = worker_count();
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t w = static_cast<std::size_t>(workers);
    if (w > n) w = n;
    std::vector<std::thread> threads;
    threads.reserve(w - 1);
    auto run_chunk = [&fn](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
    };
    std::size_t chunk = n / w;
    std::size_t rem = n % w;
    std::size_t begin = 0;
    for (std::size_t t = 0; t < w; ++t) {
        std::size_t end = begin + chunk + (t < rem ? 1 : 0);
        if (t + 1 == w) {
            run_chunk(begin, end);
        } else {
            threads.emplace_back(run_chunk, begin, end);
        }
        begin = end;
    }
    for (auto& th : threads) th.join();
}

// --- little-endian binary IO -------------------------------------------------

namespace le {

template <typename T>
void write(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read(std::istream& in) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in) throw IoFailure("unexpected end of stream");
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

inline void write_string(std::ostream& out, std::string_view s) {
    write<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    auto n = read<std::uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw IoFailure("unexpected end of stream");
    return s;
}

}  // namespace le

// Write-temp-then-rename so partially written artifacts are never observed.
template <typename WriteFn>
void atomic_write_file(const std::filesystem::path& path, WriteFn&& write_fn) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoFailure("cannot open " + tmp.string());
        write_fn(out);
        out.flush();
        if (!out) throw IoFailure("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoFailure("rename failed: " + path.string() + ": " + ec.message());
}

}  // namespace cdmsc
