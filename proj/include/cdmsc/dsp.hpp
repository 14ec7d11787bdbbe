#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "cdmsc/common.hpp"
#include "cdmsc/fft.hpp"

namespace cdmsc::dsp {

struct Waveform {
    std::vector<double> samples;  // mono
    std::uint32_t sample_rate_hz = 0;
};

// Fixed feature geometry: 8 kHz input, 512-point FFT, 10 ms hop, 64 mel bands
// over 0-4 kHz, natural log of (power + eps).
struct FeatureParams {
    std::uint32_t sample_rate_hz = 8000;
    std::size_t n_fft = 512;
    std::size_t hop = 80;
    std::size_t n_mels = 64;
    double fmin_hz = 0.0;
    double fmax_hz = 4000.0;
    double log_eps = 1e-10;
};

struct LogMelFeature {
    std::vector<double> values;  // row-major [frames x band_count]
    std::size_t frames = 0;
    std::size_t band_count = 64;
    double hop_s = 0.010;
    double fmin_hz = 0.0;
    double fmax_hz = 4000.0;
    bool standardized = false;

    double& at(std::size_t t, std::size_t b) { return values[t * band_count + b]; }
    double at(std::size_t t, std::size_t b) const { return values[t * band_count + b]; }
};

struct StandardizationStats {
    std::vector<double> mean;  // per band
    std::vector<double> std;   // per band, clamped to std_floor
    std::string source;        // identifier of the split the stats came from
    std::vector<std::size_t> clamped_bands;

    static constexpr double std_floor = 1e-8;
};

// --- resampling ---------------------------------------------------------------

namespace detail {

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    double px = M_PI * x;
    return std::sin(px) / px;
}

// Blackman window on [-1, 1].
inline double blackman(double u) {
    if (u < -1.0 || u > 1.0) return 0.0;
    double t = 0.5 * (u + 1.0);  // [0,1]
    return 0.42 - 0.5 * std::cos(2.0 * M_PI * t) + 0.08 * std::cos(4.0 * M_PI * t);
}

}  // namespace detail

// Polyphase windowed-sinc resampler, 16 zero crossings, Blackman window.
// Output length is round(n * target / source), so duration is preserved to
// within one output sample.
inline Waveform resample(const Waveform& w, std::uint32_t target_hz) {
    if (w.samples.empty()) throw EmptyInput("resample: empty waveform");
    if (target_hz == 0) throw EmptyInput("resample: target rate must be positive");
    if (w.sample_rate_hz == target_hz) return w;

    const std::uint64_t p = w.sample_rate_hz;  // source
    const std::uint64_t q = target_hz;
    const std::uint64_t g = std::gcd(p, q);
    const std::uint64_t step_num = p / g;  // input samples per output sample
    const std::uint64_t step_den = q / g;

    const double cutoff = std::min(1.0, static_cast<double>(q) / static_cast<double>(p));
    constexpr int kZeroCrossings = 16;
    const int half = static_cast<int>(std::ceil(kZeroCrossings / cutoff));
    const double inv_support = 1.0 / static_cast<double>(half);

    auto kernel = [&](double u) {
        return cutoff * detail::sinc(cutoff * u) * detail::blackman(u * inv_support);
    };

    // Per-phase tap tables; the fractional offset cycles with period step_den.
    const int taps = 2 * half + 1;
    std::vector<double> table;
    const bool use_table = step_den <= 4096;
    if (use_table) {
        table.resize(step_den * static_cast<std::size_t>(taps));
        for (std::uint64_t phase = 0; phase < step_den; ++phase) {
            double frac = static_cast<double>(phase) / static_cast<double>(step_den);
            for (int j = -half; j <= half; ++j)
                table[phase * taps + static_cast<std::size_t>(j + half)] =
                    kernel(frac - j);
        }
    }

    const std::uint64_t n_in = w.samples.size();
    const std::uint64_t n_out = (n_in * q + p / 2) / p;
    Waveform out;
    out.sample_rate_hz = target_hz;
    out.samples.resize(n_out);
    const double* x = w.samples.data();

    for (std::uint64_t n = 0; n < n_out; ++n) {
        const std::uint64_t pos_num = n * step_num;
        const std::int64_t i0 = static_cast<std::int64_t>(pos_num / step_den);
        const std::uint64_t phase = pos_num % step_den;
        double acc = 0.0;
        if (use_table) {
            const double* h = table.data() + phase * taps;
            for (int j = -half; j <= half; ++j) {
                std::int64_t m = i0 + j;
                if (m < 0 || m >= static_cast<std::int64_t>(n_in)) continue;
                acc += x[m] * h[j + half];
            }
        } else {
            double frac = static_cast<double>(phase) / static_cast<double>(step_den);
            for (int j = -half; j <= half; ++j) {
                std::int64_t m = i0 + j;
                if (m < 0 || m >= static_cast<std::int64_t>(n_in)) continue;
                acc += x[m] * kernel(frac - j);
            }
        }
        out.samples[n] = acc;
    }
    return out;
}

// Scales so that max |sample| = 1; an all-zero clip is returned unchanged.
inline Waveform peak_normalize(Waveform w) {
    double peak = 0.0;
    for (double v : w.samples) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double& v : w.samples) v /= peak;
    return w;
}

// --- mel filterbank -----------------------------------------------------------

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular filters with unit peak (no area normalisation), HTK mel scale.
// Row-major [n_mels x (n_fft/2 + 1)].
struct MelFilterbank {
    std::size_t n_mels = 0;
    std::size_t n_bins = 0;
    std::vector<double> weights;
    std::vector<double> center_hz;

    static MelFilterbank build(const FeatureParams& fp) {
        MelFilterbank fb;
        fb.n_mels = fp.n_mels;
        fb.n_bins = fp.n_fft / 2 + 1;
        fb.weights.assign(fb.n_mels * fb.n_bins, 0.0);
        fb.center_hz.resize(fb.n_mels);

        const double mel_lo = hz_to_mel(fp.fmin_hz);
        const double mel_hi = hz_to_mel(fp.fmax_hz);
        std::vector<double> corners(fp.n_mels + 2);
        for (std::size_t i = 0; i < corners.size(); ++i)
            corners[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                                static_cast<double>(fp.n_mels + 1));
        const double bin_hz =
            static_cast<double>(fp.sample_rate_hz) / static_cast<double>(fp.n_fft);
        for (std::size_t m = 0; m < fp.n_mels; ++m) {
            const double left = corners[m], center = corners[m + 1],
                         right = corners[m + 2];
            fb.center_hz[m] = center;
            for (std::size_t k = 0; k < fb.n_bins; ++k) {
                const double f = bin_hz * static_cast<double>(k);
                double wgt = 0.0;
                if (f > left && f < center)
                    wgt = (f - left) / (center - left);
                else if (f == center)
                    wgt = 1.0;
                else if (f > center && f < right)
                    wgt = (right - f) / (right - center);
                fb.weights[m * fb.n_bins + k] = wgt;
            }
        }
        return fb;
    }
};

namespace detail {

// Mirror indexing without edge repetition; degenerates to 0 for n == 1.
inline std::size_t reflect_index(std::int64_t i, std::int64_t n) {
    if (n == 1) return 0;
    const std::int64_t period = 2 * (n - 1);
    std::int64_t m = i % period;
    if (m < 0) m += period;
    if (m >= n) m = period - m;
    return static_cast<std::size_t>(m);
}

inline const MelFilterbank& default_filterbank() {
    static const MelFilterbank fb = MelFilterbank::build(FeatureParams{});
    return fb;
}

inline const std::vector<double>& hann_window(std::size_t n) {
    static const std::vector<double> win = [n] {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i)
            w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                        static_cast<double>(n));
        return w;
    }();
    return win;
}

}  // namespace detail

// Centered STFT with reflect padding: frame t is centered on sample t*hop, so
// a clip of n samples yields ceil(n / hop) frames.
inline LogMelFeature logmel(const Waveform& w, const FeatureParams& fp = {}) {
    if (w.sample_rate_hz != fp.sample_rate_hz)
        throw WrongSampleRate("expected " + std::to_string(fp.sample_rate_hz) +
                              " Hz, got " + std::to_string(w.sample_rate_hz));
    const std::int64_t n = static_cast<std::int64_t>(w.samples.size());
    if (n < 1) throw EmptyInput("logmel: empty waveform");

    const std::size_t frames =
        static_cast<std::size_t>((n + static_cast<std::int64_t>(fp.hop) - 1) /
                                 static_cast<std::int64_t>(fp.hop));
    const MelFilterbank& fb = detail::default_filterbank();
    const auto& win = detail::hann_window(fp.n_fft);
    const std::int64_t half = static_cast<std::int64_t>(fp.n_fft) / 2;

    LogMelFeature feat;
    feat.frames = frames;
    feat.band_count = fp.n_mels;
    feat.hop_s = static_cast<double>(fp.hop) / static_cast<double>(fp.sample_rate_hz);
    feat.fmin_hz = fp.fmin_hz;
    feat.fmax_hz = fp.fmax_hz;
    feat.standardized = false;
    feat.values.resize(frames * fp.n_mels);

    std::vector<double> frame(fp.n_fft);
    for (std::size_t t = 0; t < frames; ++t) {
        const std::int64_t center = static_cast<std::int64_t>(t * fp.hop);
        for (std::size_t i = 0; i < fp.n_fft; ++i) {
            std::int64_t idx = center - half + static_cast<std::int64_t>(i);
            frame[i] = w.samples[detail::reflect_index(idx, n)] * win[i];
        }
        std::vector<double> power = fft::power_spectrum(frame);
        for (std::size_t m = 0; m < fp.n_mels; ++m) {
            const double* wgt = fb.weights.data() + m * fb.n_bins;
            double acc = 0.0;
            for (std::size_t k = 0; k < fb.n_bins; ++k) acc += wgt[k] * power[k];
            feat.at(t, m) = std::log(acc + fp.log_eps);
        }
    }
    return feat;
}

// --- standardization -----------------------------------------------------------

// Welford accumulator pooled over frames; population convention.
class StandardizationFitter {
public:
    explicit StandardizationFitter(std::size_t bands = 64)
        : bands_(bands), count_(0), mean_(bands, 0.0), m2_(bands, 0.0) {}

    void add(const LogMelFeature& f) {
        if (f.band_count != bands_)
            throw BandMismatch("fit: expected " + std::to_string(bands_) + " bands");
        for (std::size_t t = 0; t < f.frames; ++t) {
            ++count_;
            for (std::size_t b = 0; b < bands_; ++b) {
                double x = f.at(t, b);
                double delta = x - mean_[b];
                mean_[b] += delta / static_cast<double>(count_);
                m2_[b] += delta * (x - mean_[b]);
            }
        }
    }

    StandardizationStats finish(std::string source) const {
        if (count_ == 0) throw NoFrames("fit: no frames seen");
        StandardizationStats s;
        s.source = std::move(source);
        s.mean = mean_;
        s.std.resize(bands_);
        for (std::size_t b = 0; b < bands_; ++b) {
            double var = m2_[b] / static_cast<double>(count_);
            double sd = std::sqrt(std::max(var, 0.0));
            if (sd < StandardizationStats::std_floor) {
                sd = StandardizationStats::std_floor;
                s.clamped_bands.push_back(b);
            }
            s.std[b] = sd;
        }
        return s;
    }

    std::uint64_t frame_count() const { return count_; }

private:
    std::size_t bands_;
    std::uint64_t count_;
    std::vector<double> mean_;
    std::vector<double> m2_;
};

template <typename Iterable>
StandardizationStats fit_standardization(const Iterable& features, std::string source) {
    StandardizationFitter fitter;
    for (const auto& f : features) fitter.add(f);
    return fitter.finish(std::move(source));
}

inline LogMelFeature standardize(LogMelFeature f, const StandardizationStats& s) {
    if (f.standardized) throw AlreadyStandardized("feature is already standardized");
    if (s.mean.size() != f.band_count || s.std.size() != f.band_count)
        throw BandMismatch("stats have " + std::to_string(s.mean.size()) +
                           " bands, feature has " + std::to_string(f.band_count));
    for (std::size_t t = 0; t < f.frames; ++t)
        for (std::size_t b = 0; b < f.band_count; ++b)
            f.at(t, b) = (f.at(t, b) - s.mean[b]) / s.std[b];
    f.standardized = true;
    return f;
}

}  // namespace cdmsc::dsp
