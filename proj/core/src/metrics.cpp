#include "qlab/metrics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qlab/dsp.hpp"

namespace qlab {

namespace {

constexpr double kSiSdrCap = 60.0;

double mean_of(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v;
    return acc / static_cast<double>(x.size());
}

}  // namespace

double si_sdr(std::span<const double> reference, std::span<const double> estimate) {
    if (reference.size() != estimate.size()) {
        throw std::invalid_argument("signals: length mismatch");
    }
    if (reference.empty()) throw std::invalid_argument("signals: empty");
    const double mr = mean_of(reference);
    const double me = mean_of(estimate);
    double ref_energy = 0.0;
    double dot = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double r = reference[i] - mr;
        const double e = estimate[i] - me;
        ref_energy += r * r;
        dot += e * r;
    }
    if (ref_energy == 0.0) {
        throw std::invalid_argument("reference: zero signal after mean removal");
    }
    const double alpha = dot / ref_energy;
    double target = 0.0;
    double residual = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double r = alpha * (reference[i] - mr);
        const double d = r - (estimate[i] - me);
        target += r * r;
        residual += d * d;
    }
    if (residual == 0.0) return kSiSdrCap;
    if (target == 0.0) return -kSiSdrCap;
    const double value = 10.0 * std::log10(target / residual);
    return std::clamp(value, -kSiSdrCap, kSiSdrCap);
}

namespace {

// --- STOI internals -------------------------------------------------------

constexpr int kStoiRate = 10000;
constexpr int kStoiFrame = 256;
constexpr int kStoiHop = 128;
constexpr int kStoiFft = 512;
constexpr int kStoiBands = 15;
constexpr double kStoiLowestBand = 150.0;
constexpr int kStoiSegment = 30;
constexpr double kStoiDynRange = 40.0;
constexpr double kStoiBeta = -15.0;  // clipping level in dB

struct BandMap {
    // [first_bin, last_bin) per band over the one-sided 512-point spectrum
    std::array<std::pair<int, int>, kStoiBands> bins;
};

BandMap third_octave_bands() {
    BandMap map{};
    const int n_bins = kStoiFft / 2 + 1;
    auto nearest_bin = [&](double f) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n_bins; ++k) {
            const double fk = static_cast<double>(k) * kStoiRate / kStoiFft;
            const double d = (fk - f) * (fk - f);
            if (d < best_d) {
                best_d = d;
                best = k;
            }
        }
        return best;
    };
    for (int b = 0; b < kStoiBands; ++b) {
        const double cf = std::pow(2.0, b / 3.0) * kStoiLowestBand;
        const double fl = cf / std::pow(2.0, 1.0 / 6.0);
        const double fr = cf * std::pow(2.0, 1.0 / 6.0);
        map.bins[static_cast<std::size_t>(b)] = {nearest_bin(fl), nearest_bin(fr)};
    }
    return map;
}

// Drop frames more than dyn_range dB below the loudest reference frame and
// overlap-add the survivors back together (Hann window, 50% overlap).
std::pair<std::vector<double>, std::vector<double>> remove_silent_frames(
    std::span<const double> x, std::span<const double> y) {
    const auto w = hann_window(kStoiFrame);
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + kStoiFrame <= x.size(); s += kStoiHop) starts.push_back(s);
    if (starts.empty()) return {{}, {}};

    std::vector<double> level(starts.size());
    double max_level = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < starts.size(); ++j) {
        double energy = 0.0;
        for (int i = 0; i < kStoiFrame; ++i) {
            const double v = x[starts[j] + static_cast<std::size_t>(i)] * w[i];
            energy += v * v;
        }
        level[j] = 10.0 * std::log10(energy / kStoiFrame + 1e-300);
        max_level = std::max(max_level, level[j]);
    }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < starts.size(); ++j) {
        if (level[j] - max_level + kStoiDynRange > 0.0) kept.push_back(j);
    }
    if (kept.empty()) return {{}, {}};

    const std::size_t out_len = (kept.size() - 1) * kStoiHop + kStoiFrame;
    std::vector<double> xs(out_len, 0.0);
    std::vector<double> ys(out_len, 0.0);
    for (std::size_t o = 0; o < kept.size(); ++o) {
        const std::size_t src = starts[kept[o]];
        const std::size_t dst = o * kStoiHop;
        for (int i = 0; i < kStoiFrame; ++i) {
            xs[dst + static_cast<std::size_t>(i)] += x[src + static_cast<std::size_t>(i)] * w[i];
            ys[dst + static_cast<std::size_t>(i)] += y[src + static_cast<std::size_t>(i)] * w[i];
        }
    }
    return {std::move(xs), std::move(ys)};
}

// band-energy decomposition: bands x frames
Matrix band_energies(std::span<const double> audio, const BandMap& map) {
    const Matrix mag = stft_magnitude(audio, kStoiFrame, kStoiFft, kStoiHop);
    Matrix bands(kStoiBands, mag.rows());
    for (std::size_t t = 0; t < mag.rows(); ++t) {
        for (int b = 0; b < kStoiBands; ++b) {
            const auto [lo, hi] = map.bins[static_cast<std::size_t>(b)];
            double acc = 0.0;
            for (int k = lo; k < hi; ++k) {
                const double m = mag(t, static_cast<std::size_t>(k));
                acc += m * m;
            }
            bands(static_cast<std::size_t>(b), t) = std::sqrt(acc);
        }
    }
    return bands;
}

double segment_correlation(std::span<const double> a, std::span<const double> b) {
    const double ma = mean_of(a);
    const double mb = mean_of(b);
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        dot += da * db;
        na += da * da;
        nb += db * db;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

}  // namespace

double stoi(std::span<const double> reference, std::span<const double> estimate,
            int sample_rate) {
    if (reference.size() != estimate.size()) {
        throw std::invalid_argument("signals: length mismatch");
    }
    std::vector<double> ref10;
    std::vector<double> est10;
    if (sample_rate == kStoiRate) {
        ref10.assign(reference.begin(), reference.end());
        est10.assign(estimate.begin(), estimate.end());
    } else if (sample_rate == 16000) {
        ref10 = resample_rational(reference, 5, 8);
        est10 = resample_rational(estimate, 5, 8);
    } else {
        throw std::invalid_argument("sample_rate: unsupported by resampler (use 16000 or 10000)");
    }

    auto [xs, ys] = remove_silent_frames(ref10, est10);
    const std::size_t min_len =
        static_cast<std::size_t>(kStoiSegment - 1) * kStoiHop + kStoiFrame;
    if (xs.size() < min_len) {
        throw std::invalid_argument("signal: too short after silence removal");
    }

    const BandMap map = third_octave_bands();
    const Matrix x_bands = band_energies(xs, map);
    const Matrix y_bands = band_energies(ys, map);
    const std::size_t n_frames = x_bands.cols();
    if (n_frames < kStoiSegment) {
        throw std::invalid_argument("signal: too short after silence removal");
    }

    const double clip_gain = std::pow(10.0, -kStoiBeta / 20.0);
    double total = 0.0;
    std::size_t count = 0;
    std::vector<double> xw(kStoiSegment);
    std::vector<double> yw(kStoiSegment);
    for (std::size_t m = kStoiSegment; m <= n_frames; ++m) {
        for (int b = 0; b < kStoiBands; ++b) {
            double ex = 0.0;
            double ey = 0.0;
            for (int i = 0; i < kStoiSegment; ++i) {
                const std::size_t t = m - kStoiSegment + static_cast<std::size_t>(i);
                xw[static_cast<std::size_t>(i)] = x_bands(static_cast<std::size_t>(b), t);
                yw[static_cast<std::size_t>(i)] = y_bands(static_cast<std::size_t>(b), t);
                ex += xw[static_cast<std::size_t>(i)] * xw[static_cast<std::size_t>(i)];
                ey += yw[static_cast<std::size_t>(i)] * yw[static_cast<std::size_t>(i)];
            }
            const double alpha = ey > 0.0 ? std::sqrt(ex / ey) : 0.0;
            for (int i = 0; i < kStoiSegment; ++i) {
                const double bound =
                    xw[static_cast<std::size_t>(i)] * (1.0 + clip_gain);
                yw[static_cast<std::size_t>(i)] =
                    std::min(alpha * yw[static_cast<std::size_t>(i)], bound);
            }
            total += segment_correlation(xw, yw);
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

void MelConfig::validate() const {
    if (sample_rate < 1) throw std::invalid_argument("sample_rate: expected >= 1");
    if (!std::has_single_bit(static_cast<unsigned>(fft_size))) {
        throw std::invalid_argument("fft_size: expected power of two");
    }
    if (hop < 1) throw std::invalid_argument("hop: expected >= 1");
    if (mel_bands < 1) throw std::invalid_argument("mel_bands: expected >= 1");
    if (!(fmin < fmax_or_default())) throw std::invalid_argument("fmin: expected < fmax");
    if (!(log_floor > 0.0)) throw std::invalid_argument("log_floor: expected > 0");
}

namespace {

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// unit-area triangular filters on the HTK mel scale; mel_bands x bins
Matrix mel_filterbank(const MelConfig& config) {
    const int n_bins = config.fft_size / 2 + 1;
    const double mel_lo = hz_to_mel(config.fmin);
    const double mel_hi = hz_to_mel(config.fmax_or_default());
    std::vector<double> edges(static_cast<std::size_t>(config.mel_bands) + 2);
    for (std::size_t b = 0; b < edges.size(); ++b) {
        edges[b] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<double>(b) /
                                          (config.mel_bands + 1));
    }
    Matrix fb(static_cast<std::size_t>(config.mel_bands), static_cast<std::size_t>(n_bins));
    for (int b = 0; b < config.mel_bands; ++b) {
        const double left = edges[static_cast<std::size_t>(b)];
        const double center = edges[static_cast<std::size_t>(b) + 1];
        const double right = edges[static_cast<std::size_t>(b) + 2];
        const double area_norm = 2.0 / (right - left);
        for (int k = 0; k < n_bins; ++k) {
            const double f = static_cast<double>(k) * config.sample_rate / config.fft_size;
            double w = 0.0;
            if (f > left && f < center) {
                w = (f - left) / (center - left);
            } else if (f >= center && f < right) {
                w = (right - f) / (right - center);
            }
            fb(static_cast<std::size_t>(b), static_cast<std::size_t>(k)) = w * area_norm;
        }
    }
    return fb;
}

}  // namespace

Matrix mel_spectrogram(std::span<const double> audio, const MelConfig& config) {
    config.validate();
    if (audio.size() < static_cast<std::size_t>(config.fft_size)) {
        throw std::invalid_argument("audio: too short for one analysis frame");
    }
    const Matrix mag = stft_magnitude(audio, config.fft_size, config.fft_size, config.hop);
    const Matrix fb = mel_filterbank(config);
    Matrix out(mag.rows(), static_cast<std::size_t>(config.mel_bands));
    for (std::size_t t = 0; t < mag.rows(); ++t) {
        for (int b = 0; b < config.mel_bands; ++b) {
            double acc = 0.0;
            const auto w = fb.row(static_cast<std::size_t>(b));
            const auto m = mag.row(t);
            for (std::size_t k = 0; k < m.size(); ++k) acc += w[k] * m[k];
            out(t, static_cast<std::size_t>(b)) = std::log10(std::max(acc, config.log_floor));
        }
    }
    return out;
}

double mel_mse(std::span<const double> reference, std::span<const double> estimate,
               const MelConfig& config) {
    if (reference.size() != estimate.size()) {
        throw std::invalid_argument("signals: length mismatch");
    }
    const Matrix a = mel_spectrogram(reference, config);
    const Matrix b = mel_spectrogram(estimate, config);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.data().size());
}

}  // namespace qlab
