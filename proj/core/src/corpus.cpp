#include "qlab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <stdexcept>

#include "qlab/rng.hpp"
#include "qlab/wav.hpp"

namespace qlab {

namespace {

using std::numbers::pi;

constexpr int kRate = 16000;
constexpr int kHarmonics = 10;

struct Formants {
    double f[3];
    double bw[3];

    double gain(double freq) const {
        double g = 0.0;
        for (int j = 0; j < 3; ++j) {
            const double d = (freq - f[j]) / bw[j];
            g += std::exp(-0.5 * d * d);
        }
        return g / (1.0 + freq / 4000.0);  // gentle spectral tilt
    }
};

void add_voiced(std::vector<double>& out, std::size_t start, std::size_t len, Rng& rng,
                const Formants& formants) {
    const double f_a = rng.uniform(80.0, 300.0);
    const double f_b = rng.uniform(80.0, 300.0);
    const double level = rng.uniform(0.12, 0.25);
    const std::size_t ramp = std::min<std::size_t>(len / 4, 160);  // 10 ms fade

    double amp[kHarmonics];
    const double f_mid = 0.5 * (f_a + f_b);
    double norm = 0.0;
    for (int k = 0; k < kHarmonics; ++k) {
        const double fk = f_mid * (k + 1);
        amp[k] = fk < 7600.0 ? formants.gain(fk) / (k + 1) : 0.0;
        norm += 0.5 * amp[k] * amp[k];
    }
    norm = std::sqrt(std::max(norm, 1e-12));

    double phase[kHarmonics] = {};
    for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(len);
        const double f0 = f_a + (f_b - f_a) * u;
        double s = 0.0;
        for (int k = 0; k < kHarmonics; ++k) {
            phase[k] += 2.0 * pi * f0 * (k + 1) / kRate;
            s += amp[k] * std::sin(phase[k]);
        }
        double env = 1.0;
        if (i < ramp) env = static_cast<double>(i) / static_cast<double>(ramp);
        if (len - i <= ramp) env = static_cast<double>(len - i) / static_cast<double>(ramp);
        out[start + i] += level * env * s / norm;
    }
}

void add_burst(std::vector<double>& out, std::size_t start, std::size_t len, Rng& rng) {
    const double level = rng.uniform(0.04, 0.10);
    for (std::size_t i = 0; i < len && start + i < out.size(); ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(len);
        const double env = 0.5 * (1.0 - std::cos(2.0 * pi * u));  // raised-cosine burst
        out[start + i] += level * env * rng.normal();
    }
}

}  // namespace

std::vector<double> generate_utterance(std::uint64_t seed, int index, double duration_s) {
    if (duration_s < 1.0) throw std::invalid_argument("duration: expected >= 1 s");
    Rng rng(mix64(seed ^ mix64(0x75747431ULL + static_cast<std::uint64_t>(index))));
    const std::size_t total = static_cast<std::size_t>(std::llround(duration_s * kRate));
    std::vector<double> out(total, 0.0);

    Formants formants{};
    formants.f[0] = rng.uniform(300.0, 900.0);
    formants.f[1] = rng.uniform(900.0, 2200.0);
    formants.f[2] = rng.uniform(2200.0, 3200.0);
    for (int j = 0; j < 3; ++j) formants.bw[j] = rng.uniform(80.0, 200.0);

    std::size_t at = 0;
    while (at < total) {
        const double kind = rng.next_double();
        std::size_t len;
        if (kind < 0.65) {
            len = static_cast<std::size_t>(rng.uniform(0.20, 0.50) * kRate);
            add_voiced(out, at, std::min(len, total - at), rng, formants);
        } else if (kind < 0.85) {
            len = static_cast<std::size_t>(rng.uniform(0.08, 0.20) * kRate);
            add_burst(out, at, std::min(len, total - at), rng);
        } else {
            len = static_cast<std::size_t>(rng.uniform(0.05, 0.15) * kRate);
        }
        at += len;
    }

    double peak = 0.0;
    for (double v : out) peak = std::max(peak, std::abs(v));
    if (peak > 0.95) {
        const double g = 0.95 / peak;
        for (double& v : out) v *= g;
    }
    return out;
}

std::vector<std::string> gen_corpus(const std::string& dir, std::uint64_t seed, int count,
                                    double duration_s) {
    if (count < 1) throw std::invalid_argument("count: expected >= 1");
    if (duration_s < 1.0) throw std::invalid_argument("duration: expected >= 1 s");
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    paths.reserve(static_cast<std::size_t>(count));
    for (int u = 0; u < count; ++u) {
        char name[32];
        std::snprintf(name, sizeof(name), "utt_%03d.wav", u);
        const std::string path = dir + "/" + name;
        save_wav(path, generate_utterance(seed, u, duration_s));
        paths.push_back(path);
    }
    return paths;
}

}  // namespace qlab
