#include "qlab/dsp.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qlab {

namespace {

using std::numbers::pi;

double bessel_i0(double x) {
    // series expansion; converges quickly for the beta values used here
    double sum = 1.0;
    double term = 1.0;
    const double q = x * x / 4.0;
    for (int k = 1; k < 64; ++k) {
        term *= q / (static_cast<double>(k) * k);
        sum += term;
        if (term < sum * 1e-16) break;
    }
    return sum;
}

std::vector<double> kaiser_window(int n, double beta) {
    std::vector<double> w(n);
    const double denom = bessel_i0(beta);
    const double half = (n - 1) / 2.0;
    for (int i = 0; i < n; ++i) {
        const double r = (i - half) / half;
        w[i] = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / denom;
    }
    return w;
}

}  // namespace

std::vector<double> hann_window(int n) {
    if (n < 1) throw std::invalid_argument("window: expected length >= 1");
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        w[i] = 0.5 * (1.0 - std::cos(2.0 * pi * i / n));
    }
    return w;
}

std::vector<double> sqrt_hann_window(int n) {
    auto w = hann_window(n);
    for (double& v : w) v = std::sqrt(v);
    return w;
}

Matrix dct2_matrix(int n) {
    if (n < 1) throw std::invalid_argument("dct: expected size >= 1");
    Matrix d(n, n);
    const double s0 = std::sqrt(1.0 / n);
    const double sk = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k) {
        const double scale = k == 0 ? s0 : sk;
        for (int i = 0; i < n; ++i) {
            d(k, i) = scale * std::cos(pi * (2.0 * i + 1.0) * k / (2.0 * n));
        }
    }
    return d;
}

void fft_inplace(std::vector<std::complex<double>>& buf, bool inverse) {
    const std::size_t n = buf.size();
    if (n == 0 || !std::has_single_bit(n)) {
        throw std::invalid_argument("fft: size must be a power of two");
    }
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(buf[i], buf[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const auto u = buf[i + j];
                const auto v = buf[i + j + len / 2] * w;
                buf[i + j] = u + v;
                buf[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& v : buf) v /= static_cast<double>(n);
    }
}

Matrix stft_magnitude(std::span<const double> audio, int win_len, int fft_size, int hop) {
    if (win_len < 1 || hop < 1 || fft_size < win_len) {
        throw std::invalid_argument("stft: bad framing parameters");
    }
    if (!std::has_single_bit(static_cast<unsigned>(fft_size))) {
        throw std::invalid_argument("stft: fft_size must be a power of two");
    }
    if (audio.size() < static_cast<std::size_t>(win_len)) {
        throw std::invalid_argument("audio: too short for one frame");
    }
    const auto window = hann_window(win_len);
    const std::size_t n_frames = (audio.size() - win_len) / hop + 1;
    const std::size_t n_bins = static_cast<std::size_t>(fft_size) / 2 + 1;
    Matrix mag(n_frames, n_bins);
    std::vector<std::complex<double>> buf(static_cast<std::size_t>(fft_size));
    for (std::size_t t = 0; t < n_frames; ++t) {
        std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
        const std::size_t start = t * hop;
        for (int i = 0; i < win_len; ++i) {
            buf[static_cast<std::size_t>(i)] = audio[start + i] * window[i];
        }
        fft_inplace(buf);
        for (std::size_t k = 0; k < n_bins; ++k) {
            mag(t, k) = std::abs(buf[k]);
        }
    }
    return mag;
}

std::vector<double> resample_rational(std::span<const double> x, int up, int down) {
    if (up < 1 || down < 1) throw std::invalid_argument("resample: factors must be >= 1");
    if (x.empty()) return {};
    if (up == down) return {x.begin(), x.end()};

    constexpr int kTaps = 64;
    constexpr double kBeta = 8.0;
    const auto window = kaiser_window(kTaps, kBeta);

    // lowpass prototype at the upsampled rate; cutoff at the tighter of the
    // input/output Nyquist frequencies
    const double fc = 0.5 / std::max(up, down);
    std::vector<double> h(kTaps);
    const double center = (kTaps - 1) / 2.0;
    double dc = 0.0;
    for (int i = 0; i < kTaps; ++i) {
        const double t = i - center;
        const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * pi * fc * t) / (pi * t);
        h[i] = sinc * window[i];
        dc += h[i];
    }
    for (double& v : h) v = v * up / dc;  // unit DC gain after zero-stuffing

    const std::size_t up_len = x.size() * static_cast<std::size_t>(up);
    const std::size_t out_len = (up_len + down - 1) / static_cast<std::size_t>(down);
    std::vector<double> y(out_len, 0.0);
    for (std::size_t m = 0; m < out_len; ++m) {
        const std::int64_t base = static_cast<std::int64_t>(m) * down;
        double acc = 0.0;
        for (int k = 0; k < kTaps; ++k) {
            const std::int64_t j = base - k;
            if (j < 0) break;
            if (j % up != 0) continue;
            const std::int64_t src = j / up;
            if (src >= static_cast<std::int64_t>(x.size())) continue;
            acc += h[k] * x[static_cast<std::size_t>(src)];
        }
        y[m] = acc;
    }
    return y;
}

}  // namespace qlab
