#pragma once

#include <span>

#include "qlab/matrix.hpp"

namespace qlab {

// Scale-invariant signal-to-distortion ratio in dB. Both signals are mean
// removed, the estimate is projected onto the reference, and the result is
// clamped to [-60, +60] as a numeric guard (the +60 cap is hit whenever the
// residual is numerically zero, e.g. for any nonzero rescaling of the
// reference).
double si_sdr(std::span<const double> reference, std::span<const double> estimate);

// Classic short-time objective intelligibility. Accepts 10 kHz input
// directly or 16 kHz input (resampled 5/8 with a windowed sinc). Frames more
// than 40 dB below the loudest reference frame are removed before analysis.
double stoi(std::span<const double> reference, std::span<const double> estimate,
            int sample_rate);

struct MelConfig {
    int sample_rate = 16000;
    int fft_size = 1024;
    int hop = 256;
    int mel_bands = 80;
    double fmin = 0.0;
    double fmax = 0.0;  // 0 means sample_rate / 2
    double log_floor = 1e-5;

    double fmax_or_default() const { return fmax > 0.0 ? fmax : sample_rate / 2.0; }
    void validate() const;
};

// Magnitude STFT through a unit-area triangular mel filterbank (HTK mel
// scale), then log10 with a floor. Rows = frames, cols = mel bands.
Matrix mel_spectrogram(std::span<const double> audio, const MelConfig& config);

// Mean squared difference of the two log-mel grids.
double mel_mse(std::span<const double> reference, std::span<const double> estimate,
               const MelConfig& config);

}  // namespace qlab
