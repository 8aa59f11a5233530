#pragma once

#include <complex>
#include <span>
#include <vector>

#include "qlab/matrix.hpp"

namespace qlab {

// Periodic Hann window: 0.5 * (1 - cos(2*pi*n/N)).
std::vector<double> hann_window(int n);

// Square root of the periodic Hann window. At 50% overlap the analysis and
// synthesis product satisfies constant overlap-add exactly.
std::vector<double> sqrt_hann_window(int n);

// Orthonormal DCT-II matrix: rows are basis vectors, so coeffs = D * frame
// and frame = D^T * coeffs.
Matrix dct2_matrix(int n);

// In-place radix-2 complex FFT; size must be a power of two. The forward
// transform is unnormalized, the inverse divides by the size.
void fft_inplace(std::vector<std::complex<double>>& buf, bool inverse = false);

// One-sided magnitude STFT with a periodic Hann window of win_len samples,
// zero-padded to fft_size. Frame t starts at t*hop; returns
// frames x (fft_size/2 + 1).
Matrix stft_magnitude(std::span<const double> audio, int win_len, int fft_size, int hop);

// Rational resampler: zero-stuff by `up`, windowed-sinc lowpass
// (Kaiser beta = 8, 64 taps), keep every `down`-th sample.
std::vector<double> resample_rational(std::span<const double> x, int up, int down);

}  // namespace qlab
