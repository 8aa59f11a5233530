#pragma once

#include <span>
#include <string>
#include <vector>

namespace qlab {

// Strict loader: RIFF/WAVE, PCM16, mono, 16000 Hz exactly. Samples are
// scaled to [-1, 1) by division by 32768. Errors name the offending
// property.
std::vector<double> load_wav(const std::string& path);

// Inverse of load_wav: scale by 32768, round half away from zero, clip to
// the 16-bit range.
void save_wav(const std::string& path, std::span<const double> audio);

inline constexpr int kWavSampleRate = 16000;

}  // namespace qlab
