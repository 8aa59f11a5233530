#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qlab {

// One deterministic speech-like utterance at 16 kHz mono: voiced segments
// with a gliding fundamental (80-300 Hz) and 10 harmonics under a
// formant-like envelope, interleaved with amplitude-modulated noise bursts
// and short silences.
std::vector<double> generate_utterance(std::uint64_t seed, int index, double duration_s);

// Writes `count` WAV files named utt_###.wav under dir and returns their
// paths. Identical seeds produce byte-identical files.
std::vector<std::string> gen_corpus(const std::string& dir, std::uint64_t seed, int count,
                                    double duration_s);

}  // namespace qlab
