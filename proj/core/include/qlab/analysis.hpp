#pragma once

#include <cstdint>
#include <vector>

#include "qlab/bitstream.hpp"
#include "qlab/codec.hpp"
#include "qlab/fsq.hpp"

namespace qlab {

// Level-vs-level counts for one implicit codebook: rows index encoder A's
// level, columns encoder B's.
struct ConfusionMatrix {
    int n = 0;
    std::vector<std::int64_t> counts;  // n x n, row-major

    std::int64_t at(int a, int b) const {
        return counts[static_cast<std::size_t>(a) * n + b];
    }
    std::int64_t& at(int a, int b) {
        return counts[static_cast<std::size_t>(a) * n + b];
    }
    std::int64_t total() const;
};

// Fraction of (frame, slot) positions with equal codes.
double exact_code_agreement(const CodeSequence& a, const CodeSequence& b);

struct LevelAccuracy {
    std::vector<double> per_dim;
    double overall = 0.0;
};

// Decode each code to its level tuple and compare element-wise.
LevelAccuracy level_accuracy(const CodeSequence& a, const CodeSequence& b,
                             const FsqSpec& spec);

// Fraction of (frame, dim) positions with |k_a - k_b| <= radius.
double within_level_rate(const CodeSequence& a, const CodeSequence& b, const FsqSpec& spec,
                         int radius = 1);

ConfusionMatrix level_confusion(const CodeSequence& a, const CodeSequence& b,
                                const FsqSpec& spec, int dim);

struct CosineStats {
    double mean = 0.0;       // over frames where both norms are nonzero
    std::int64_t used = 0;
    std::int64_t skipped = 0;  // zero-norm frames excluded from the mean
};

CosineStats mean_cosine_similarity(const LatentSequence& a, const LatentSequence& b);

}  // namespace qlab
