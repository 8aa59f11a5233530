#include "qlab/analysis.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qlab {

namespace {

void check_same_shape(const CodeSequence& a, const CodeSequence& b) {
    if (a.frames != b.frames || a.slot_sizes != b.slot_sizes) {
        throw std::invalid_argument("sequences: shape or slot size mismatch");
    }
}

void check_fsq_sequence(const CodeSequence& seq, const FsqSpec& spec) {
    if (seq.slots() != 1 ||
        seq.slot_sizes[0] != static_cast<std::uint32_t>(spec.codebook_size)) {
        throw std::invalid_argument("sequence: not produced by this FSQ spec");
    }
}

}  // namespace

std::int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

double exact_code_agreement(const CodeSequence& a, const CodeSequence& b) {
    check_same_shape(a, b);
    if (a.codes.empty()) throw std::invalid_argument("sequences: empty");
    std::size_t match = 0;
    for (std::size_t i = 0; i < a.codes.size(); ++i) {
        if (a.codes[i] == b.codes[i]) ++match;
    }
    return static_cast<double>(match) / static_cast<double>(a.codes.size());
}

LevelAccuracy level_accuracy(const CodeSequence& a, const CodeSequence& b,
                             const FsqSpec& spec) {
    check_same_shape(a, b);
    check_fsq_sequence(a, spec);
    if (a.frames == 0) throw std::invalid_argument("sequences: empty");
    const int d = spec.dims();
    std::vector<std::int64_t> hits(static_cast<std::size_t>(d), 0);
    for (std::uint32_t t = 0; t < a.frames; ++t) {
        const auto ka = fsq_index_decode(spec, a.code(t, 0));
        const auto kb = fsq_index_decode(spec, b.code(t, 0));
        for (int i = 0; i < d; ++i) {
            if (ka[static_cast<std::size_t>(i)] == kb[static_cast<std::size_t>(i)]) {
                ++hits[static_cast<std::size_t>(i)];
            }
        }
    }
    LevelAccuracy acc;
    acc.per_dim.resize(static_cast<std::size_t>(d));
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
        acc.per_dim[static_cast<std::size_t>(i)] =
            static_cast<double>(hits[static_cast<std::size_t>(i)]) / a.frames;
        sum += acc.per_dim[static_cast<std::size_t>(i)];
    }
    acc.overall = sum / d;
    return acc;
}

double within_level_rate(const CodeSequence& a, const CodeSequence& b, const FsqSpec& spec,
                         int radius) {
    check_same_shape(a, b);
    check_fsq_sequence(a, spec);
    if (radius < 0) throw std::invalid_argument("radius: expected >= 0");
    if (a.frames == 0) throw std::invalid_argument("sequences: empty");
    const int d = spec.dims();
    std::int64_t hits = 0;
    for (std::uint32_t t = 0; t < a.frames; ++t) {
        const auto ka = fsq_index_decode(spec, a.code(t, 0));
        const auto kb = fsq_index_decode(spec, b.code(t, 0));
        for (int i = 0; i < d; ++i) {
            if (std::abs(ka[static_cast<std::size_t>(i)] - kb[static_cast<std::size_t>(i)]) <=
                radius) {
                ++hits;
            }
        }
    }
    return static_cast<double>(hits) / (static_cast<double>(a.frames) * d);
}

ConfusionMatrix level_confusion(const CodeSequence& a, const CodeSequence& b,
                                const FsqSpec& spec, int dim) {
    check_same_shape(a, b);
    check_fsq_sequence(a, spec);
    if (dim < 0 || dim >= spec.dims()) throw std::out_of_range("dim: out of range");
    ConfusionMatrix m;
    m.n = spec.levels[static_cast<std::size_t>(dim)];
    m.counts.assign(static_cast<std::size_t>(m.n) * m.n, 0);
    for (std::uint32_t t = 0; t < a.frames; ++t) {
        const auto ka = fsq_index_decode(spec, a.code(t, 0));
        const auto kb = fsq_index_decode(spec, b.code(t, 0));
        ++m.at(ka[static_cast<std::size_t>(dim)], kb[static_cast<std::size_t>(dim)]);
    }
    return m;
}

CosineStats mean_cosine_similarity(const LatentSequence& a, const LatentSequence& b) {
    if (a.h.rows() != b.h.rows() || a.h.cols() != b.h.cols()) {
        throw std::invalid_argument("latents: shape mismatch");
    }
    CosineStats stats;
    double total = 0.0;
    for (std::size_t t = 0; t < a.h.rows(); ++t) {
        const auto ra = a.h.row(t);
        const auto rb = b.h.row(t);
        double dot = 0.0;
        double na = 0.0;
        double nb = 0.0;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            dot += ra[i] * rb[i];
            na += ra[i] * ra[i];
            nb += rb[i] * rb[i];
        }
        if (na == 0.0 || nb == 0.0) {
            ++stats.skipped;
            continue;
        }
        total += dot / std::sqrt(na * nb);
        ++stats.used;
    }
    if (stats.used == 0) {
        throw std::invalid_argument("latents: all frames degenerate");
    }
    stats.mean = total / static_cast<double>(stats.used);
    return stats;
}

}  // namespace qlab
