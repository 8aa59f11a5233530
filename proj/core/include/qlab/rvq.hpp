#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qlab/matrix.hpp"

namespace qlab {

struct RvqCodebook {
    Matrix codewords;  // K x D

    int size() const { return static_cast<int>(codewords.rows()); }
    int dim() const { return static_cast<int>(codewords.cols()); }
};

// Ordered codebook stack, coarse first. Codebook q quantizes the residual
// left after codebooks 0..q-1.
struct RvqSpec {
    std::vector<RvqCodebook> codebooks;
    int latent_dim = 0;

    int num_codebooks() const { return static_cast<int>(codebooks.size()); }
};

struct KmeansResult {
    RvqCodebook codebook;
    std::vector<double> sse_history;  // within-cluster SSE after each Lloyd step
    int iterations = 0;
};

// Lloyd iterations from seeded k-means++ initialization. Stops at max_iters
// or when the largest centroid displacement falls below 1e-6. Empty clusters
// are reseeded to the point currently farthest from its centroid.
KmeansResult kmeans_detailed(const Matrix& points, int k, int max_iters, std::uint64_t seed);
RvqCodebook kmeans(const Matrix& points, int k, int max_iters, std::uint64_t seed);

struct RvqTrainResult {
    RvqSpec spec;
    std::vector<double> residual_energy;  // mean ||residual||^2 after stages 1..Q
};

RvqTrainResult train_rvq_detailed(const Matrix& frames, int num_codebooks, int codebook_size,
                                  int max_iters, std::uint64_t seed);
RvqSpec train_rvq(const Matrix& frames, int num_codebooks, int codebook_size, int max_iters,
                  std::uint64_t seed);

// Greedy stage-wise nearest neighbor; ties break toward the lowest index.
std::vector<int> rvq_quantize(const RvqSpec& spec, std::span<const double> x);

// Sum of the selected codewords.
std::vector<double> rvq_dequantize(const RvqSpec& spec, std::span<const int> codes);

// File format: magic "RVQ1", u32 Q, u32 K, u32 D (little-endian), then
// Q*K*D f64 codeword values, row-major coarse-first. Requires a uniform
// codebook size across stages.
void save_rvq(const std::string& path, const RvqSpec& spec);
RvqSpec load_rvq(const std::string& path);

}  // namespace qlab
