#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qlab/codec.hpp"

namespace qlab {

struct TrainOptions {
    double learning_rate = 0.05;
    int epochs = 20;
    int batch_size = 64;
    // the distillation term joins the objective after this many optimizer steps
    int warmup_steps = 200;
    double holdout_fraction = 0.1;
    std::uint64_t seed = 0;
    // defaults to a small seeded Gaussian when absent
    std::optional<Matrix> init_weight;
};

struct TrainResult {
    StudentEncoder student;
    // holdout_loss[0] is the initial weights; one entry per epoch follows
    std::vector<double> holdout_loss;
    int best_epoch = 0;  // 1-based; the returned student is this checkpoint
};

// Gradient descent on lambda_rec * frame MSE + lambda_distill * latent MSE
// with the quantizer passed through as identity (straight-through) and zero
// gradient where the output clamp saturates. The quantizer and decoder of
// teacher_codec stay frozen. Throws if the loss exceeds the divergence
// guard (1e6).
TrainResult train_student(const Codec& teacher_codec,
                          const std::vector<std::vector<double>>& corpus,
                          const LossWeights& weights, const TrainOptions& opts);

// The teacher's end-to-end linear map from a windowed frame to the latent,
// shaped like StudentEncoder::weight.
Matrix teacher_composite_weight(const Codec& teacher_codec);

}  // namespace qlab
