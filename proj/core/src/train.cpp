#include "qlab/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>

#include "qlab/dsp.hpp"
#include "qlab/rng.hpp"

namespace qlab {

namespace {

constexpr double kDivergenceGuard = 1e6;

struct FrameSet {
    Matrix frames;           // N x frame_len windowed frames
    Matrix teacher_latents;  // N x dims
};

FrameSet collect_frames(const Codec& teacher_codec,
                        const std::vector<std::vector<double>>& corpus) {
    const CodecConfig& cfg = teacher_codec.config;
    std::vector<Matrix> frame_blocks;
    std::vector<LatentSequence> latent_blocks;
    std::size_t total = 0;
    for (const auto& audio : corpus) {
        frame_blocks.push_back(frame_signal(audio, cfg));
        latent_blocks.push_back(teacher_encode(teacher_codec.teacher, audio, cfg));
        total += frame_blocks.back().rows();
    }
    FrameSet set;
    set.frames = Matrix(total, static_cast<std::size_t>(cfg.frame_len));
    set.teacher_latents = Matrix(total, static_cast<std::size_t>(cfg.fsq_dims()));
    std::size_t at = 0;
    for (std::size_t b = 0; b < frame_blocks.size(); ++b) {
        const Matrix& fb = frame_blocks[b];
        const Matrix& lb = latent_blocks[b].h;
        for (std::size_t t = 0; t < fb.rows(); ++t, ++at) {
            std::copy(fb.row(t).begin(), fb.row(t).end(), set.frames.row(at).begin());
            std::copy(lb.row(t).begin(), lb.row(t).end(),
                      set.teacher_latents.row(at).begin());
        }
    }
    return set;
}

// decoder matrix: frame_hat = A * (dim_scale ⊙ v), A = D_keep^T * basis
Matrix decoder_matrix(const Codec& codec) {
    const CodecConfig& cfg = codec.config;
    const Matrix dct = dct2_matrix(cfg.frame_len);
    const int dims = cfg.fsq_dims();
    Matrix a(static_cast<std::size_t>(cfg.frame_len), static_cast<std::size_t>(dims));
    for (int i = 0; i < cfg.frame_len; ++i) {
        for (int j = 0; j < dims; ++j) {
            double acc = 0.0;
            for (int k = 0; k < cfg.dct_keep; ++k) {
                acc += dct(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) *
                       codec.teacher.pca_basis(static_cast<std::size_t>(k),
                                               static_cast<std::size_t>(j));
            }
            a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = acc;
        }
    }
    return a;
}

struct FrameEval {
    double rec_loss = 0.0;
    double distill_loss = 0.0;
};

// forward pass for one frame; fills pre/h/grad workspaces
class StudentObjective {
public:
    StudentObjective(const Codec& codec, const FrameSet& set, const LossWeights& weights)
        : codec_(codec),
          set_(set),
          weights_(weights),
          decoder_(decoder_matrix(codec)),
          frame_len_(codec.config.frame_len),
          dims_(codec.config.fsq_dims()) {}

    // returns the per-frame losses; when grad != nullptr accumulates
    // dL/dW into it (straight-through quantizer, clamp-gated)
    FrameEval evaluate(const Matrix& w, std::size_t frame_idx, bool use_distill,
                       Matrix* grad) {
        const auto f = set_.frames.row(frame_idx);
        const auto ht = set_.teacher_latents.row(frame_idx);
        pre_.assign(static_cast<std::size_t>(dims_), 0.0);
        h_.assign(static_cast<std::size_t>(dims_), 0.0);
        for (int j = 0; j < dims_; ++j) {
            double acc = 0.0;
            for (int i = 0; i < frame_len_; ++i) {
                acc += w(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                       f[static_cast<std::size_t>(i)];
            }
            pre_[static_cast<std::size_t>(j)] = acc;
            h_[static_cast<std::size_t>(j)] = std::clamp(acc, -1.0, 1.0);
        }
        const QuantizedVector q = fsq_quantize(codec_.fsq, h_);

        FrameEval eval;
        rec_err_.assign(static_cast<std::size_t>(frame_len_), 0.0);
        for (int i = 0; i < frame_len_; ++i) {
            double acc = 0.0;
            for (int j = 0; j < dims_; ++j) {
                acc += decoder_(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) *
                       q.values[static_cast<std::size_t>(j)] *
                       codec_.teacher.dim_scale[static_cast<std::size_t>(j)];
            }
            const double e = acc - f[static_cast<std::size_t>(i)];
            rec_err_[static_cast<std::size_t>(i)] = e;
            eval.rec_loss += e * e;
        }
        eval.rec_loss /= static_cast<double>(frame_len_);
        for (int j = 0; j < dims_; ++j) {
            const double d = h_[static_cast<std::size_t>(j)] - ht[static_cast<std::size_t>(j)];
            eval.distill_loss += d * d;
        }
        eval.distill_loss /= static_cast<double>(dims_);

        if (grad != nullptr) {
            for (int j = 0; j < dims_; ++j) {
                if (std::abs(pre_[static_cast<std::size_t>(j)]) > 1.0) continue;  // clamp gate
                double g = 0.0;
                if (weights_.lambda_rec != 0.0) {
                    double back = 0.0;
                    for (int i = 0; i < frame_len_; ++i) {
                        back += decoder_(static_cast<std::size_t>(i),
                                         static_cast<std::size_t>(j)) *
                                rec_err_[static_cast<std::size_t>(i)];
                    }
                    g += weights_.lambda_rec * (2.0 / frame_len_) * back *
                         codec_.teacher.dim_scale[static_cast<std::size_t>(j)];
                }
                if (use_distill && weights_.lambda_distill != 0.0) {
                    g += weights_.lambda_distill * (2.0 / dims_) *
                         (h_[static_cast<std::size_t>(j)] -
                          ht[static_cast<std::size_t>(j)]);
                }
                if (g == 0.0) continue;
                for (int i = 0; i < frame_len_; ++i) {
                    (*grad)(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
                        g * f[static_cast<std::size_t>(i)];
                }
            }
        }
        return eval;
    }

    // full objective (reconstruction + distillation, warmup-independent)
    double total_loss(const Matrix& w, std::span<const std::size_t> indices) {
        double rec = 0.0;
        double dist = 0.0;
        for (std::size_t idx : indices) {
            const FrameEval e = evaluate(w, idx, true, nullptr);
            rec += e.rec_loss;
            dist += e.distill_loss;
        }
        const double n = static_cast<double>(indices.size());
        return weights_.lambda_rec * rec / n + weights_.lambda_distill * dist / n;
    }

private:
    const Codec& codec_;
    const FrameSet& set_;
    LossWeights weights_;
    Matrix decoder_;
    int frame_len_;
    int dims_;
    std::vector<double> pre_;
    std::vector<double> h_;
    std::vector<double> rec_err_;
};

}  // namespace

Matrix teacher_composite_weight(const Codec& teacher_codec) {
    const CodecConfig& cfg = teacher_codec.config;
    const Matrix dct = dct2_matrix(cfg.frame_len);
    const int dims = cfg.fsq_dims();
    Matrix w(static_cast<std::size_t>(cfg.frame_len), static_cast<std::size_t>(dims));
    for (int i = 0; i < cfg.frame_len; ++i) {
        for (int j = 0; j < dims; ++j) {
            double acc = 0.0;
            for (int k = 0; k < cfg.dct_keep; ++k) {
                acc += dct(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) *
                       teacher_codec.teacher.pca_basis(static_cast<std::size_t>(k),
                                                       static_cast<std::size_t>(j));
            }
            w(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
                acc / teacher_codec.teacher.dim_scale[static_cast<std::size_t>(j)];
        }
    }
    return w;
}

TrainResult train_student(const Codec& teacher_codec,
                          const std::vector<std::vector<double>>& corpus,
                          const LossWeights& weights, const TrainOptions& opts) {
    if (!(opts.learning_rate >= 0.0)) throw std::invalid_argument("lr: expected >= 0");
    if (opts.epochs < 1) throw std::invalid_argument("epochs: expected >= 1");
    if (opts.batch_size < 1) throw std::invalid_argument("batch: expected >= 1");
    if (!(weights.lambda_rec >= 0.0 && weights.lambda_distill >= 0.0)) {
        throw std::invalid_argument("loss weights: expected non-negative");
    }
    if (!teacher_codec.teacher.fitted()) {
        throw std::invalid_argument("teacher: not fitted");
    }

    const CodecConfig& cfg = teacher_codec.config;
    const FrameSet set = collect_frames(teacher_codec, corpus);
    const std::size_t n = set.frames.rows();
    if (n < 2) throw std::invalid_argument("corpus: too few frames");

    Rng rng(opts.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const std::size_t n_holdout = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(static_cast<double>(n) * opts.holdout_fraction)));
    std::vector<std::size_t> holdout(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(n_holdout));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_holdout),
                                   order.end());
    if (train.empty()) throw std::invalid_argument("corpus: no training frames left");

    Matrix w;
    if (opts.init_weight) {
        if (opts.init_weight->rows() != static_cast<std::size_t>(cfg.frame_len) ||
            opts.init_weight->cols() != static_cast<std::size_t>(cfg.fsq_dims())) {
            throw std::invalid_argument("init_weight: shape mismatch");
        }
        w = *opts.init_weight;
    } else {
        w = Matrix(static_cast<std::size_t>(cfg.frame_len),
                   static_cast<std::size_t>(cfg.fsq_dims()));
        const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.frame_len));
        for (double& v : w.data()) v = rng.normal() * scale;
    }

    StudentObjective objective(teacher_codec, set, weights);
    TrainResult result;
    result.holdout_loss.push_back(objective.total_loss(w, holdout));
    if (!(result.holdout_loss.back() < kDivergenceGuard)) {
        throw std::runtime_error("training diverged: loss above guard");
    }

    Matrix grad(w.rows(), w.cols());
    Matrix best_w = w;
    double best_loss = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    long long step = 0;

    for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
        rng.shuffle(train);
        for (std::size_t at = 0; at < train.size(); at += opts.batch_size) {
            const std::size_t end = std::min(train.size(), at + opts.batch_size);
            std::fill(grad.data().begin(), grad.data().end(), 0.0);
            const bool use_distill = step >= opts.warmup_steps;
            double batch_loss = 0.0;
            for (std::size_t i = at; i < end; ++i) {
                const FrameEval e = objective.evaluate(w, train[i], use_distill, &grad);
                batch_loss += weights.lambda_rec * e.rec_loss;
                if (use_distill) batch_loss += weights.lambda_distill * e.distill_loss;
            }
            const double inv = 1.0 / static_cast<double>(end - at);
            batch_loss *= inv;
            if (!(batch_loss < kDivergenceGuard) || !std::isfinite(batch_loss)) {
                throw std::runtime_error("training diverged: loss above guard");
            }
            for (std::size_t i = 0; i < w.data().size(); ++i) {
                w.data()[i] -= opts.learning_rate * grad.data()[i] * inv;
            }
            ++step;
        }
        const double hold = objective.total_loss(w, holdout);
        if (!(hold < kDivergenceGuard) || !std::isfinite(hold)) {
            throw std::runtime_error("training diverged: loss above guard");
        }
        result.holdout_loss.push_back(hold);
        if (hold < best_loss) {
            best_loss = hold;
            best_w = w;
            best_epoch = epoch;
        }
    }
    result.student = StudentEncoder{std::move(best_w)};
    result.best_epoch = best_epoch;
    return result;
}

}  // namespace qlab
