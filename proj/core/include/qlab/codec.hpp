#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qlab/bitstream.hpp"
#include "qlab/fsq.hpp"
#include "qlab/matrix.hpp"
#include "qlab/rvq.hpp"

namespace qlab {

enum class Bottleneck { fsq, rvq };

// Windowed-DCT analysis/synthesis codec configuration. frame_len must equal
// 2*hop so the square-root Hann pair satisfies constant overlap-add.
struct CodecConfig {
    int sample_rate = 16000;
    int frame_len = 64;
    int hop = 32;
    int dct_keep = 32;
    std::vector<int> fsq_levels = {4, 4, 4, 4, 4, 4, 4, 4};
    Bottleneck bottleneck = Bottleneck::fsq;

    int fsq_dims() const { return static_cast<int>(fsq_levels.size()); }
    void validate() const;
};

// Linear analysis front end: orthonormal PCA basis over retained DCT
// coefficients plus per-dimension normalizers placing +-4 sigma at the
// clamp boundary.
struct TeacherEncoder {
    Matrix pca_basis;               // dct_keep x fsq_dims, orthonormal columns
    std::vector<double> dim_scale;  // fsq_dims entries, strictly positive

    bool fitted() const { return !pca_basis.empty(); }
};

// Direct linear map from a windowed frame to the latent space; the trained
// counterpart of TeacherEncoder with identical output shape.
struct StudentEncoder {
    Matrix weight;  // frame_len x fsq_dims
};

// Pre-quantization encoder outputs, one row per frame.
struct LatentSequence {
    Matrix h;
};

struct LossWeights {
    double lambda_rec = 1.0;
    double lambda_distill = 1.0;
};

// Slices audio into half-overlapping square-root-Hann frames. The signal is
// zero-padded so frame t covers samples [t*hop, t*hop + frame_len) and there
// are ceil(len/hop) frames.
Matrix frame_signal(std::span<const double> audio, const CodecConfig& config);

// Synthesis windowing and overlap-add; returns frames*hop samples.
std::vector<double> overlap_add(const Matrix& frames, const CodecConfig& config);

// DCT-II per frame, first dct_keep coefficients retained. Rows = frames.
Matrix analysis_coefficients(std::span<const double> audio, const CodecConfig& config);

// PCA over retained DCT coefficients of the corpus (uncentered second
// moment, eigenvalue-descending, sign fixed so each basis vector's
// largest-magnitude entry is positive). dim_scale_i = 4 * std of projected
// dimension i. The seed is accepted for interface symmetry with the other
// trainers; the fit itself is deterministic.
TeacherEncoder fit_teacher(const std::vector<std::vector<double>>& corpus,
                           const CodecConfig& config, std::uint64_t seed);

// h[t] = clamp(basis^T c_t / dim_scale, -1, 1)
LatentSequence teacher_encode(const TeacherEncoder& enc, std::span<const double> audio,
                              const CodecConfig& config);

// h[t] = clamp(weight^T f_t, -1, 1) on windowed frames f_t
LatentSequence student_encode(const StudentEncoder& enc, std::span<const double> audio,
                              const CodecConfig& config);

enum class ActiveEncoder { teacher, student };

// Trained codec state: quantizer + decoder plus one or two encoders.
struct Codec {
    CodecConfig config;
    FsqSpec fsq;  // FSQ bottleneck quantizer
    TeacherEncoder teacher;
    std::optional<StudentEncoder> student;
    std::optional<RvqSpec> rvq;  // RVQ bottleneck
    ActiveEncoder active = ActiveEncoder::teacher;
    std::string id = "codec";
};

// Active encoder's pre-quantization latents (FSQ path only).
LatentSequence codec_latents(const Codec& codec, std::span<const double> audio);

// FSQ path: one slot per frame holding the mixed-radix code index.
// RVQ path: one slot per codebook stage quantizing the retained-DCT latent.
CodeSequence codec_encode(const Codec& codec, std::span<const double> audio);

// Inverse path: dequantize, unscale/back-project, zero-pad coefficients,
// inverse DCT, overlap-add. Output length is frames*hop.
std::vector<double> codec_decode(const Codec& codec, const CodeSequence& seq);

// Mean squared difference over all frames and dimensions.
double distillation_loss(const LatentSequence& teacher, const LatentSequence& student);

// File format: magic "NDSK1", config block, teacher matrices, optional
// student matrix, optional embedded "RVQ1" block; floats are f64
// little-endian.
void save_codec(const std::string& path, const Codec& codec);
Codec load_codec(const std::string& path);

}  // namespace qlab
