#include "qlab/codec.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "binary_io.hpp"
#include "qlab/dsp.hpp"

namespace qlab {

namespace {

void check_audio(std::span<const double> audio) {
    if (audio.empty()) throw std::invalid_argument("audio: empty");
    for (double v : audio) {
        if (!std::isfinite(v)) throw std::invalid_argument("audio: non-finite sample");
    }
}

// first dct_keep rows of the orthonormal DCT-II matrix
Matrix retained_dct_rows(const CodecConfig& config) {
    Matrix d = dct2_matrix(config.frame_len);
    Matrix keep(static_cast<std::size_t>(config.dct_keep),
                static_cast<std::size_t>(config.frame_len));
    for (int k = 0; k < config.dct_keep; ++k) {
        auto src = d.row(static_cast<std::size_t>(k));
        std::copy(src.begin(), src.end(), keep.row(static_cast<std::size_t>(k)).begin());
    }
    return keep;
}

LatentSequence project_frames(const Matrix& frames, const TeacherEncoder& enc,
                              const CodecConfig& config) {
    const Matrix dct = retained_dct_rows(config);
    const int dims = config.fsq_dims();
    LatentSequence out;
    out.h = Matrix(frames.rows(), static_cast<std::size_t>(dims));
    std::vector<double> coeff(static_cast<std::size_t>(config.dct_keep));
    for (std::size_t t = 0; t < frames.rows(); ++t) {
        const auto f = frames.row(t);
        for (int k = 0; k < config.dct_keep; ++k) {
            double acc = 0.0;
            const auto row = dct.row(static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < f.size(); ++i) acc += row[i] * f[i];
            coeff[static_cast<std::size_t>(k)] = acc;
        }
        for (int j = 0; j < dims; ++j) {
            double acc = 0.0;
            for (int k = 0; k < config.dct_keep; ++k) {
                acc += enc.pca_basis(static_cast<std::size_t>(k), static_cast<std::size_t>(j)) *
                       coeff[static_cast<std::size_t>(k)];
            }
            out.h(t, static_cast<std::size_t>(j)) =
                std::clamp(acc / enc.dim_scale[static_cast<std::size_t>(j)], -1.0, 1.0);
        }
    }
    return out;
}

}  // namespace

void CodecConfig::validate() const {
    if (sample_rate < 1) throw std::invalid_argument("sample_rate: expected >= 1");
    if (hop < 1) throw std::invalid_argument("hop: expected >= 1");
    if (frame_len != 2 * hop) {
        throw std::invalid_argument("frame_len: expected 2*hop for overlap-add");
    }
    if (dct_keep < 1 || dct_keep > frame_len) {
        throw std::invalid_argument("dct_keep: expected in [1, frame_len]");
    }
    if (fsq_levels.empty() || fsq_dims() > dct_keep) {
        throw std::invalid_argument("fsq_levels: expected 1..dct_keep dimensions");
    }
}

Matrix frame_signal(std::span<const double> audio, const CodecConfig& config) {
    config.validate();
    check_audio(audio);
    const auto window = sqrt_hann_window(config.frame_len);
    const std::size_t hop = static_cast<std::size_t>(config.hop);
    const std::size_t n_frames = (audio.size() + hop - 1) / hop;
    Matrix frames(n_frames, static_cast<std::size_t>(config.frame_len));
    for (std::size_t t = 0; t < n_frames; ++t) {
        for (int i = 0; i < config.frame_len; ++i) {
            const std::size_t s = t * hop + static_cast<std::size_t>(i);
            const double x = s < audio.size() ? audio[s] : 0.0;
            frames(t, static_cast<std::size_t>(i)) = x * window[i];
        }
    }
    return frames;
}

std::vector<double> overlap_add(const Matrix& frames, const CodecConfig& config) {
    config.validate();
    if (frames.cols() != static_cast<std::size_t>(config.frame_len)) {
        throw std::invalid_argument("frames: expected frame_len columns");
    }
    const auto window = sqrt_hann_window(config.frame_len);
    const std::size_t hop = static_cast<std::size_t>(config.hop);
    std::vector<double> out(frames.rows() * hop, 0.0);
    const std::size_t full = frames.rows() * hop + (config.frame_len - hop);
    std::vector<double> acc(full, 0.0);
    for (std::size_t t = 0; t < frames.rows(); ++t) {
        const auto f = frames.row(t);
        for (int i = 0; i < config.frame_len; ++i) {
            acc[t * hop + static_cast<std::size_t>(i)] += f[i] * window[i];
        }
    }
    std::copy(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(out.size()), out.begin());
    return out;
}

Matrix analysis_coefficients(std::span<const double> audio, const CodecConfig& config) {
    const Matrix frames = frame_signal(audio, config);
    const Matrix dct = retained_dct_rows(config);
    Matrix coeffs(frames.rows(), static_cast<std::size_t>(config.dct_keep));
    for (std::size_t t = 0; t < frames.rows(); ++t) {
        const auto f = frames.row(t);
        for (int k = 0; k < config.dct_keep; ++k) {
            double acc = 0.0;
            const auto row = dct.row(static_cast<std::size_t>(k));
            for (std::size_t i = 0; i < f.size(); ++i) acc += row[i] * f[i];
            coeffs(t, static_cast<std::size_t>(k)) = acc;
        }
    }
    return coeffs;
}

TeacherEncoder fit_teacher(const std::vector<std::vector<double>>& corpus,
                           const CodecConfig& config, std::uint64_t seed) {
    (void)seed;
    config.validate();
    std::vector<Matrix> per_utt;
    std::size_t total_frames = 0;
    for (const auto& audio : corpus) {
        per_utt.push_back(analysis_coefficients(audio, config));
        total_frames += per_utt.back().rows();
    }
    if (total_frames < static_cast<std::size_t>(10 * config.dct_keep)) {
        throw std::invalid_argument("corpus: expected at least 10*dct_keep frames");
    }

    const int d = config.dct_keep;
    const int dims = config.fsq_dims();

    // uncentered second moment, so zero audio projects to zero latents
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d, d);
    for (const auto& coeffs : per_utt) {
        for (std::size_t t = 0; t < coeffs.rows(); ++t) {
            Eigen::Map<const Eigen::VectorXd> c(coeffs.row(t).data(), d);
            s.noalias() += c * c.transpose();
        }
    }
    s /= static_cast<double>(total_frames);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
    if (eig.info() != Eigen::Success) {
        throw std::runtime_error("covariance: eigendecomposition failed");
    }
    // eigenvalues come out ascending; take the top `dims` in descending order
    const auto& evals = eig.eigenvalues();
    const auto& evecs = eig.eigenvectors();
    const double lambda_max = std::max(evals(d - 1), 0.0);
    TeacherEncoder enc;
    enc.pca_basis = Matrix(static_cast<std::size_t>(d), static_cast<std::size_t>(dims));
    for (int j = 0; j < dims; ++j) {
        const int src = d - 1 - j;
        if (evals(src) <= lambda_max * 1e-12 || evals(src) <= 0.0) {
            throw std::runtime_error("covariance: rank below fsq dimension count");
        }
        Eigen::VectorXd v = evecs.col(src);
        // deterministic sign: largest-magnitude entry positive
        int arg = 0;
        for (int k = 1; k < d; ++k) {
            if (std::abs(v(k)) > std::abs(v(arg))) arg = k;
        }
        if (v(arg) < 0.0) v = -v;
        for (int k = 0; k < d; ++k) {
            enc.pca_basis(static_cast<std::size_t>(k), static_cast<std::size_t>(j)) = v(k);
        }
    }

    // per-dimension spread of the projections
    std::vector<double> sum(static_cast<std::size_t>(dims), 0.0);
    std::vector<double> sum_sq(static_cast<std::size_t>(dims), 0.0);
    for (const auto& coeffs : per_utt) {
        for (std::size_t t = 0; t < coeffs.rows(); ++t) {
            const auto c = coeffs.row(t);
            for (int j = 0; j < dims; ++j) {
                double p = 0.0;
                for (int k = 0; k < d; ++k) {
                    p += enc.pca_basis(static_cast<std::size_t>(k),
                                       static_cast<std::size_t>(j)) *
                         c[static_cast<std::size_t>(k)];
                }
                sum[static_cast<std::size_t>(j)] += p;
                sum_sq[static_cast<std::size_t>(j)] += p * p;
            }
        }
    }
    enc.dim_scale.resize(static_cast<std::size_t>(dims));
    for (int j = 0; j < dims; ++j) {
        const double mean = sum[static_cast<std::size_t>(j)] / static_cast<double>(total_frames);
        const double var =
            sum_sq[static_cast<std::size_t>(j)] / static_cast<double>(total_frames) -
            mean * mean;
        const double sd = std::sqrt(std::max(var, 0.0));
        if (!(sd > 0.0)) {
            throw std::runtime_error("covariance: degenerate projected dimension");
        }
        enc.dim_scale[static_cast<std::size_t>(j)] = 4.0 * sd;
    }
    return enc;
}

LatentSequence teacher_encode(const TeacherEncoder& enc, std::span<const double> audio,
                              const CodecConfig& config) {
    if (!enc.fitted()) throw std::invalid_argument("encoder: not fitted");
    return project_frames(frame_signal(audio, config), enc, config);
}

LatentSequence student_encode(const StudentEncoder& enc, std::span<const double> audio,
                              const CodecConfig& config) {
    const Matrix frames = frame_signal(audio, config);
    if (enc.weight.rows() != static_cast<std::size_t>(config.frame_len) ||
        enc.weight.cols() != static_cast<std::size_t>(config.fsq_dims())) {
        throw std::invalid_argument("student: weight shape mismatch");
    }
    LatentSequence out;
    out.h = Matrix(frames.rows(), enc.weight.cols());
    for (std::size_t t = 0; t < frames.rows(); ++t) {
        const auto f = frames.row(t);
        for (std::size_t j = 0; j < enc.weight.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) acc += enc.weight(i, j) * f[i];
            out.h(t, j) = std::clamp(acc, -1.0, 1.0);
        }
    }
    return out;
}

LatentSequence codec_latents(const Codec& codec, std::span<const double> audio) {
    if (codec.config.bottleneck != Bottleneck::fsq) {
        throw std::invalid_argument("latents: FSQ path only");
    }
    if (codec.active == ActiveEncoder::student) {
        if (!codec.student) throw std::invalid_argument("codec: no student encoder");
        return student_encode(*codec.student, audio, codec.config);
    }
    return teacher_encode(codec.teacher, audio, codec.config);
}

CodeSequence codec_encode(const Codec& codec, std::span<const double> audio) {
    codec.config.validate();
    CodeSequence seq;
    seq.quantizer_id = codec.id;
    if (codec.config.bottleneck == Bottleneck::fsq) {
        const LatentSequence lat = codec_latents(codec, audio);
        seq.frames = static_cast<std::uint32_t>(lat.h.rows());
        seq.slot_sizes = {static_cast<std::uint32_t>(codec.fsq.codebook_size)};
        seq.codes.resize(lat.h.rows());
        for (std::size_t t = 0; t < lat.h.rows(); ++t) {
            const QuantizedVector q = fsq_quantize(codec.fsq, lat.h.row(t));
            seq.codes[t] = static_cast<std::uint32_t>(fsq_index_encode(codec.fsq, q.levels));
        }
        return seq;
    }
    if (!codec.rvq) throw std::invalid_argument("codec: RVQ spec not trained");
    const Matrix coeffs = analysis_coefficients(audio, codec.config);
    const auto& rvq = *codec.rvq;
    const std::uint32_t q_count = static_cast<std::uint32_t>(rvq.num_codebooks());
    seq.frames = static_cast<std::uint32_t>(coeffs.rows());
    seq.slot_sizes.resize(q_count);
    for (std::uint32_t q = 0; q < q_count; ++q) {
        seq.slot_sizes[q] = static_cast<std::uint32_t>(rvq.codebooks[q].size());
    }
    seq.codes.resize(coeffs.rows() * q_count);
    for (std::size_t t = 0; t < coeffs.rows(); ++t) {
        const auto codes = rvq_quantize(rvq, coeffs.row(t));
        for (std::uint32_t q = 0; q < q_count; ++q) {
            seq.codes[t * q_count + q] = static_cast<std::uint32_t>(codes[q]);
        }
    }
    return seq;
}

std::vector<double> codec_decode(const Codec& codec, const CodeSequence& seq) {
    codec.config.validate();
    const CodecConfig& cfg = codec.config;
    const Matrix dct = retained_dct_rows(cfg);
    Matrix frames(seq.frames, static_cast<std::size_t>(cfg.frame_len));
    std::vector<double> coeff(static_cast<std::size_t>(cfg.dct_keep), 0.0);

    const bool fsq_path = cfg.bottleneck == Bottleneck::fsq;
    if (fsq_path) {
        if (seq.slots() != 1 ||
            seq.slot_sizes[0] != static_cast<std::uint32_t>(codec.fsq.codebook_size)) {
            throw std::invalid_argument("codes: slot shape mismatch for FSQ codec");
        }
    } else {
        if (!codec.rvq) throw std::invalid_argument("codec: RVQ spec not trained");
        if (seq.slots() != static_cast<std::uint32_t>(codec.rvq->num_codebooks())) {
            throw std::invalid_argument("codes: slot shape mismatch for RVQ codec");
        }
        for (std::uint32_t q = 0; q < seq.slots(); ++q) {
            if (seq.slot_sizes[q] != static_cast<std::uint32_t>(codec.rvq->codebooks[q].size())) {
                throw std::invalid_argument("codes: slot size mismatch for RVQ codec");
            }
        }
    }

    const int dims = cfg.fsq_dims();
    std::vector<int> levels_buf;
    std::vector<int> rvq_codes(seq.slots());
    for (std::uint32_t t = 0; t < seq.frames; ++t) {
        std::fill(coeff.begin(), coeff.end(), 0.0);
        if (fsq_path) {
            levels_buf = fsq_index_decode(codec.fsq, seq.code(t, 0));
            const auto v = fsq_dequantize(codec.fsq, levels_buf);
            // unscale then back-project through the orthonormal basis
            for (int k = 0; k < cfg.dct_keep; ++k) {
                double acc = 0.0;
                for (int j = 0; j < dims; ++j) {
                    acc += codec.teacher.pca_basis(static_cast<std::size_t>(k),
                                                   static_cast<std::size_t>(j)) *
                           (v[static_cast<std::size_t>(j)] *
                            codec.teacher.dim_scale[static_cast<std::size_t>(j)]);
                }
                coeff[static_cast<std::size_t>(k)] = acc;
            }
        } else {
            for (std::uint32_t s = 0; s < seq.slots(); ++s) {
                rvq_codes[s] = static_cast<int>(seq.code(t, s));
            }
            const auto c = rvq_dequantize(*codec.rvq, rvq_codes);
            std::copy(c.begin(), c.end(), coeff.begin());
        }
        // zero-padded inverse DCT: frame = D_keep^T * coeff
        auto f = frames.row(t);
        for (int i = 0; i < cfg.frame_len; ++i) {
            double acc = 0.0;
            for (int k = 0; k < cfg.dct_keep; ++k) {
                acc += dct(static_cast<std::size_t>(k), static_cast<std::size_t>(i)) *
                       coeff[static_cast<std::size_t>(k)];
            }
            f[static_cast<std::size_t>(i)] = acc;
        }
    }
    return overlap_add(frames, cfg);
}

double distillation_loss(const LatentSequence& teacher, const LatentSequence& student) {
    if (teacher.h.rows() != student.h.rows() || teacher.h.cols() != student.h.cols()) {
        throw std::invalid_argument("latents: shape mismatch");
    }
    if (teacher.h.empty()) throw std::invalid_argument("latents: empty");
    double acc = 0.0;
    const auto& a = teacher.h.data();
    const auto& b = student.h.data();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.size());
}

namespace {

void write_matrix(std::ostream& os, const Matrix& m) {
    for (double v : m.data()) detail::write_f64(os, v);
}

Matrix read_matrix(std::istream& is, std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (double& v : m.data()) v = detail::read_f64(is);
    return m;
}

}  // namespace

void save_codec(const std::string& path, const Codec& codec) {
    codec.config.validate();
    auto os = detail::open_out(path);
    detail::write_magic(os, "NDSK1");
    const CodecConfig& cfg = codec.config;
    detail::write_u32(os, static_cast<std::uint32_t>(cfg.sample_rate));
    detail::write_u32(os, static_cast<std::uint32_t>(cfg.frame_len));
    detail::write_u32(os, static_cast<std::uint32_t>(cfg.hop));
    detail::write_u32(os, static_cast<std::uint32_t>(cfg.dct_keep));
    detail::write_u8(os, cfg.bottleneck == Bottleneck::fsq ? 0 : 1);
    detail::write_u32(os, static_cast<std::uint32_t>(cfg.fsq_levels.size()));
    for (int n : cfg.fsq_levels) detail::write_u32(os, static_cast<std::uint32_t>(n));
    detail::write_u8(os, codec.active == ActiveEncoder::teacher ? 0 : 1);
    detail::write_u16(os, static_cast<std::uint16_t>(codec.id.size()));
    os.write(codec.id.data(), static_cast<std::streamsize>(codec.id.size()));

    std::uint8_t flags = 0;
    if (codec.teacher.fitted()) flags |= 1;
    if (codec.student) flags |= 2;
    if (codec.rvq) flags |= 4;
    detail::write_u8(os, flags);
    if (codec.teacher.fitted()) {
        write_matrix(os, codec.teacher.pca_basis);
        for (double v : codec.teacher.dim_scale) detail::write_f64(os, v);
    }
    if (codec.student) write_matrix(os, codec.student->weight);
    if (codec.rvq) {
        // embed the codebook block in its own format
        const auto& rvq = *codec.rvq;
        detail::write_magic(os, "RVQ1");
        detail::write_u32(os, static_cast<std::uint32_t>(rvq.num_codebooks()));
        detail::write_u32(os, static_cast<std::uint32_t>(rvq.codebooks.front().size()));
        detail::write_u32(os, static_cast<std::uint32_t>(rvq.latent_dim));
        for (const auto& cb : rvq.codebooks) write_matrix(os, cb.codewords);
    }
    if (!os) throw std::runtime_error("file: write failed: " + path);
}

Codec load_codec(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "NDSK1");
    Codec codec;
    CodecConfig& cfg = codec.config;
    cfg.sample_rate = static_cast<int>(detail::read_u32(is));
    cfg.frame_len = static_cast<int>(detail::read_u32(is));
    cfg.hop = static_cast<int>(detail::read_u32(is));
    cfg.dct_keep = static_cast<int>(detail::read_u32(is));
    cfg.bottleneck = detail::read_u8(is) == 0 ? Bottleneck::fsq : Bottleneck::rvq;
    const std::uint32_t n_levels = detail::read_u32(is);
    cfg.fsq_levels.resize(n_levels);
    for (auto& n : cfg.fsq_levels) n = static_cast<int>(detail::read_u32(is));
    codec.active = detail::read_u8(is) == 0 ? ActiveEncoder::teacher : ActiveEncoder::student;
    const std::uint16_t id_len = detail::read_u16(is);
    codec.id.resize(id_len);
    is.read(codec.id.data(), id_len);
    cfg.validate();
    codec.fsq = make_fsq_spec(cfg.fsq_levels);

    const std::uint8_t flags = detail::read_u8(is);
    if (flags & 1) {
        codec.teacher.pca_basis = read_matrix(is, static_cast<std::size_t>(cfg.dct_keep),
                                              static_cast<std::size_t>(cfg.fsq_dims()));
        codec.teacher.dim_scale.resize(static_cast<std::size_t>(cfg.fsq_dims()));
        for (double& v : codec.teacher.dim_scale) v = detail::read_f64(is);
    }
    if (flags & 2) {
        codec.student = StudentEncoder{read_matrix(is, static_cast<std::size_t>(cfg.frame_len),
                                                   static_cast<std::size_t>(cfg.fsq_dims()))};
    }
    if (flags & 4) {
        detail::expect_magic(is, "RVQ1");
        const std::uint32_t q_count = detail::read_u32(is);
        const std::uint32_t k = detail::read_u32(is);
        const std::uint32_t dim = detail::read_u32(is);
        RvqSpec rvq;
        rvq.latent_dim = static_cast<int>(dim);
        for (std::uint32_t q = 0; q < q_count; ++q) {
            rvq.codebooks.push_back(RvqCodebook{read_matrix(is, k, dim)});
        }
        codec.rvq = std::move(rvq);
    }
    if (!is) throw std::runtime_error("file: truncated codec state: " + path);
    return codec;
}

}  // namespace qlab
