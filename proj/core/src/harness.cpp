#include "qlab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "qlab/channel.hpp"
#include "qlab/corpus.hpp"
#include "qlab/metrics.hpp"
#include "qlab/rng.hpp"
#include "qlab/train.hpp"
#include "qlab/wav.hpp"

namespace fs = std::filesystem;

namespace qlab {

namespace {

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fmt_short(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("file: cannot open for writing: " + path);
    os << text;
    if (!os) throw std::runtime_error("file: write failed: " + path);
}

}  // namespace

void ExperimentConfig::validate() const {
    const bool have_dir = !corpus_dir.empty();
    const bool have_syn = synthetic.has_value();
    if (have_dir == have_syn) {
        throw std::invalid_argument("config: expected exactly one of corpus_dir, synthetic");
    }
    if (have_syn && synthetic->count < 1) {
        throw std::invalid_argument("config: synthetic.count expected >= 1");
    }
    if (codecs.empty()) throw std::invalid_argument("config: expected at least one codec");
    if (p_flip.empty()) throw std::invalid_argument("config: expected at least one p_flip");
    for (double p : p_flip) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("config: p_flip values expected in [0, 1]");
        }
    }
    if (output_dir.empty()) throw std::invalid_argument("config: output_dir expected");
}

ExperimentConfig experiment_from_json(const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    ExperimentConfig config;
    if (j.contains("corpus_dir")) config.corpus_dir = j["corpus_dir"].get<std::string>();
    if (j.contains("synthetic")) {
        SyntheticSpec syn;
        syn.count = j["synthetic"].at("count").get<int>();
        if (j["synthetic"].contains("duration_s")) {
            syn.duration_s = j["synthetic"]["duration_s"].get<double>();
        }
        config.synthetic = syn;
    }
    config.codecs = j.at("codecs").get<std::vector<std::string>>();
    config.p_flip = j.at("p_flip").get<std::vector<double>>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("models")) {
        config.model_paths = j["models"].get<std::map<std::string, std::string>>();
    }
    config.validate();
    return config;
}

ExperimentConfig load_experiment(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("file: cannot open for reading: " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return experiment_from_json(text);
}

std::vector<Utterance> load_corpus(const ExperimentConfig& config) {
    std::vector<Utterance> corpus;
    if (config.synthetic) {
        const std::string dir = config.output_dir + "/corpus";
        const auto paths =
            gen_corpus(dir, config.seed, config.synthetic->count, config.synthetic->duration_s);
        for (const auto& p : paths) {
            corpus.push_back({fs::path(p).stem().string(), load_wav(p)});
        }
        return corpus;
    }
    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(config.corpus_dir)) {
        if (entry.path().extension() == ".wav") paths.push_back(entry.path());
    }
    if (paths.empty()) {
        throw std::runtime_error("corpus: no .wav files in " + config.corpus_dir);
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        corpus.push_back({p.stem().string(), load_wav(p.string())});
    }
    return corpus;
}

namespace {

std::vector<std::vector<double>> corpus_audio(const std::vector<Utterance>& corpus) {
    std::vector<std::vector<double>> audio;
    audio.reserve(corpus.size());
    for (const auto& u : corpus) audio.push_back(u.samples);
    return audio;
}

Matrix corpus_coefficients(const std::vector<Utterance>& corpus, const CodecConfig& cfg) {
    std::vector<Matrix> blocks;
    std::size_t total = 0;
    for (const auto& u : corpus) {
        blocks.push_back(analysis_coefficients(u.samples, cfg));
        total += blocks.back().rows();
    }
    Matrix all(total, static_cast<std::size_t>(cfg.dct_keep));
    std::size_t at = 0;
    for (const auto& b : blocks) {
        for (std::size_t t = 0; t < b.rows(); ++t, ++at) {
            std::copy(b.row(t).begin(), b.row(t).end(), all.row(at).begin());
        }
    }
    return all;
}

constexpr int kRvqStages = 2;
constexpr int kRvqCodebookSize = 256;
constexpr int kRvqMaxIters = 50;

}  // namespace

Codec train_preset(const std::string& preset, const std::vector<Utterance>& corpus,
                   std::uint64_t seed) {
    Codec codec;
    codec.id = preset;
    if (preset == "fsq-desk" || preset == "student-fsq") {
        codec.config.bottleneck = Bottleneck::fsq;
        codec.fsq = make_fsq_spec(codec.config.fsq_levels);
        codec.teacher = fit_teacher(corpus_audio(corpus), codec.config, seed);
        if (preset == "student-fsq") {
            TrainOptions opts;
            opts.learning_rate = 0.1;
            opts.epochs = 20;
            opts.batch_size = 64;
            opts.seed = seed;
            const TrainResult tr =
                train_student(codec, corpus_audio(corpus), LossWeights{1.0, 1.0}, opts);
            codec.student = tr.student;
            codec.active = ActiveEncoder::student;
        }
        return codec;
    }
    if (preset == "rvq-desk") {
        codec.config.bottleneck = Bottleneck::rvq;
        codec.fsq = make_fsq_spec(codec.config.fsq_levels);  // unused on this path
        const Matrix coeffs = corpus_coefficients(corpus, codec.config);
        codec.rvq =
            train_rvq(coeffs, kRvqStages, kRvqCodebookSize, kRvqMaxIters, seed);
        return codec;
    }
    throw std::invalid_argument("preset: unknown codec preset '" + preset + "'");
}

SweepReport run_sweep(const ExperimentConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    const std::vector<Utterance> corpus = load_corpus(config);

    nlohmann::json manifest;
    manifest["seed"] = config.seed;
    auto& artifacts = manifest["artifacts"] = nlohmann::json::array();
    if (config.synthetic) {
        for (const auto& u : corpus) {
            artifacts.push_back(
                {{"path", "corpus/" + u.id + ".wav"}, {"kind", "corpus"}, {"seed", config.seed}});
        }
    }

    fs::create_directories(config.output_dir + "/models");
    std::vector<Codec> codecs;
    for (const auto& preset : config.codecs) {
        const std::uint64_t model_seed = mix64(config.seed ^ fnv1a64(preset));
        Codec codec;
        auto it = config.model_paths.find(preset);
        if (it != config.model_paths.end()) {
            codec = load_codec(it->second);
        } else {
            codec = train_preset(preset, corpus, model_seed);
        }
        const std::string model_rel = "models/" + preset + ".ndsk";
        save_codec(config.output_dir + "/" + model_rel, codec);
        artifacts.push_back({{"path", model_rel}, {"kind", "model"}, {"seed", model_seed}});
        codecs.push_back(std::move(codec));
    }

    SweepReport report;
    {
        std::set<double> grid(config.p_flip.begin(), config.p_flip.end());
        grid.insert(0.0);
        report.grid.assign(grid.begin(), grid.end());
    }

    const MelConfig mel_config;
    for (std::size_t c = 0; c < codecs.size(); ++c) {
        const Codec& codec = codecs[c];
        // encode once per utterance; corruption happens on the packed bits
        std::vector<CodeSequence> encoded;
        encoded.reserve(corpus.size());
        for (const auto& utt : corpus) {
            encoded.push_back(codec_encode(codec, utt.samples));
        }
        for (double p : report.grid) {
            for (std::size_t u = 0; u < corpus.size(); ++u) {
                const Utterance& utt = corpus[u];
                CodeSequence seq = encoded[u];
                if (p > 0.0) {
                    ChannelSpec ch;
                    ch.p_flip = p;
                    ch.seed = config.seed;
                    ch.stream_id = codec.id + "/" + utt.id + "/p=" + fmt_short(p);
                    seq = corrupt_sequence(seq, ch);
                }
                std::vector<double> decoded = codec_decode(codec, seq);
                decoded.resize(utt.samples.size());
                MetricRecord rec;
                rec.codec = codec.id;
                rec.p_flip = p;
                rec.utterance_id = utt.id;
                rec.si_sdr_db = si_sdr(utt.samples, decoded);
                rec.stoi_score = stoi(utt.samples, decoded, codec.config.sample_rate);
                rec.mel_mse = mel_mse(utt.samples, decoded, mel_config);
                report.records.push_back(std::move(rec));
            }
        }
    }

    for (const auto& codec : config.codecs) {
        for (double p : report.grid) {
            std::vector<double> sdr;
            std::vector<double> st;
            std::vector<double> mm;
            for (const auto& rec : report.records) {
                if (rec.codec == codec && rec.p_flip == p) {
                    sdr.push_back(rec.si_sdr_db);
                    st.push_back(rec.stoi_score);
                    mm.push_back(rec.mel_mse);
                }
            }
            AggregateRow row;
            row.codec = codec;
            row.p_flip = p;
            double s1 = 0.0;
            double s2 = 0.0;
            double s3 = 0.0;
            for (std::size_t i = 0; i < sdr.size(); ++i) {
                s1 += sdr[i];
                s2 += st[i];
                s3 += mm[i];
            }
            const double n = static_cast<double>(sdr.size());
            row.mean_si_sdr = s1 / n;
            row.mean_stoi = s2 / n;
            row.mean_mel_mse = s3 / n;
            row.median_si_sdr = median_of(sdr);
            row.median_stoi = median_of(st);
            row.median_mel_mse = median_of(mm);
            report.aggregates.push_back(std::move(row));
        }
    }

    emit_report(report, config.output_dir);
    for (const char* name : {"report.csv", "report.json", "sweep_si_sdr.svg",
                             "sweep_stoi.svg", "sweep_mel_mse.svg"}) {
        artifacts.push_back({{"path", name}, {"kind", "report"}, {"seed", config.seed}});
    }
    write_text(config.output_dir + "/manifest.json", manifest.dump(2) + "\n");
    return report;
}

namespace {

struct SvgSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (p_flip, value)
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf"};

// log-x line chart; points at p = 0 are not drawable on a log axis and are
// skipped (the p = 0 baseline lives in the CSV/JSON records)
std::string svg_line_chart(const std::string& title, const std::string& y_label,
                           const std::vector<SvgSeries>& series) {
    const int width = 640;
    const int height = 420;
    const int ml = 70;
    const int mr = 160;
    const int mt = 40;
    const int mb = 50;

    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -std::numeric_limits<double>::infinity();
    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        for (const auto& [p, v] : s.points) {
            if (p <= 0.0) continue;
            x_min = std::min(x_min, std::log10(p));
            x_max = std::max(x_max, std::log10(p));
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (!(x_max > x_min)) x_max = x_min + 1.0;
    if (!(y_max > y_min)) y_max = y_min + 1.0;
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto sx = [&](double p) {
        return ml + (std::log10(p) - x_min) / (x_max - x_min) * (width - ml - mr);
    };
    auto sy = [&](double v) {
        return height - mb - (v - y_min) / (y_max - y_min) * (height - mt - mb);
    };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", v);
        return std::string(buf);
    };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + std::to_string(width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">" + title + "</text>\n";
    // axes
    svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(height - mb) +
           "\" x2=\"" + std::to_string(width - mr) + "\" y2=\"" + std::to_string(height - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + std::to_string(ml) + "\" y1=\"" + std::to_string(mt) + "\" x2=\"" +
           std::to_string(ml) + "\" y2=\"" + std::to_string(height - mb) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + std::to_string(width / 2) + "\" y=\"" + std::to_string(height - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
           "bit flip probability (log scale)</text>\n";
    svg += "<text x=\"18\" y=\"" + std::to_string(height / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 " + std::to_string(height / 2) + ")\">" + y_label +
           "</text>\n";

    // x ticks at every plotted grid value of the first series
    if (!series.empty()) {
        for (const auto& [p, v] : series.front().points) {
            if (p <= 0.0) continue;
            const double x = sx(p);
            svg += "<line x1=\"" + num(x) + "\" y1=\"" + std::to_string(height - mb) +
                   "\" x2=\"" + num(x) + "\" y2=\"" + std::to_string(height - mb + 5) +
                   "\" stroke=\"black\"/>\n";
            svg += "<text x=\"" + num(x) + "\" y=\"" + std::to_string(height - mb + 18) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
                   fmt_short(p) + "</text>\n";
        }
    }
    // y ticks
    for (int i = 0; i <= 4; ++i) {
        const double v = y_min + (y_max - y_min) * i / 4.0;
        const double y = sy(v);
        svg += "<line x1=\"" + std::to_string(ml - 5) + "\" y1=\"" + num(y) + "\" x2=\"" +
               std::to_string(ml) + "\" y2=\"" + num(y) + "\" stroke=\"black\"/>\n";
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3g", v);
        svg += "<text x=\"" + std::to_string(ml - 9) + "\" y=\"" + num(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + buf +
               "</text>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string pts;
        for (const auto& [p, v] : series[s].points) {
            if (p <= 0.0) continue;
            pts += num(sx(p)) + "," + num(sy(v)) + " ";
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
        const int ly = mt + 20 * static_cast<int>(s);
        svg += "<line x1=\"" + std::to_string(width - mr + 10) + "\" y1=\"" +
               std::to_string(ly) + "\" x2=\"" + std::to_string(width - mr + 34) + "\" y2=\"" +
               std::to_string(ly) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + std::to_string(width - mr + 40) + "\" y=\"" +
               std::to_string(ly + 4) + "\" font-family=\"sans-serif\" font-size=\"12\">" +
               series[s].name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace

void emit_report(const SweepReport& report, const std::string& out_dir) {
    if (report.records.empty()) throw std::invalid_argument("report: empty");
    fs::create_directories(out_dir);

    std::string csv = "codec,p_flip,utterance_id,si_sdr_db,stoi,mel_mse\n";
    for (const auto& rec : report.records) {
        csv += rec.codec + "," + fmt_full(rec.p_flip) + "," + rec.utterance_id + "," +
               fmt_full(rec.si_sdr_db) + "," + fmt_full(rec.stoi_score) + "," +
               fmt_full(rec.mel_mse) + "\n";
    }
    write_text(out_dir + "/report.csv", csv);

    nlohmann::json j;
    j["grid"] = report.grid;
    auto& records = j["records"] = nlohmann::json::array();
    for (const auto& rec : report.records) {
        records.push_back({{"codec", rec.codec},
                           {"p_flip", rec.p_flip},
                           {"utterance_id", rec.utterance_id},
                           {"si_sdr", rec.si_sdr_db},
                           {"stoi", rec.stoi_score},
                           {"mel_mse", rec.mel_mse}});
    }
    auto& aggregates = j["aggregates"] = nlohmann::json::array();
    for (const auto& row : report.aggregates) {
        aggregates.push_back({{"codec", row.codec},
                              {"p_flip", row.p_flip},
                              {"mean_si_sdr", row.mean_si_sdr},
                              {"median_si_sdr", row.median_si_sdr},
                              {"mean_stoi", row.mean_stoi},
                              {"median_stoi", row.median_stoi},
                              {"mean_mel_mse", row.mean_mel_mse},
                              {"median_mel_mse", row.median_mel_mse}});
    }
    write_text(out_dir + "/report.json", j.dump(2) + "\n");

    std::vector<std::string> codec_order;
    for (const auto& row : report.aggregates) {
        if (std::find(codec_order.begin(), codec_order.end(), row.codec) == codec_order.end()) {
            codec_order.push_back(row.codec);
        }
    }
    struct MetricSel {
        const char* file;
        const char* title;
        const char* label;
        double AggregateRow::*member;
    };
    const MetricSel metrics[] = {
        {"sweep_si_sdr.svg", "SI-SDR vs channel noise", "mean SI-SDR (dB)",
         &AggregateRow::mean_si_sdr},
        {"sweep_stoi.svg", "STOI vs channel noise", "mean STOI", &AggregateRow::mean_stoi},
        {"sweep_mel_mse.svg", "Mel MSE vs channel noise", "mean log-mel MSE",
         &AggregateRow::mean_mel_mse},
    };
    for (const auto& sel : metrics) {
        std::vector<SvgSeries> series;
        for (const auto& codec : codec_order) {
            SvgSeries s;
            s.name = codec;
            for (const auto& row : report.aggregates) {
                if (row.codec == codec) s.points.emplace_back(row.p_flip, row.*sel.member);
            }
            series.push_back(std::move(s));
        }
        write_text(out_dir + "/" + sel.file, svg_line_chart(sel.title, sel.label, series));
    }
}

AnalysisReport analyze_codes(const std::vector<Utterance>& corpus, const Codec& a,
                             const Codec& b) {
    if (a.config.bottleneck != Bottleneck::fsq || b.config.bottleneck != Bottleneck::fsq) {
        throw std::invalid_argument("analysis: FSQ-path codecs required");
    }
    if (a.fsq.levels != b.fsq.levels || a.teacher.pca_basis != b.teacher.pca_basis ||
        a.teacher.dim_scale != b.teacher.dim_scale) {
        throw std::invalid_argument("encoders: mismatched quantizer or decoder");
    }
    if (corpus.empty()) throw std::invalid_argument("corpus: empty");

    const FsqSpec& spec = a.fsq;
    const int dims = spec.dims();

    CodeSequence all_a;
    CodeSequence all_b;
    all_a.slot_sizes = {static_cast<std::uint32_t>(spec.codebook_size)};
    all_b.slot_sizes = all_a.slot_sizes;
    all_a.quantizer_id = a.id;
    all_b.quantizer_id = b.id;
    Matrix lat_a;
    Matrix lat_b;
    Matrix deq_a;
    Matrix deq_b;
    std::size_t total = 0;
    for (const auto& utt : corpus) {
        total += frame_signal(utt.samples, a.config).rows();
    }
    lat_a = Matrix(total, static_cast<std::size_t>(dims));
    lat_b = Matrix(total, static_cast<std::size_t>(dims));
    deq_a = Matrix(total, static_cast<std::size_t>(dims));
    deq_b = Matrix(total, static_cast<std::size_t>(dims));

    std::size_t at = 0;
    for (const auto& utt : corpus) {
        const LatentSequence ha = codec_latents(a, utt.samples);
        const LatentSequence hb = codec_latents(b, utt.samples);
        for (std::size_t t = 0; t < ha.h.rows(); ++t, ++at) {
            const QuantizedVector qa = fsq_quantize(spec, ha.h.row(t));
            const QuantizedVector qb = fsq_quantize(spec, hb.h.row(t));
            all_a.codes.push_back(
                static_cast<std::uint32_t>(fsq_index_encode(spec, qa.levels)));
            all_b.codes.push_back(
                static_cast<std::uint32_t>(fsq_index_encode(spec, qb.levels)));
            std::copy(ha.h.row(t).begin(), ha.h.row(t).end(), lat_a.row(at).begin());
            std::copy(hb.h.row(t).begin(), hb.h.row(t).end(), lat_b.row(at).begin());
            std::copy(qa.values.begin(), qa.values.end(), deq_a.row(at).begin());
            std::copy(qb.values.begin(), qb.values.end(), deq_b.row(at).begin());
        }
    }
    all_a.frames = static_cast<std::uint32_t>(total);
    all_b.frames = static_cast<std::uint32_t>(total);

    AnalysisReport report;
    report.frames = static_cast<std::int64_t>(total);
    report.exact_agreement = exact_code_agreement(all_a, all_b);
    report.accuracy = level_accuracy(all_a, all_b, spec);
    report.within_one = within_level_rate(all_a, all_b, spec, 1);
    for (int dim = 0; dim < dims; ++dim) {
        report.confusions.push_back(level_confusion(all_a, all_b, spec, dim));
    }
    report.cosine_pre_quant = mean_cosine_similarity({lat_a}, {lat_b});
    report.cosine_dequant = mean_cosine_similarity({deq_a}, {deq_b});
    return report;
}

void write_analysis(const AnalysisReport& report, const std::string& out_dir) {
    fs::create_directories(out_dir);
    nlohmann::json j;
    j["frames"] = report.frames;
    j["exact_code_agreement"] = report.exact_agreement;
    j["level_accuracy"] = {{"per_dim", report.accuracy.per_dim},
                           {"overall", report.accuracy.overall}};
    j["within_level_rate_1"] = report.within_one;
    j["cosine_pre_quant"] = {{"mean", report.cosine_pre_quant.mean},
                             {"used", report.cosine_pre_quant.used},
                             {"skipped", report.cosine_pre_quant.skipped}};
    j["cosine_dequant"] = {{"mean", report.cosine_dequant.mean},
                           {"used", report.cosine_dequant.used},
                           {"skipped", report.cosine_dequant.skipped}};
    auto& confusions = j["confusions"] = nlohmann::json::array();
    for (std::size_t dim = 0; dim < report.confusions.size(); ++dim) {
        const ConfusionMatrix& m = report.confusions[dim];
        nlohmann::json rows = nlohmann::json::array();
        std::string csv;
        for (int r = 0; r < m.n; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < m.n; ++c) {
                row.push_back(m.at(r, c));
                csv += std::to_string(m.at(r, c));
                csv += c + 1 == m.n ? '\n' : ',';
            }
            rows.push_back(row);
        }
        confusions.push_back({{"dim", dim}, {"counts", rows}});
        write_text(out_dir + "/confusion_q" + std::to_string(dim) + ".csv", csv);
    }
    write_text(out_dir + "/analysis.json", j.dump(2) + "\n");
}

}  // namespace qlab
