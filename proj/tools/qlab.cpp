// Command line driver for the quantization laboratory: corpus generation,
// codec training, encode/corrupt/decode round trips, metric evaluation, the
// channel-noise sweep and encoder comparison reports.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qlab/channel.hpp"
#include "qlab/corpus.hpp"
#include "qlab/harness.hpp"
#include "qlab/metrics.hpp"
#include "qlab/wav.hpp"

namespace {

std::vector<qlab::Utterance> read_corpus_dir(const std::string& dir) {
    qlab::ExperimentConfig cfg;
    cfg.corpus_dir = dir;
    cfg.codecs = {"fsq-desk"};
    cfg.p_flip = {0.0};
    cfg.output_dir = ".";
    return qlab::load_corpus(cfg);
}

int run(int argc, char** argv) {
    CLI::App app{"desk-scale quantization and noisy-channel laboratory"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a deterministic synthetic corpus");
    std::uint64_t gen_seed = 0;
    int gen_count = 8;
    double gen_dur = 2.0;
    std::string gen_out;
    gen->add_option("--seed", gen_seed, "corpus seed")->required();
    gen->add_option("--count", gen_count, "number of utterances")->required();
    gen->add_option("--dur", gen_dur, "utterance duration in seconds")->required();
    gen->add_option("--out", gen_out, "output directory")->required();

    // train
    auto* train = app.add_subcommand("train", "train a codec preset on a WAV corpus");
    std::string train_corpus;
    std::string train_preset_name;
    std::string train_out;
    std::uint64_t train_seed = 0;
    train->add_option("--corpus", train_corpus, "directory of 16 kHz PCM16 mono WAVs")
        ->required();
    train->add_option("--preset", train_preset_name, "fsq-desk | rvq-desk | student-fsq")
        ->required();
    train->add_option("--out", train_out, "output model file")->required();
    train->add_option("--seed", train_seed, "training seed");

    // encode
    auto* encode = app.add_subcommand("encode", "encode a WAV file to a code sequence");
    std::string enc_model;
    std::string enc_in;
    std::string enc_out;
    encode->add_option("--model", enc_model, "trained codec state")->required();
    encode->add_option("--in", enc_in, "input WAV")->required();
    encode->add_option("--out", enc_out, "output code file")->required();

    // corrupt
    auto* corrupt = app.add_subcommand("corrupt", "pass a code file through the BSC");
    std::string cor_in;
    std::string cor_out;
    double cor_p = 0.0;
    std::uint64_t cor_seed = 0;
    std::string cor_stream;
    corrupt->add_option("--in", cor_in, "input code file")->required();
    corrupt->add_option("--p", cor_p, "bit flip probability")->required();
    corrupt->add_option("--seed", cor_seed, "channel seed")->required();
    corrupt->add_option("--out", cor_out, "output code file")->required();
    corrupt->add_option("--stream-id", cor_stream, "channel domain separator");

    // decode
    auto* decode = app.add_subcommand("decode", "decode a code sequence to a WAV file");
    std::string dec_model;
    std::string dec_in;
    std::string dec_out;
    decode->add_option("--model", dec_model, "trained codec state")->required();
    decode->add_option("--in", dec_in, "input code file")->required();
    decode->add_option("--out", dec_out, "output WAV")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "compute SI-SDR / STOI / mel MSE for a pair");
    std::string eval_ref;
    std::string eval_est;
    eval->add_option("--ref", eval_ref, "reference WAV")->required();
    eval->add_option("--est", eval_est, "estimate WAV")->required();

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run the full perturbation experiment");
    std::string sweep_config;
    sweep->add_option("--config", sweep_config, "experiment config JSON")->required();

    // analyze-codes
    auto* analyze = app.add_subcommand("analyze-codes", "compare two encoders' codes");
    std::string an_a;
    std::string an_b;
    std::string an_corpus;
    std::string an_out = "analysis";
    std::string an_a_enc = "active";
    std::string an_b_enc = "active";
    analyze->add_option("--a", an_a, "first codec state")->required();
    analyze->add_option("--b", an_b, "second codec state")->required();
    analyze->add_option("--corpus", an_corpus, "directory of WAVs")->required();
    analyze->add_option("--out", an_out, "output directory");
    analyze->add_option("--a-encoder", an_a_enc, "teacher | student | active");
    analyze->add_option("--b-encoder", an_b_enc, "teacher | student | active");

    CLI11_PARSE(app, argc, argv);

    auto pick_encoder = [](qlab::Codec codec, const std::string& which) {
        if (which == "teacher") codec.active = qlab::ActiveEncoder::teacher;
        else if (which == "student") codec.active = qlab::ActiveEncoder::student;
        else if (which != "active") throw std::invalid_argument("encoder: unknown selection");
        return codec;
    };

    if (*gen) {
        const auto paths = qlab::gen_corpus(gen_out, gen_seed, gen_count, gen_dur);
        std::cout << "wrote " << paths.size() << " utterances to " << gen_out << "\n";
        return 0;
    }
    if (*train) {
        const auto corpus = read_corpus_dir(train_corpus);
        const qlab::Codec codec = qlab::train_preset(train_preset_name, corpus, train_seed);
        qlab::save_codec(train_out, codec);
        std::cout << "trained " << train_preset_name << " on " << corpus.size()
                  << " utterances -> " << train_out << "\n";
        return 0;
    }
    if (*encode) {
        const qlab::Codec codec = qlab::load_codec(enc_model);
        const auto audio = qlab::load_wav(enc_in);
        const qlab::CodeSequence seq = qlab::codec_encode(codec, audio);
        qlab::save_codes(enc_out, seq);
        std::cout << "encoded " << seq.frames << " frames x " << seq.slots() << " slots -> "
                  << enc_out << "\n";
        return 0;
    }
    if (*corrupt) {
        qlab::CodeSequence seq = qlab::load_codes(cor_in);
        qlab::ChannelSpec ch{cor_p, cor_seed, cor_stream};
        qlab::save_codes(cor_out, qlab::corrupt_sequence(seq, ch));
        std::cout << "corrupted at p=" << cor_p << " -> " << cor_out << "\n";
        return 0;
    }
    if (*decode) {
        const qlab::Codec codec = qlab::load_codec(dec_model);
        const qlab::CodeSequence seq = qlab::load_codes(dec_in);
        qlab::save_wav(dec_out, qlab::codec_decode(codec, seq));
        std::cout << "decoded " << seq.frames << " frames -> " << dec_out << "\n";
        return 0;
    }
    if (*eval) {
        auto ref = qlab::load_wav(eval_ref);
        auto est = qlab::load_wav(eval_est);
        // decoder output is padded to whole hops; score on the common prefix
        const std::size_t n = std::min(ref.size(), est.size());
        ref.resize(n);
        est.resize(n);
        nlohmann::json j;
        j["si_sdr"] = qlab::si_sdr(ref, est);
        j["stoi"] = qlab::stoi(ref, est, qlab::kWavSampleRate);
        j["mel_mse"] = qlab::mel_mse(ref, est, qlab::MelConfig{});
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    if (*sweep) {
        const qlab::ExperimentConfig config = qlab::load_experiment(sweep_config);
        const qlab::SweepReport report = qlab::run_sweep(config);
        std::cout << "sweep complete: " << report.records.size() << " records -> "
                  << config.output_dir << "\n";
        return 0;
    }
    if (*analyze) {
        const auto corpus = read_corpus_dir(an_corpus);
        const qlab::Codec a = pick_encoder(qlab::load_codec(an_a), an_a_enc);
        const qlab::Codec b = pick_encoder(qlab::load_codec(an_b), an_b_enc);
        const qlab::AnalysisReport report = qlab::analyze_codes(corpus, a, b);
        qlab::write_analysis(report, an_out);
        std::cout << "exact agreement " << report.exact_agreement << ", level accuracy "
                  << report.accuracy.overall << ", within-one " << report.within_one
                  << " -> " << an_out << "\n";
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
