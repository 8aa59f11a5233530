#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qlab/analysis.hpp"
#include "qlab/codec.hpp"

namespace qlab {

struct SyntheticSpec {
    int count = 0;
    double duration_s = 2.0;
};

// Single JSON document driving a full experiment. Exactly one of corpus_dir
// and synthetic must be given.
struct ExperimentConfig {
    std::string corpus_dir;
    std::optional<SyntheticSpec> synthetic;
    std::vector<std::string> codecs;  // preset ids: fsq-desk, rvq-desk, student-fsq
    std::vector<double> p_flip;
    std::uint64_t seed = 0;
    std::string output_dir;
    // optional pre-trained model files per preset; missing presets are trained
    std::map<std::string, std::string> model_paths;

    void validate() const;
};

ExperimentConfig experiment_from_json(const std::string& json_text);
ExperimentConfig load_experiment(const std::string& path);

struct Utterance {
    std::string id;
    std::vector<double> samples;
};

// Synthetic generation (into output_dir/corpus) or sorted WAV ingestion.
std::vector<Utterance> load_corpus(const ExperimentConfig& config);

// Desk presets, bitrate-matched at 16 bits per frame:
//   fsq-desk    teacher encoder, FSQ [4]^8 (codebook 2^16)
//   rvq-desk    2 x 256-entry residual codebooks over the 32-dim DCT latent
//   student-fsq distilled student encoder over the fsq-desk quantizer/decoder
Codec train_preset(const std::string& preset, const std::vector<Utterance>& corpus,
                   std::uint64_t seed);

struct MetricRecord {
    std::string codec;
    double p_flip = 0.0;
    std::string utterance_id;
    double si_sdr_db = 0.0;
    double stoi_score = 0.0;
    double mel_mse = 0.0;
};

struct AggregateRow {
    std::string codec;
    double p_flip = 0.0;
    double mean_si_sdr = 0.0;
    double median_si_sdr = 0.0;
    double mean_stoi = 0.0;
    double median_stoi = 0.0;
    double mean_mel_mse = 0.0;
    double median_mel_mse = 0.0;
};

struct SweepReport {
    std::vector<double> grid;  // sorted p_flip values, always including 0
    std::vector<MetricRecord> records;
    std::vector<AggregateRow> aggregates;
};

// Pipeline per (codec, utterance, p): encode, pack, corrupt, unpack, decode,
// score against the original audio. The p = 0 row is the clean baseline and
// is always present. Trains (or loads) the codec states, writes models,
// reports and a manifest under output_dir, and returns the report.
SweepReport run_sweep(const ExperimentConfig& config);

// report.csv, report.json and one SVG line chart per metric under out_dir.
void emit_report(const SweepReport& report, const std::string& out_dir);

struct AnalysisReport {
    double exact_agreement = 0.0;
    LevelAccuracy accuracy;
    double within_one = 0.0;
    std::vector<ConfusionMatrix> confusions;  // one per implicit codebook
    CosineStats cosine_pre_quant;
    CosineStats cosine_dequant;
    std::int64_t frames = 0;
};

// Code divergence statistics between two FSQ-path encoders that share the
// frozen quantizer and decoder.
AnalysisReport analyze_codes(const std::vector<Utterance>& corpus, const Codec& a,
                             const Codec& b);

// analysis.json plus one confusion_q<i>.csv per implicit codebook.
void write_analysis(const AnalysisReport& report, const std::string& out_dir);

}  // namespace qlab
