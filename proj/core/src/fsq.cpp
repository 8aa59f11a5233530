#include "qlab/fsq.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace qlab {

namespace {

constexpr std::uint64_t kMaxCodebookSize = 1ULL << 32;

void check_levels_match(const FsqSpec& spec, std::size_t got) {
    if (got != spec.levels.size()) {
        throw std::invalid_argument("fsq: length mismatch, expected " +
                                    std::to_string(spec.levels.size()) + " dims, got " +
                                    std::to_string(got));
    }
}

}  // namespace

int FsqSpec::index_bits() const {
    if (codebook_size <= 1) return 0;
    return std::bit_width(codebook_size - 1);
}

bool FsqSpec::levels_pow2() const {
    return std::all_of(levels.begin(), levels.end(), [](int n) {
        return std::has_single_bit(static_cast<unsigned>(n));
    });
}

int FsqSpec::dim_bit_offset(int dim) const {
    if (!levels_pow2()) {
        throw std::logic_error("fsq: bit fields are defined for power-of-two levels only");
    }
    if (dim < 0 || dim >= dims()) {
        throw std::out_of_range("fsq: dim out of range");
    }
    int off = 0;
    for (int i = 0; i < dim; ++i) {
        off += std::bit_width(static_cast<unsigned>(levels[i])) - 1;
    }
    return off;
}

FsqSpec make_fsq_spec(std::vector<int> levels) {
    if (levels.empty()) {
        throw std::invalid_argument("levels: expected non-empty sequence");
    }
    std::uint64_t c = 1;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] < 2) {
            throw std::invalid_argument("levels[" + std::to_string(i) + "]: expected >= 2, got " +
                                        std::to_string(levels[i]));
        }
        c *= static_cast<std::uint64_t>(levels[i]);
        if (c > kMaxCodebookSize) {
            throw std::invalid_argument("codebook_size: exceeds 2^32");
        }
    }
    FsqSpec spec;
    spec.levels = std::move(levels);
    spec.codebook_size = c;
    spec.steps.reserve(spec.levels.size());
    for (int n : spec.levels) {
        spec.steps.push_back(2.0 / (n - 1));
    }
    return spec;
}

FsqSpec fsq_preset(std::string_view name) {
    if (name == "neucodec") return make_fsq_spec({4, 4, 4, 4, 4, 4, 4, 4});
    if (name == "stablecodec") return make_fsq_spec({8, 8, 8, 8, 4, 4});
    throw std::invalid_argument("fsq preset: unknown name '" + std::string(name) + "'");
}

std::string fsq_to_json(const FsqSpec& spec) {
    nlohmann::json j;
    j["levels"] = spec.levels;
    return j.dump();
}

FsqSpec fsq_from_json(std::string_view json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    if (!j.is_object() || !j.contains("levels") || !j["levels"].is_array()) {
        throw std::invalid_argument("fsq json: expected object with \"levels\" array");
    }
    return make_fsq_spec(j["levels"].get<std::vector<int>>());
}

QuantizedVector fsq_quantize(const FsqSpec& spec, std::span<const double> x) {
    check_levels_match(spec, x.size());
    QuantizedVector out;
    out.levels.resize(x.size());
    out.values.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) {
            throw std::invalid_argument("x[" + std::to_string(i) + "]: non-finite input");
        }
        const int n = spec.levels[i];
        const double c = std::clamp(x[i], -1.0, 1.0);
        // std::llround ties away from zero; the argument is always >= 0 here
        long long k = std::llround((c + 1.0) / 2.0 * (n - 1));
        k = std::clamp<long long>(k, 0, n - 1);
        out.levels[i] = static_cast<int>(k);
        out.values[i] = -1.0 + 2.0 * static_cast<double>(k) / (n - 1);
    }
    return out;
}

std::vector<double> fsq_dequantize(const FsqSpec& spec, std::span<const int> k) {
    check_levels_match(spec, k.size());
    std::vector<double> v(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] < 0 || k[i] >= spec.levels[i]) {
            throw std::out_of_range("k[" + std::to_string(i) + "]: level out of range");
        }
        v[i] = -1.0 + 2.0 * static_cast<double>(k[i]) / (spec.levels[i] - 1);
    }
    return v;
}

std::uint64_t fsq_index_encode(const FsqSpec& spec, std::span<const int> k) {
    check_levels_match(spec, k.size());
    std::uint64_t index = 0;
    std::uint64_t radix = 1;
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (k[i] < 0 || k[i] >= spec.levels[i]) {
            throw std::out_of_range("k[" + std::to_string(i) + "]: level out of range");
        }
        index += static_cast<std::uint64_t>(k[i]) * radix;
        radix *= static_cast<std::uint64_t>(spec.levels[i]);
    }
    return index;
}

std::vector<int> fsq_index_decode(const FsqSpec& spec, std::uint64_t index) {
    if (index >= spec.codebook_size) {
        throw std::out_of_range("index: expected < codebook_size " +
                                std::to_string(spec.codebook_size) + ", got " +
                                std::to_string(index));
    }
    std::vector<int> k(spec.levels.size());
    for (std::size_t i = 0; i < k.size(); ++i) {
        const auto n = static_cast<std::uint64_t>(spec.levels[i]);
        k[i] = static_cast<int>(index % n);
        index /= n;
    }
    return k;
}

}  // namespace qlab
