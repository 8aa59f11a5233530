#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qlab {

// Per-dimension level grid for finite scalar quantization. Dimension i is
// quantized to levels[i] equidistant values in [-1, 1]. Codes enumerate the
// level tuples mixed-radix with dimension 0 least significant, so for
// power-of-two level counts each dimension owns a contiguous bit field of
// the binary code index.
struct FsqSpec {
    std::vector<int> levels;          // n_i, each >= 2
    std::vector<double> steps;        // 2 / (n_i - 1)
    std::uint64_t codebook_size = 0;  // product of all n_i, <= 2^32

    int dims() const { return static_cast<int>(levels.size()); }

    // bit width of a packed code index: ceil(log2(codebook_size))
    int index_bits() const;

    bool levels_pow2() const;

    // start of dimension `dim`'s bit field in the binary index
    // (power-of-two specs only)
    int dim_bit_offset(int dim) const;
};

FsqSpec make_fsq_spec(std::vector<int> levels);

// Built-in presets: "neucodec" -> [4,4,4,4,4,4,4,4], "stablecodec" -> [8,8,8,8,4,4].
FsqSpec fsq_preset(std::string_view name);

// JSON object {"levels": [..]}
std::string fsq_to_json(const FsqSpec& spec);
FsqSpec fsq_from_json(std::string_view json_text);

struct QuantizedVector {
    std::vector<int> levels;     // k_i in [0, n_i)
    std::vector<double> values;  // v_i = -1 + 2*k_i/(n_i-1)
};

// Clamps to [-1, 1], then rounds each dimension to the nearest grid level
// (ties away from zero).
QuantizedVector fsq_quantize(const FsqSpec& spec, std::span<const double> x);

std::vector<double> fsq_dequantize(const FsqSpec& spec, std::span<const int> k);

// Mixed-radix enumeration of a level tuple; bijective over [0, codebook_size).
std::uint64_t fsq_index_encode(const FsqSpec& spec, std::span<const int> k);
std::vector<int> fsq_index_decode(const FsqSpec& spec, std::uint64_t index);

}  // namespace qlab
