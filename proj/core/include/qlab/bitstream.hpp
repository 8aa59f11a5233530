#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qlab {

// Packed bit sequence. Bit i lives in byte i/8 at mask 0x80 >> (i%8), i.e.
// MSB-first within each byte, matching the on-disk layout.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::uint64_t length)
        : bytes_((length + 7) / 8, 0), length_(length) {}

    std::uint64_t length() const { return length_; }

    bool get(std::uint64_t i) const {
        return (bytes_[i >> 3] >> (7 - (i & 7))) & 1u;
    }
    void set(std::uint64_t i, bool value) {
        const std::uint8_t mask = static_cast<std::uint8_t>(0x80u >> (i & 7));
        if (value)
            bytes_[i >> 3] |= mask;
        else
            bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
    }
    void flip(std::uint64_t i) {
        bytes_[i >> 3] ^= static_cast<std::uint8_t>(0x80u >> (i & 7));
    }
    void push_back(bool bit) {
        if (length_ % 8 == 0) bytes_.push_back(0);
        ++length_;
        set(length_ - 1, bit);
    }

    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    bool operator==(const BitString&) const = default;

private:
    std::vector<std::uint8_t> bytes_;
    std::uint64_t length_ = 0;
};

// Frame-major integer codes: `frames` x S grid where S = slot_sizes.size().
// S is 1 for a single-codebook quantizer and the codebook count for a
// residual stack. codes[t*S + s] must lie in [0, slot_sizes[s]).
struct CodeSequence {
    std::uint32_t frames = 0;
    std::vector<std::uint32_t> slot_sizes;
    std::vector<std::uint32_t> codes;  // frames * slots, frame-major
    std::string quantizer_id;

    std::uint32_t slots() const { return static_cast<std::uint32_t>(slot_sizes.size()); }
    std::uint32_t code(std::uint32_t t, std::uint32_t s) const {
        return codes[static_cast<std::size_t>(t) * slots() + s];
    }
    std::uint32_t& code(std::uint32_t t, std::uint32_t s) {
        return codes[static_cast<std::size_t>(t) * slots() + s];
    }

    // throws if any code is out of its slot's range or sizes are inconsistent
    void validate() const;

    bool operator==(const CodeSequence&) const = default;
};

struct CodeShape {
    std::uint32_t frames = 0;
    std::vector<std::uint32_t> slot_sizes;
    std::string quantizer_id;
};

CodeShape shape_of(const CodeSequence& seq);

// ceil(log2(slot_size)); 0 for a single-entry slot
int slot_width(std::uint32_t slot_size);

// Frame-major, slot-order-within-frame concatenation; each code written
// MSB-first in exactly slot_width(slot_sizes[s]) bits.
BitString pack_codes(const CodeSequence& seq);

// Inverse of pack_codes on untouched bits. A decoded word w >= slot_size
// (reachable only for non-power-of-two slot sizes after corruption) is
// wrapped to w % slot_size.
CodeSequence unpack_codes(const BitString& bits, const CodeShape& shape);

// File formats (all little-endian):
//   bits:  magic "NBITS1", u64 bit length, payload bytes MSB-first with zero
//          padding in the final byte
//   codes: magic "NCODE1", u32 T, u32 S, S x u32 slot sizes, T*S u32 codes
//          (quantizer_id is not stored; load_codes leaves it empty)
void save_bits(const std::string& path, const BitString& bits);
BitString load_bits(const std::string& path);
void save_codes(const std::string& path, const CodeSequence& seq);
CodeSequence load_codes(const std::string& path);

}  // namespace qlab
