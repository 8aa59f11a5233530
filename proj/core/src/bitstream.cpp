#include "qlab/bitstream.hpp"

#include <bit>
#include <stdexcept>

#include "binary_io.hpp"

namespace qlab {

void CodeSequence::validate() const {
    if (slot_sizes.empty()) {
        throw std::invalid_argument("slot_sizes: expected non-empty");
    }
    for (std::size_t s = 0; s < slot_sizes.size(); ++s) {
        if (slot_sizes[s] == 0) {
            throw std::invalid_argument("slot_sizes[" + std::to_string(s) + "]: expected >= 1");
        }
    }
    if (codes.size() != static_cast<std::size_t>(frames) * slot_sizes.size()) {
        throw std::invalid_argument("codes: expected frames*slots entries");
    }
    const std::uint32_t s_count = slots();
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const std::uint32_t limit = slot_sizes[i % s_count];
        if (codes[i] >= limit) {
            throw std::invalid_argument("codes[" + std::to_string(i) + "]: value " +
                                        std::to_string(codes[i]) + " >= slot size " +
                                        std::to_string(limit));
        }
    }
}

CodeShape shape_of(const CodeSequence& seq) {
    return CodeShape{seq.frames, seq.slot_sizes, seq.quantizer_id};
}

int slot_width(std::uint32_t slot_size) {
    if (slot_size == 0) throw std::invalid_argument("slot size: expected >= 1");
    if (slot_size == 1) return 0;
    return std::bit_width(slot_size - 1);
}

BitString pack_codes(const CodeSequence& seq) {
    seq.validate();
    const std::uint32_t s_count = seq.slots();
    std::vector<int> widths(s_count);
    std::uint64_t total = 0;
    for (std::uint32_t s = 0; s < s_count; ++s) {
        widths[s] = slot_width(seq.slot_sizes[s]);
        total += static_cast<std::uint64_t>(widths[s]) * seq.frames;
    }
    BitString bits(total);
    std::uint64_t pos = 0;
    for (std::uint32_t t = 0; t < seq.frames; ++t) {
        for (std::uint32_t s = 0; s < s_count; ++s) {
            const std::uint32_t c = seq.code(t, s);
            for (int b = widths[s] - 1; b >= 0; --b) {
                bits.set(pos++, (c >> b) & 1u);
            }
        }
    }
    return bits;
}

CodeSequence unpack_codes(const BitString& bits, const CodeShape& shape) {
    const std::size_t s_count = shape.slot_sizes.size();
    if (s_count == 0) throw std::invalid_argument("slot_sizes: expected non-empty");
    std::vector<int> widths(s_count);
    std::uint64_t total = 0;
    for (std::size_t s = 0; s < s_count; ++s) {
        widths[s] = slot_width(shape.slot_sizes[s]);
        total += static_cast<std::uint64_t>(widths[s]) * shape.frames;
    }
    if (bits.length() != total) {
        throw std::invalid_argument("bits: length " + std::to_string(bits.length()) +
                                    " does not match template (" + std::to_string(total) + ")");
    }
    CodeSequence seq;
    seq.frames = shape.frames;
    seq.slot_sizes = shape.slot_sizes;
    seq.quantizer_id = shape.quantizer_id;
    seq.codes.resize(static_cast<std::size_t>(shape.frames) * s_count);
    std::uint64_t pos = 0;
    for (std::uint32_t t = 0; t < shape.frames; ++t) {
        for (std::size_t s = 0; s < s_count; ++s) {
            std::uint32_t w = 0;
            for (int b = 0; b < widths[s]; ++b) {
                w = (w << 1) | static_cast<std::uint32_t>(bits.get(pos++));
            }
            if (w >= shape.slot_sizes[s]) w %= shape.slot_sizes[s];
            seq.codes[static_cast<std::size_t>(t) * s_count + s] = w;
        }
    }
    return seq;
}

void save_bits(const std::string& path, const BitString& bits) {
    auto os = detail::open_out(path);
    detail::write_magic(os, "NBITS1");
    detail::write_u64(os, bits.length());
    os.write(reinterpret_cast<const char*>(bits.bytes().data()),
             static_cast<std::streamsize>(bits.bytes().size()));
    if (!os) throw std::runtime_error("file: write failed: " + path);
}

BitString load_bits(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "NBITS1");
    const std::uint64_t length = detail::read_u64(is);
    BitString bits(length);
    std::vector<std::uint8_t> buf((length + 7) / 8);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!is) throw std::runtime_error("file: truncated bit payload: " + path);
    for (std::uint64_t i = 0; i < length; ++i) {
        bits.set(i, (buf[i >> 3] >> (7 - (i & 7))) & 1u);
    }
    return bits;
}

void save_codes(const std::string& path, const CodeSequence& seq) {
    seq.validate();
    auto os = detail::open_out(path);
    detail::write_magic(os, "NCODE1");
    detail::write_u32(os, seq.frames);
    detail::write_u32(os, seq.slots());
    for (std::uint32_t s : seq.slot_sizes) detail::write_u32(os, s);
    for (std::uint32_t c : seq.codes) detail::write_u32(os, c);
    if (!os) throw std::runtime_error("file: write failed: " + path);
}

CodeSequence load_codes(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "NCODE1");
    CodeSequence seq;
    seq.frames = detail::read_u32(is);
    const std::uint32_t s_count = detail::read_u32(is);
    seq.slot_sizes.resize(s_count);
    for (auto& s : seq.slot_sizes) s = detail::read_u32(is);
    seq.codes.resize(static_cast<std::size_t>(seq.frames) * s_count);
    for (auto& c : seq.codes) c = detail::read_u32(is);
    seq.validate();
    return seq;
}

}  // namespace qlab
