#include "qlab/channel.hpp"

#include <stdexcept>

#include "qlab/rng.hpp"

namespace qlab {

BitString bsc_transmit(const BitString& bits, const ChannelSpec& ch) {
    if (!(ch.p_flip >= 0.0 && ch.p_flip <= 1.0)) {
        throw std::invalid_argument("p_flip: expected in [0, 1]");
    }
    BitString out = bits;
    if (ch.p_flip == 0.0) return out;
    const std::uint64_t key = mix64(ch.seed ^ mix64(fnv1a64(ch.stream_id)));
    for (std::uint64_t i = 0; i < bits.length(); ++i) {
        const double u = u64_to_unit_double(splitmix_at(key, i));
        if (u < ch.p_flip) out.flip(i);
    }
    return out;
}

CodeSequence corrupt_sequence(const CodeSequence& seq, const ChannelSpec& ch) {
    return unpack_codes(bsc_transmit(pack_codes(seq), ch), shape_of(seq));
}

}  // namespace qlab
