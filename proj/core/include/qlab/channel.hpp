#pragma once

#include <cstdint>
#include <string>

#include "qlab/bitstream.hpp"

namespace qlab {

// Binary symmetric channel. Flip decisions are a pure function of
// (seed, stream_id, absolute bit index), so corruption is identical under
// any call order or parallel partitioning of the stream.
struct ChannelSpec {
    double p_flip = 0.0;
    std::uint64_t seed = 0;
    std::string stream_id;  // per-utterance domain separator
};

BitString bsc_transmit(const BitString& bits, const ChannelSpec& ch);

// unpack(bsc_transmit(pack(seq)))
CodeSequence corrupt_sequence(const CodeSequence& seq, const ChannelSpec& ch);

}  // namespace qlab
