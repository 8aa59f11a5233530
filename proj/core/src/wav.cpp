#include "qlab/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "binary_io.hpp"

namespace qlab {

std::vector<double> load_wav(const std::string& path) {
    auto is = detail::open_in(path);
    detail::expect_magic(is, "RIFF");
    detail::read_u32(is);  // chunk size
    detail::expect_magic(is, "WAVE");

    bool have_fmt = false;
    std::vector<double> samples;
    bool have_data = false;
    while (is.peek() != EOF) {
        char id[4];
        is.read(id, 4);
        if (!is) break;
        const std::uint32_t size = detail::read_u32(is);
        const std::string chunk(id, 4);
        if (chunk == "fmt ") {
            const std::uint16_t format = detail::read_u16(is);
            const std::uint16_t channels = detail::read_u16(is);
            const std::uint32_t rate = detail::read_u32(is);
            detail::read_u32(is);  // byte rate
            detail::read_u16(is);  // block align
            const std::uint16_t bits = detail::read_u16(is);
            if (format != 1) throw std::runtime_error("encoding: expected PCM (format 1)");
            if (channels != 1) {
                throw std::runtime_error("channels: expected 1, got " +
                                         std::to_string(channels));
            }
            if (rate != kWavSampleRate) {
                throw std::runtime_error("sample_rate: expected 16000, got " +
                                         std::to_string(rate));
            }
            if (bits != 16) {
                throw std::runtime_error("bit_depth: expected 16, got " + std::to_string(bits));
            }
            is.ignore(size > 16 ? size - 16 : 0);
            have_fmt = true;
        } else if (chunk == "data") {
            if (!have_fmt) throw std::runtime_error("file: data chunk before fmt chunk");
            const std::size_t count = size / 2;
            samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::uint16_t raw = detail::read_u16(is);
                samples[i] = static_cast<std::int16_t>(raw) / 32768.0;
            }
            if (size % 2 == 1) is.ignore(1);
            have_data = true;
        } else {
            is.ignore(size + (size % 2));  // chunks are word-aligned
        }
    }
    if (!have_fmt) throw std::runtime_error("file: missing fmt chunk");
    if (!have_data) throw std::runtime_error("file: missing data chunk");
    return samples;
}

void save_wav(const std::string& path, std::span<const double> audio) {
    auto os = detail::open_out(path);
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(audio.size() * 2);
    detail::write_magic(os, "RIFF");
    detail::write_u32(os, 36 + data_bytes);
    detail::write_magic(os, "WAVE");
    detail::write_magic(os, "fmt ");
    detail::write_u32(os, 16);
    detail::write_u16(os, 1);  // PCM
    detail::write_u16(os, 1);  // mono
    detail::write_u32(os, kWavSampleRate);
    detail::write_u32(os, kWavSampleRate * 2);  // byte rate
    detail::write_u16(os, 2);                   // block align
    detail::write_u16(os, 16);                  // bits
    detail::write_magic(os, "data");
    detail::write_u32(os, data_bytes);
    for (double v : audio) {
        long long s = std::llround(v * 32768.0);
        s = std::clamp<long long>(s, -32768, 32767);
        detail::write_u16(os, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
    }
    if (!os) throw std::runtime_error("file: write failed: " + path);
}

}  // namespace qlab
