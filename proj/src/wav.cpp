#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "vatscope/audio.hpp"
#include "vatscope/error.hpp"
#include "vatscope/io.hpp"

namespace vatscope {

namespace {

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
    return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}
std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}
std::string chunk_name(std::span<const std::uint8_t> b, std::size_t at) {
    return std::string(reinterpret_cast<const char*>(b.data() + at), 4);
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

struct Format {
    std::uint16_t code = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t block_align = 0;
    std::uint16_t bits = 0;
};

double decode_sample(std::span<const std::uint8_t> p, const Format& f) {
    if (f.code == kFormatFloat) {
        if (f.bits == 32) return std::bit_cast<float>(le32(p, 0));
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
        return std::bit_cast<double>(v);
    }
    std::int64_t v = 0;
    switch (f.bits) {
        case 16: v = static_cast<std::int16_t>(le16(p, 0)); break;
        case 24: {
            std::int32_t raw = p[0] | (p[1] << 8) | (p[2] << 16);
            if (raw & 0x800000) raw -= 0x1000000;
            v = raw;
            break;
        }
        case 32: v = static_cast<std::int32_t>(le32(p, 0)); break;
    }
    return static_cast<double>(v) / std::ldexp(1.0, f.bits - 1);
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 12) throw InputError("WAV: truncated RIFF header");
    if (chunk_name(bytes, 0) != "RIFF" || chunk_name(bytes, 8) != "WAVE")
        throw InputError("WAV: missing RIFF/WAVE header");

    Format fmt;
    bool have_fmt = false;
    std::span<const std::uint8_t> data;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const auto id = chunk_name(bytes, pos);
        const std::size_t size = le32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body)
            throw InputError("WAV: chunk '" + id + "' declares " + std::to_string(size) + " bytes but only " +
                             std::to_string(bytes.size() - body) + " remain (truncated file)");
        if (id == "fmt ") {
            if (size < 16) throw InputError("WAV: chunk 'fmt ' is too short");
            fmt.code = le16(bytes, body);
            fmt.channels = le16(bytes, body + 2);
            fmt.rate = le32(bytes, body + 4);
            fmt.block_align = le16(bytes, body + 12);
            fmt.bits = le16(bytes, body + 14);
            if (fmt.code == kFormatExtensible) {
                if (size < 40) throw InputError("WAV: chunk 'fmt ' extensible header is too short");
                fmt.code = le16(bytes, body + 24);  // first two bytes of the sub-format GUID
            }
            have_fmt = true;
        } else if (id == "data") {
            data = bytes.subspan(body, size);
            have_data = true;
        }
        pos = body + size + (size & 1);
    }
    if (!have_fmt) throw InputError("WAV: missing chunk 'fmt '");
    if (!have_data) throw InputError("WAV: missing chunk 'data'");

    const bool pcm_ok = fmt.code == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24 || fmt.bits == 32);
    const bool float_ok = fmt.code == kFormatFloat && (fmt.bits == 32 || fmt.bits == 64);
    if (!pcm_ok && !float_ok)
        throw InputError("WAV: chunk 'fmt ' declares unsupported codec " + std::to_string(fmt.code) + " with " +
                         std::to_string(fmt.bits) + "-bit samples");
    if (fmt.channels == 0) throw InputError("WAV: chunk 'fmt ' declares zero channels");
    if (fmt.rate == 0) throw InputError("WAV: chunk 'fmt ' declares a zero sample rate");
    const std::size_t width = fmt.bits / 8;
    if (fmt.block_align != width * fmt.channels)
        throw InputError("WAV: chunk 'fmt ' block alignment does not match channels x sample width");
    if (data.size() % fmt.block_align != 0) throw InputError("WAV: chunk 'data' ends mid-frame (truncated file)");

    const std::size_t frames = data.size() / fmt.block_align;
    AudioClip clip{std::vector<double>(frames), static_cast<double>(fmt.rate)};
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < fmt.channels; ++c)
            acc += decode_sample(data.subspan(i * fmt.block_align + c * width, width), fmt);
        const double v = acc / fmt.channels;
        if (!std::isfinite(v)) throw InputError("WAV: chunk 'data' holds a non-finite sample");
        clip.samples[i] = v;
    }
    return clip;
}

AudioClip read_wav(const std::filesystem::path& path) {
    try {
        return decode_wav(read_file_bytes(path));
    } catch (const InputError& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

std::vector<std::uint8_t> encode_wav(std::span<const std::vector<double>> channels, std::uint32_t rate,
                                     WavSampleFormat format) {
    if (channels.empty()) throw InputError("encode_wav: no channels");
    const std::size_t frames = channels.front().size();
    for (const auto& ch : channels)
        if (ch.size() != frames) throw InputError("encode_wav: channel lengths differ");

    const std::uint16_t bits = format == WavSampleFormat::pcm16 ? 16 : format == WavSampleFormat::pcm24 ? 24 : 32;
    const std::uint16_t code = format == WavSampleFormat::float32 ? kFormatFloat : kFormatPcm;
    const std::uint16_t nch = static_cast<std::uint16_t>(channels.size());
    const std::uint16_t align = static_cast<std::uint16_t>(nch * bits / 8);
    const std::uint32_t data_size = static_cast<std::uint32_t>(frames * align);

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    auto put = [&](std::uint64_t v, int n) {
        for (int k = 0; k < n; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    };
    auto tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };
    tag("RIFF");
    put(36 + data_size, 4);
    tag("WAVE");
    tag("fmt ");
    put(16, 4);
    put(code, 2);
    put(nch, 2);
    put(rate, 4);
    put(static_cast<std::uint64_t>(rate) * align, 4);
    put(align, 2);
    put(bits, 2);
    tag("data");
    put(data_size, 4);

    const double scale = std::ldexp(1.0, bits - 1);
    for (std::size_t i = 0; i < frames; ++i) {
        for (const auto& ch : channels) {
            if (format == WavSampleFormat::float32) {
                put(std::bit_cast<std::uint32_t>(static_cast<float>(ch[i])), 4);
            } else {
                const double q = std::clamp(std::round(ch[i] * scale), -scale, scale - 1.0);
                put(static_cast<std::uint64_t>(static_cast<std::int64_t>(q)), bits / 8);
            }
        }
    }
    return out;
}

}  // namespace vatscope
