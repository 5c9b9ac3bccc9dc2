#include "safesim/scl_frame.hpp"

#include "safesim/crc32c.hpp"

#include <cstring>

namespace safesim {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

bool valid_msg_type(std::uint8_t v) { return v >= 1 && v <= 5; }
bool valid_channel(std::uint8_t v) { return v <= 1; }

} // namespace

std::string_view to_string(CorruptReason reason) {
    switch (reason) {
        case CorruptReason::BadMagic: return "BadMagic";
        case CorruptReason::BadLength: return "BadLength";
        case CorruptReason::BadCrc: return "BadCrc";
        case CorruptReason::UnknownMsgType: return "UnknownMsgType";
        case CorruptReason::UnknownChannel: return "UnknownChannel";
    }
    return "?";
}

std::optional<std::vector<std::uint8_t>> encode(const SclFrame& frame) {
    if (frame.payload.size() > kMaxPayload) return std::nullopt;

    std::vector<std::uint8_t> out;
    out.reserve(kMinFrameSize + frame.payload.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(static_cast<std::uint8_t>(frame.channel_id));
    out.push_back(static_cast<std::uint8_t>(frame.msg_type));
    put_u16(out, static_cast<std::uint16_t>(frame.payload.size()));
    put_u32(out, frame.seqno);
    put_u64(out, frame.timestamp_ns);
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    put_u32(out, crc32c({out.data(), out.size()}));
    return out;
}

DecodeResult decode(std::span<const std::uint8_t> raw) {
    // A buffer shorter than the minimum frame cannot carry a full header,
    // so truncation reports BadLength before any field check.
    if (raw.size() < kMinFrameSize) {
        return CorruptReason::BadLength;
    }
    if (std::memcmp(raw.data(), kMagic, 4) != 0) {
        return CorruptReason::BadMagic;
    }
    const std::uint16_t payload_len = get_u16(raw.data() + 6);
    if (payload_len > kMaxPayload || raw.size() != kMinFrameSize + payload_len) {
        return CorruptReason::BadLength;
    }
    const std::size_t covered = kHeaderSize + payload_len;
    const std::uint32_t wire_crc = get_u32(raw.data() + covered);
    if (crc32c(raw.first(covered)) != wire_crc) {
        return CorruptReason::BadCrc;
    }
    const std::uint8_t msg_type = raw[5];
    if (!valid_msg_type(msg_type)) return CorruptReason::UnknownMsgType;
    const std::uint8_t channel = raw[4];
    if (!valid_channel(channel)) return CorruptReason::UnknownChannel;

    SclFrame frame;
    frame.channel_id = static_cast<ChannelId>(channel);
    frame.msg_type = static_cast<MsgType>(msg_type);
    frame.seqno = get_u32(raw.data() + 8);
    frame.timestamp_ns = get_u64(raw.data() + 12);
    frame.payload.assign(raw.begin() + kHeaderSize, raw.begin() + covered);
    return frame;
}

} // namespace safesim
