#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace safesim {

// Wire unit crossing the partition boundary. Layout (all multi-byte fields
// little-endian except the magic, which is the 4 ASCII bytes "SCL1" in order):
//
//   offset  size  field
//   0       4     magic "SCL1"
//   4       1     channel_id
//   5       1     msg_type
//   6       2     payload_len
//   8       4     seqno
//   12      8     timestamp_ns
//   20      n     payload (n == payload_len, n <= 1024)
//   20+n    4     crc32c over bytes [0, 20+n)
//
// Total frame size: 24 + payload_len bytes.

inline constexpr std::uint8_t kMagic[4] = {0x53, 0x43, 0x4C, 0x31}; // "SCL1"
inline constexpr std::size_t kHeaderSize = 20;
inline constexpr std::size_t kMinFrameSize = 24;
inline constexpr std::size_t kMaxPayload = 1024;

enum class ChannelId : std::uint8_t {
    Pss = 0,
    RtMonitor = 1,
};

enum class MsgType : std::uint8_t {
    Heartbeat = 1,
    ParamUpdate = 2,
    ParamAck = 3,
    Command = 4,
    Diagnostic = 5,
};

struct SclFrame {
    ChannelId channel_id = ChannelId::Pss;
    MsgType msg_type = MsgType::Heartbeat;
    std::uint32_t seqno = 0;
    std::uint64_t timestamp_ns = 0;
    std::vector<std::uint8_t> payload;

    bool operator==(const SclFrame&) const = default;
};

enum class CorruptReason {
    BadMagic,
    BadLength,
    BadCrc,
    UnknownMsgType,
    UnknownChannel,
};

std::string_view to_string(CorruptReason reason);

using DecodeResult = std::variant<SclFrame, CorruptReason>;

inline bool is_intact(const DecodeResult& r) { return std::holds_alternative<SclFrame>(r); }

// Encodes a frame into its wire form. Returns nullopt if payload exceeds kMaxPayload.
std::optional<std::vector<std::uint8_t>> encode(const SclFrame& frame);

// Accepts arbitrary bytes. Checks are applied in a fixed order so a given
// corruption always reports the same reason: magic, length, crc, msg_type, channel.
DecodeResult decode(std::span<const std::uint8_t> raw);

} // namespace safesim
