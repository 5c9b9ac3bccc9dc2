#include "safesim/scl_frame.hpp"

#include "safesim/crc32c.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <string>

using namespace safesim;

namespace {

SclFrame random_frame(std::mt19937_64& rng, std::size_t max_payload = kMaxPayload) {
    SclFrame f;
    f.channel_id = static_cast<ChannelId>(rng() % 2);
    f.msg_type = static_cast<MsgType>(1 + rng() % 5);
    f.seqno = static_cast<std::uint32_t>(rng());
    f.timestamp_ns = rng();
    f.payload.resize(rng() % (max_payload + 1));
    for (auto& b : f.payload) b = static_cast<std::uint8_t>(rng());
    return f;
}

} // namespace

TEST_CASE("empty heartbeat encodes to 24 bytes with trailing crc") {
    SclFrame f;
    f.msg_type = MsgType::Heartbeat;
    const auto raw = encode(f);
    REQUIRE(raw.has_value());
    CHECK(raw->size() == 24);
    const std::uint32_t trailer = (*raw)[20] | ((*raw)[21] << 8) | ((*raw)[22] << 16) |
                                  (static_cast<std::uint32_t>((*raw)[23]) << 24);
    CHECK(trailer == crc32c(std::span(*raw).first(20)));
}

TEST_CASE("16-byte param update encodes to 40 bytes") {
    SclFrame f;
    f.msg_type = MsgType::ParamUpdate;
    f.payload.assign(16, 0xAB);
    CHECK(encode(f)->size() == 40);
}

TEST_CASE("payload over 1024 bytes is rejected") {
    SclFrame f;
    f.payload.assign(1025, 0);
    CHECK_FALSE(encode(f).has_value());
}

TEST_CASE("roundtrip identity on fuzzed frames") {
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 100000; ++i) {
        const SclFrame f = random_frame(rng, 64); // small payloads keep this fast
        const auto raw = encode(f);
        REQUIRE(raw.has_value());
        const DecodeResult decoded = decode(*raw);
        REQUIRE(is_intact(decoded));
        CHECK(std::get<SclFrame>(decoded) == f);
    }
}

TEST_CASE("every single-bit flip of a heartbeat frame is detected") {
    SclFrame f;
    f.channel_id = ChannelId::RtMonitor;
    f.msg_type = MsgType::Heartbeat;
    f.seqno = 7;
    f.timestamp_ns = 123456789;
    auto raw = *encode(f);
    REQUIRE(raw.size() == 24);

    for (std::size_t bit = 0; bit < raw.size() * 8; ++bit) {
        raw[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        CHECK_FALSE(is_intact(decode(raw)));
        raw[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    }
}

TEST_CASE("single-bit flips over larger frames never decode intact") {
    std::mt19937_64 rng(99);
    const SclFrame f = [&] {
        SclFrame frame = random_frame(rng, 40);
        frame.payload.resize(40);
        return frame;
    }();
    auto raw = *encode(f);
    for (std::size_t bit = 0; bit < raw.size() * 8; ++bit) {
        raw[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
        CHECK_FALSE(is_intact(decode(raw)));
        raw[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    }
}

TEST_CASE("contiguous bursts up to 32 bits never decode intact") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 10000; ++trial) {
        const SclFrame f = random_frame(rng, 32);
        auto raw = *encode(f);
        const std::size_t total_bits = raw.size() * 8;
        const std::size_t burst_len = 1 + rng() % 32;
        const std::size_t start = rng() % (total_bits - burst_len + 1);

        // Random corruption inside the burst, guaranteed non-identity at the ends.
        bool changed = false;
        for (std::size_t bit = start; bit < start + burst_len; ++bit) {
            const bool flip = (bit == start || bit + 1 == start + burst_len) || (rng() & 1);
            if (flip) {
                raw[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
                changed = true;
            }
        }
        REQUIRE(changed);
        CHECK_FALSE(is_intact(decode(raw)));
    }
}

TEST_CASE("short buffers report BadLength") {
    const std::vector<std::uint8_t> zeros(10, 0);
    const DecodeResult r = decode(zeros);
    REQUIRE_FALSE(is_intact(r));
    CHECK(std::get<CorruptReason>(r) == CorruptReason::BadLength);
}

TEST_CASE("corruption reasons follow the fixed check order") {
    SclFrame f;
    f.msg_type = MsgType::Command;
    f.payload = {1, 2, 3};
    auto raw = *encode(f);

    SUBCASE("bad magic") {
        auto bad = raw;
        bad[0] ^= 0xFF;
        CHECK(std::get<CorruptReason>(decode(bad)) == CorruptReason::BadMagic);
    }
    SUBCASE("inconsistent payload length") {
        auto bad = raw;
        bad[6] += 1;
        CHECK(std::get<CorruptReason>(decode(bad)) == CorruptReason::BadLength);
    }
    SUBCASE("payload corruption lands on the crc") {
        auto bad = raw;
        bad[21] ^= 0x10;
        CHECK(std::get<CorruptReason>(decode(bad)) == CorruptReason::BadCrc);
    }
    SUBCASE("unknown msg_type survives the crc only if re-signed") {
        auto bad = raw;
        bad[5] = 99;
        const std::uint32_t crc = crc32c(std::span(bad).first(bad.size() - 4));
        for (int i = 0; i < 4; ++i) bad[bad.size() - 4 + i] = static_cast<std::uint8_t>(crc >> (8 * i));
        CHECK(std::get<CorruptReason>(decode(bad)) == CorruptReason::UnknownMsgType);
    }
    SUBCASE("unknown channel, re-signed") {
        auto bad = raw;
        bad[4] = 9;
        const std::uint32_t crc = crc32c(std::span(bad).first(bad.size() - 4));
        for (int i = 0; i < 4; ++i) bad[bad.size() - 4 + i] = static_cast<std::uint8_t>(crc >> (8 * i));
        CHECK(std::get<CorruptReason>(decode(bad)) == CorruptReason::UnknownChannel);
    }
}

#ifdef VECTORS_DIR
namespace {

struct GoldenVector {
    SclFrame frame;
    std::vector<std::uint8_t> wire;
};

GoldenVector load_vector(const std::string& name) {
    std::ifstream in(std::string(VECTORS_DIR) + "/" + name + ".hex");
    REQUIRE(in.good());
    GoldenVector v;
    std::string line;
    bool in_frame = false;
    while (std::getline(in, line)) {
        if (line.rfind("frame:", 0) == 0) {
            in_frame = true;
            continue;
        }
        if (in_frame) {
            std::istringstream ss(line);
            std::string byte;
            while (ss >> byte) {
                v.wire.push_back(static_cast<std::uint8_t>(std::stoul(byte, nullptr, 16)));
            }
            continue;
        }
        const auto colon = line.find(": ");
        const std::string key = line.substr(0, colon);
        const std::string value = colon == std::string::npos ? "" : line.substr(colon + 2);
        if (key == "channel_id") v.frame.channel_id = static_cast<ChannelId>(std::stoul(value));
        else if (key == "msg_type") v.frame.msg_type = static_cast<MsgType>(std::stoul(value));
        else if (key == "seqno") v.frame.seqno = static_cast<std::uint32_t>(std::stoull(value));
        else if (key == "timestamp_ns") v.frame.timestamp_ns = std::stoull(value);
        else if (key == "payload") {
            for (std::size_t i = 0; i + 1 < value.size(); i += 2) {
                v.frame.payload.push_back(
                    static_cast<std::uint8_t>(std::stoul(value.substr(i, 2), nullptr, 16)));
            }
        }
    }
    return v;
}

} // namespace

TEST_CASE("golden vectors: the byte layout is frozen in both directions") {
    for (const char* name : {"heartbeat", "heartbeat_wrap", "param_update", "diagnostic"}) {
        CAPTURE(name);
        const GoldenVector v = load_vector(name);
        CHECK(*encode(v.frame) == v.wire);

        const auto decoded = decode({v.wire.data(), v.wire.size()});
        REQUIRE(std::holds_alternative<SclFrame>(decoded));
        const SclFrame& f = std::get<SclFrame>(decoded);
        CHECK(f.channel_id == v.frame.channel_id);
        CHECK(f.msg_type == v.frame.msg_type);
        CHECK(f.seqno == v.frame.seqno);
        CHECK(f.timestamp_ns == v.frame.timestamp_ns);
        CHECK(f.payload == v.frame.payload);
    }
}
#endif
