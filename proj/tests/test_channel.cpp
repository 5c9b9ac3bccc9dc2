#include "safesim/channel.hpp"

#include "safesim/endpoint.hpp"
#include "safesim/scl_frame.hpp"

#include <doctest.h>

#include <random>

using namespace safesim;

namespace {

RawBytes heartbeat_bytes(std::uint32_t seqno, std::uint64_t timestamp_ns) {
    SclFrame f;
    f.channel_id = ChannelId::RtMonitor;
    f.msg_type = MsgType::Heartbeat;
    f.seqno = seqno;
    f.timestamp_ns = timestamp_ns;
    return *encode(f);
}

} // namespace

TEST_CASE("identity channel delivers one bit-identical copy at the fixed delay") {
    ChannelFaultModel fm;
    fm.delay_fixed_ns = 1000;
    Channel ch(0, fm, 1);

    const RawBytes sent = heartbeat_bytes(0, 100);
    CHECK(ch.send(sent, 5000) == SendResult::Enqueued);
    CHECK(ch.doorbell());

    CHECK(ch.poll(5999).empty());
    const auto delivered = ch.poll(6000);
    REQUIRE(delivered.size() == 1);
    CHECK(delivered[0] == sent);
    CHECK_FALSE(ch.doorbell());
}

TEST_CASE("loss probability one delivers nothing") {
    ChannelFaultModel fm;
    fm.loss_prob = 1.0;
    Channel ch(0, fm, 1);
    for (int i = 0; i < 10; ++i) {
        CHECK(ch.send(heartbeat_bytes(i, 0), i) == SendResult::Lost);
    }
    CHECK(ch.poll(1'000'000).empty());
    CHECK(ch.stats().lost_injected == 10);
}

TEST_CASE("empty channel polls empty") {
    Channel ch(0, {}, 1);
    CHECK(ch.poll(123).empty());
}

TEST_CASE("frames delivered strictly in deliver-time order") {
    ChannelFaultModel fm;
    Channel ch(0, fm, 1);
    ch.send(heartbeat_bytes(0, 0), 1000);
    ch.send(heartbeat_bytes(1, 0), 2000);
    const auto first = ch.poll(1500);
    REQUIRE(first.size() == 1);
    CHECK(std::get<SclFrame>(decode(first[0])).seqno == 0);
    const auto second = ch.poll(2500);
    REQUIRE(second.size() == 1);
    CHECK(std::get<SclFrame>(decode(second[0])).seqno == 1);
}

TEST_CASE("forced reorder swaps adjacent frames") {
    ChannelFaultModel fm;
    fm.reorder_prob = 1.0;
    Channel ch(0, fm, 1);
    ch.send(heartbeat_bytes(10, 0), 1000); // A, marked for swap
    ch.send(heartbeat_bytes(11, 0), 1000); // B, takes A's slot
    const auto delivered = ch.poll(1000);
    REQUIRE(delivered.size() == 2);
    CHECK(std::get<SclFrame>(decode(delivered[0])).seqno == 11);
    CHECK(std::get<SclFrame>(decode(delivered[1])).seqno == 10);
}

TEST_CASE("duplicate probability one delivers two copies") {
    ChannelFaultModel fm;
    fm.dup_prob = 1.0;
    Channel ch(0, fm, 1);
    ch.send(heartbeat_bytes(0, 0), 0);
    CHECK(ch.poll(0).size() == 2);
    CHECK(ch.stats().duplicated == 1);
}

TEST_CASE("capacity overflow counts as loss") {
    ChannelFaultModel fm;
    fm.delay_fixed_ns = 1'000'000'000; // keep everything in flight
    Channel ch(0, fm, 1, 4);
    for (int i = 0; i < 6; ++i) ch.send(heartbeat_bytes(i, 0), 0);
    CHECK(ch.in_flight() == 4);
    CHECK(ch.stats().lost_overflow == 2);
}

TEST_CASE("same seed reproduces the same corruption pattern") {
    const auto run = [] {
        ChannelFaultModel fm;
        fm.bit_error_rate = 1e-3;
        fm.loss_prob = 0.1;
        fm.delay_jitter_ns = 500;
        Channel ch(0, fm, 77);
        std::vector<RawBytes> log;
        for (int i = 0; i < 500; ++i) {
            ch.send(heartbeat_bytes(i, i * 1000), i * 1000);
            for (auto& raw : ch.poll(i * 1000 + 400)) log.push_back(std::move(raw));
        }
        for (auto& raw : ch.poll(10'000'000)) log.push_back(std::move(raw));
        return log;
    };
    CHECK(run() == run());
}

TEST_CASE("conservation: every send is accounted for") {
    std::mt19937_64 rng(3);
    ChannelFaultModel fm;
    fm.loss_prob = 0.2;
    fm.dup_prob = 0.1;
    fm.delay_fixed_ns = 2000;
    Channel ch(0, fm, 9, 32);
    std::uint64_t now = 0;
    for (int i = 0; i < 2000; ++i) {
        now += rng() % 3000;
        ch.send(heartbeat_bytes(i, now), now);
        if (rng() % 4 == 0) ch.poll(now);
    }
    const ChannelStats& s = ch.stats();
    CHECK(s.enqueued + s.lost_injected + s.lost_overflow == s.sent + s.duplicated);
    CHECK(s.delivered + ch.in_flight() == s.enqueued);
}

TEST_CASE("identity channel end-to-end: every frame decodes intact and in order") {
    Channel ch(0, {}, 1);
    EndpointState st;
    EndpointConfig cfg;
    std::uint64_t now = 1'000'000;
    for (std::uint32_t i = 0; i < 1000; ++i) {
        now += 1'000'000;
        ch.send(heartbeat_bytes(i, now), now);
        const auto delivered = ch.poll(now);
        REQUIRE(delivered.size() == 1);
        const auto verdict = classify(st, cfg, decode(delivered[0]), now);
        REQUIRE(verdict.kind == VerdictKind::Accept);
    }
}

TEST_CASE("with ber=1e-4 over 1e5 frames no corrupted frame is ever accepted") {
    ChannelFaultModel fm;
    fm.bit_error_rate = 1e-4;
    Channel ch(0, fm, 1234);
    EndpointState st;
    EndpointConfig cfg;

    std::uint64_t corrupted_accepts = 0;
    std::uint64_t corrupt_drops = 0;
    std::uint64_t now = 1'000'000;
    for (std::uint32_t i = 0; i < 100'000; ++i) {
        now += 1'000'000;
        const RawBytes sent = heartbeat_bytes(i, now);
        ch.send(sent, now);
        for (const auto& raw : ch.poll(now)) {
            const bool tampered = raw != sent;
            const auto verdict = classify(st, cfg, decode(raw), now);
            if (tampered) {
                if (verdict.kind == VerdictKind::Accept ||
                    verdict.kind == VerdictKind::GapDetected) {
                    ++corrupted_accepts;
                } else {
                    ++corrupt_drops;
                }
            }
        }
    }
    CHECK(corrupted_accepts == 0);
    CHECK(corrupt_drops > 0); // the fault injection actually fired
    CHECK(corrupt_drops == ch.stats().corrupted);
}
