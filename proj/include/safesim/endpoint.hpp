#pragma once

#include "safesim/scl_frame.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>

namespace safesim {

// Serial (wrap-aware) sequence comparison with a half-range window of 2^31.
// seq_after(a, b) is true when a is strictly newer than b.
inline bool seq_after(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::int32_t>(a - b) > 0;
}

enum class DegradationState {
    Healthy,
    Warning,
    Degrade,
    SafeStopRequest,
    OverrideRequest,
};

std::string_view to_string(DegradationState s);

// Escalation action attached to a verdict, one cell per failure-mode row:
// transient column first, persistent column once the mode's counter trips.
enum class SafetyAction {
    None,
    Retry,
    Degrade,
    SafeStop,
    Override,
};

std::string_view to_string(SafetyAction a);

struct EndpointConfig {
    std::uint64_t freshness_budget_ns = 5'000'000;
    std::uint32_t persistent_corrupt_threshold = 3;
    std::uint32_t persistent_replay_threshold = 3;
    std::uint32_t persistent_stale_threshold = 3;
    std::uint64_t loss_timeout_ns = 3'000'000; // 3x the 1 ms expected period
    std::uint64_t failure_window_ns = 100'000'000;
};

struct EndpointState {
    std::optional<std::uint32_t> last_accepted_seqno;
    std::uint64_t last_receipt_ns = 0;
    std::uint32_t consecutive_crc_failures = 0;
    std::uint32_t consecutive_stale = 0;
    std::deque<std::uint64_t> replay_events_in_window;
    DegradationState health = DegradationState::Healthy;
};

enum class VerdictKind {
    Accept,
    DropCorrupt,
    DropReplay,
    DropStale,
    GapDetected, // accepted, but with missing predecessors recorded as loss
};

std::string_view to_string(VerdictKind k);

struct ReceiveVerdict {
    VerdictKind kind = VerdictKind::Accept;
    SafetyAction action = SafetyAction::None;
    std::optional<SclFrame> frame;      // present for Accept / GapDetected
    std::uint32_t missing_count = 0;    // GapDetected only
};

// Classifies one decoded frame (or corruption report) against the endpoint's
// receive state. Pure transition: returns the verdict and mutates state.
ReceiveVerdict classify(EndpointState& state, const EndpointConfig& cfg,
                        const DecodeResult& decoded, std::uint64_t now_ns);

// Loss watchdog: None within one timeout of the last receipt, Retry after
// one timeout, Override once silence persists past twice the timeout.
SafetyAction check_loss(const EndpointState& state, const EndpointConfig& cfg,
                        std::uint64_t now_ns);

// Per (channel, direction) send counter; wraps through 0xFFFFFFFF -> 0.
class SeqnoGenerator {
public:
    std::uint32_t next() { return next_++; }

private:
    std::uint32_t next_ = 0;
};

} // namespace safesim
