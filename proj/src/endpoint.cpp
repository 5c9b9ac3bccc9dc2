#include "safesim/endpoint.hpp"

#include <algorithm>

namespace safesim {

namespace {

DegradationState health_for(SafetyAction action) {
    switch (action) {
        case SafetyAction::None: return DegradationState::Healthy;
        case SafetyAction::Retry: return DegradationState::Warning;
        case SafetyAction::Degrade: return DegradationState::Degrade;
        case SafetyAction::SafeStop: return DegradationState::SafeStopRequest;
        case SafetyAction::Override: return DegradationState::OverrideRequest;
    }
    return DegradationState::Healthy;
}

// Health only ratchets upward within a drop; Accept resets it below.
void escalate(EndpointState& state, SafetyAction action) {
    DegradationState h = health_for(action);
    if (action != SafetyAction::None && h == DegradationState::Healthy) {
        h = DegradationState::Warning;
    }
    state.health = std::max(state.health, h);
}

void prune_replay_window(EndpointState& state, const EndpointConfig& cfg,
                         std::uint64_t now_ns) {
    while (!state.replay_events_in_window.empty() &&
           now_ns - state.replay_events_in_window.front() > cfg.failure_window_ns) {
        state.replay_events_in_window.pop_front();
    }
}

} // namespace

std::string_view to_string(DegradationState s) {
    switch (s) {
        case DegradationState::Healthy: return "Healthy";
        case DegradationState::Warning: return "Warning";
        case DegradationState::Degrade: return "Degrade";
        case DegradationState::SafeStopRequest: return "SafeStopRequest";
        case DegradationState::OverrideRequest: return "OverrideRequest";
    }
    return "?";
}

std::string_view to_string(SafetyAction a) {
    switch (a) {
        case SafetyAction::None: return "None";
        case SafetyAction::Retry: return "Retry";
        case SafetyAction::Degrade: return "Degrade";
        case SafetyAction::SafeStop: return "SafeStop";
        case SafetyAction::Override: return "Override";
    }
    return "?";
}

std::string_view to_string(VerdictKind k) {
    switch (k) {
        case VerdictKind::Accept: return "Accept";
        case VerdictKind::DropCorrupt: return "DropCorrupt";
        case VerdictKind::DropReplay: return "DropReplay";
        case VerdictKind::DropStale: return "DropStale";
        case VerdictKind::GapDetected: return "GapDetected";
    }
    return "?";
}

ReceiveVerdict classify(EndpointState& state, const EndpointConfig& cfg,
                        const DecodeResult& decoded, std::uint64_t now_ns) {
    ReceiveVerdict verdict;

    if (!is_intact(decoded)) {
        state.consecutive_crc_failures += 1;
        verdict.kind = VerdictKind::DropCorrupt;
        verdict.action = state.consecutive_crc_failures >= cfg.persistent_corrupt_threshold
                             ? SafetyAction::SafeStop
                             : SafetyAction::Retry;
        escalate(state, verdict.action);
        return verdict;
    }

    const SclFrame& frame = std::get<SclFrame>(decoded);

    // Replay / duplicate / stale reorder: serially not newer than the last accept.
    if (state.last_accepted_seqno && !seq_after(frame.seqno, *state.last_accepted_seqno)) {
        prune_replay_window(state, cfg, now_ns);
        state.replay_events_in_window.push_back(now_ns);
        verdict.kind = VerdictKind::DropReplay;
        verdict.action = state.replay_events_in_window.size() >= cfg.persistent_replay_threshold
                             ? SafetyAction::Degrade
                             : SafetyAction::None;
        escalate(state, verdict.action);
        return verdict;
    }

    if (now_ns - frame.timestamp_ns > cfg.freshness_budget_ns) {
        state.consecutive_stale += 1;
        verdict.kind = VerdictKind::DropStale;
        verdict.action = state.consecutive_stale >= cfg.persistent_stale_threshold
                             ? SafetyAction::SafeStop
                             : SafetyAction::Degrade;
        escalate(state, verdict.action);
        return verdict;
    }

    // Intact, fresh, newer: accept. A gap is still an accept; the missing
    // frames are reported as loss events rather than the newer data dropped.
    if (state.last_accepted_seqno && frame.seqno != *state.last_accepted_seqno + 1) {
        verdict.kind = VerdictKind::GapDetected;
        verdict.missing_count = frame.seqno - *state.last_accepted_seqno - 1;
    } else {
        verdict.kind = VerdictKind::Accept;
    }
    verdict.action = SafetyAction::None;
    verdict.frame = frame;

    state.last_accepted_seqno = frame.seqno;
    state.last_receipt_ns = now_ns;
    // This frame disproves corruption and staleness; replay evidence is
    // time-windowed and decays on its own.
    state.consecutive_crc_failures = 0;
    state.consecutive_stale = 0;
    prune_replay_window(state, cfg, now_ns);
    state.health = state.replay_events_in_window.size() >= cfg.persistent_replay_threshold
                       ? DegradationState::Degrade
                       : DegradationState::Healthy;
    return verdict;
}

SafetyAction check_loss(const EndpointState& state, const EndpointConfig& cfg,
                        std::uint64_t now_ns) {
    const std::uint64_t silence = now_ns - state.last_receipt_ns;
    if (silence <= cfg.loss_timeout_ns) return SafetyAction::None;
    if (silence <= 2 * cfg.loss_timeout_ns) return SafetyAction::Retry;
    return SafetyAction::Override;
}

} // namespace safesim
