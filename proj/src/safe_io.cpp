#include "safesim/safe_io.hpp"

#include <algorithm>
#include <cmath>

namespace safesim {

std::string_view to_string(SafeIoMode m) {
    switch (m) {
        case SafeIoMode::Normal: return "NORMAL";
        case SafeIoMode::Degraded: return "DEGRADED";
        case SafeIoMode::SafeStop: return "SAFE_STOP";
    }
    return "?";
}

std::string_view to_string(SafeIoCause c) {
    switch (c) {
        case SafeIoCause::None: return "none";
        case SafeIoCause::EnvelopeViolation: return "envelope_violation";
        case SafeIoCause::HeartbeatTimeout: return "heartbeat_timeout";
        case SafeIoCause::SclDegrade: return "scl_degrade";
        case SafeIoCause::SclSafeStop: return "scl_safe_stop";
        case SafeIoCause::SclOverride: return "scl_override";
        case SafeIoCause::OperatorEstop: return "operator_estop";
        case SafeIoCause::OperatorAck: return "operator_ack";
        case SafeIoCause::Recovered: return "recovered";
    }
    return "?";
}

std::string_view to_string(SafetyEvent::Kind k) {
    switch (k) {
        case SafetyEvent::Kind::HeartbeatSeen: return "heartbeat_seen";
        case SafetyEvent::Kind::HeartbeatTimeout: return "heartbeat_timeout";
        case SafetyEvent::Kind::EnvelopeViolation: return "envelope_violation";
        case SafetyEvent::Kind::SclAction: return "scl_action";
        case SafetyEvent::Kind::OperatorAck: return "operator_ack";
        case SafetyEvent::Kind::OperatorEstop: return "operator_estop";
    }
    return "?";
}

OverrideLines lines_for(const SafeIoState& state) {
    OverrideLines lines;
    switch (state.mode) {
        case SafeIoMode::Normal:
        case SafeIoMode::Degraded:
            lines.motor_enable = true;
            lines.brake_engaged = false;
            lines.estop_asserted = false;
            break;
        case SafeIoMode::SafeStop:
            lines.motor_enable = false;
            lines.brake_engaged = true;
            lines.estop_asserted = state.cause == SafeIoCause::EnvelopeViolation ||
                                   state.cause == SafeIoCause::OperatorEstop;
            break;
    }
    return lines;
}

namespace {

SafeIoState enter(const SafeIoState& prev, SafeIoMode mode, SafeIoCause cause,
                  std::uint64_t now_ns) {
    SafeIoState next = prev;
    next.mode = mode;
    next.cause = cause;
    next.entered_at_ns = now_ns;
    next.ack_required = mode == SafeIoMode::SafeStop;
    return next;
}

} // namespace

std::pair<SafeIoState, OverrideLines> step(const SafeIoState& state, const SafeIoConfig& cfg,
                                           const SafetyEvent& event, std::uint64_t now_ns) {
    SafeIoState next = state;

    switch (event.kind) {
        case SafetyEvent::Kind::HeartbeatSeen:
            next.last_heartbeat_ns = now_ns;
            if (state.mode == SafeIoMode::Degraded) {
                // Auto-recovery: sustained healthy traffic since the later of
                // entry and the last anomaly.
                const std::uint64_t anchor = std::max(state.entered_at_ns, state.last_anomaly_ns);
                if (now_ns - anchor >= cfg.recovery_window_ns) {
                    next = enter(next, SafeIoMode::Normal, SafeIoCause::Recovered, now_ns);
                }
            }
            break;

        case SafetyEvent::Kind::HeartbeatTimeout:
            // The timeout already encodes persistence (period x multiple of
            // silence), so it latches SAFE_STOP directly.
            next.last_anomaly_ns = now_ns;
            if (state.mode != SafeIoMode::SafeStop) {
                next = enter(next, SafeIoMode::SafeStop, SafeIoCause::HeartbeatTimeout, now_ns);
            }
            break;

        case SafetyEvent::Kind::EnvelopeViolation:
            next.last_anomaly_ns = now_ns;
            if (state.mode != SafeIoMode::SafeStop) {
                next = enter(next, SafeIoMode::SafeStop, SafeIoCause::EnvelopeViolation, now_ns);
            }
            break;

        case SafetyEvent::Kind::SclAction:
            switch (event.scl_action) {
                case SafetyAction::Degrade:
                    next.last_anomaly_ns = now_ns;
                    if (state.mode == SafeIoMode::Normal) {
                        next = enter(next, SafeIoMode::Degraded, SafeIoCause::SclDegrade, now_ns);
                    }
                    break;
                case SafetyAction::SafeStop:
                    next.last_anomaly_ns = now_ns;
                    if (state.mode != SafeIoMode::SafeStop) {
                        next = enter(next, SafeIoMode::SafeStop, SafeIoCause::SclSafeStop, now_ns);
                    }
                    break;
                case SafetyAction::Override:
                    next.last_anomaly_ns = now_ns;
                    if (state.mode != SafeIoMode::SafeStop) {
                        next = enter(next, SafeIoMode::SafeStop, SafeIoCause::SclOverride, now_ns);
                    }
                    break;
                case SafetyAction::Retry:
                    next.last_anomaly_ns = now_ns;
                    break;
                case SafetyAction::None:
                    break;
            }
            break;

        case SafetyEvent::Kind::OperatorAck:
            // The one sanctioned exit from SAFE_STOP.
            if (state.mode == SafeIoMode::SafeStop) {
                next = enter(next, SafeIoMode::Normal, SafeIoCause::OperatorAck, now_ns);
            }
            break;

        case SafetyEvent::Kind::OperatorEstop:
            next.last_anomaly_ns = now_ns;
            next = enter(next, SafeIoMode::SafeStop, SafeIoCause::OperatorEstop, now_ns);
            break;
    }

    return {next, lines_for(next)};
}

std::optional<std::variant<EnvelopeViolationInfo, EnvelopeError>>
check_envelope(const SafeIoConfig& cfg, const std::map<std::string, AxisCommand>& command,
               SafeIoMode mode) {
    const double scale = mode == SafeIoMode::Degraded ? cfg.degraded_scale : 1.0;
    for (const auto& [axis, cmd] : command) {
        auto it = cfg.envelopes.find(axis);
        if (it == cfg.envelopes.end()) return EnvelopeError::UnknownAxis;
        const AxisEnvelope& env = it->second;
        if (cmd.position < env.position_min || cmd.position > env.position_max) {
            return EnvelopeViolationInfo{axis, "position", cmd.position,
                                         cmd.position < env.position_min ? env.position_min
                                                                         : env.position_max};
        }
        // Position bounds are absolute; only rate/effort limits derate.
        if (std::abs(cmd.velocity) > env.velocity_max * scale) {
            return EnvelopeViolationInfo{axis, "velocity", cmd.velocity, env.velocity_max * scale};
        }
        if (std::abs(cmd.torque) > env.torque_max * scale) {
            return EnvelopeViolationInfo{axis, "torque", cmd.torque, env.torque_max * scale};
        }
    }
    return std::nullopt;
}

std::optional<SafetyEvent> supervise_heartbeat(const SafeIoState& state, const SafeIoConfig& cfg,
                                               std::uint64_t now_ns) {
    const std::uint64_t budget =
        cfg.heartbeat_period_ns * static_cast<std::uint64_t>(cfg.heartbeat_timeout_multiple);
    if (now_ns - state.last_heartbeat_ns > budget) {
        SafetyEvent ev;
        ev.kind = SafetyEvent::Kind::HeartbeatTimeout;
        ev.timestamp_ns = now_ns;
        return ev;
    }
    return std::nullopt;
}

} // namespace safesim
