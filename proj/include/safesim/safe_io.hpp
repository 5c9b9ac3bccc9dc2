#pragma once

#include "safesim/endpoint.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace safesim {

enum class SafeIoMode {
    Normal,
    Degraded,
    SafeStop,
};

std::string_view to_string(SafeIoMode m);

enum class SafeIoCause {
    None,
    EnvelopeViolation,
    HeartbeatTimeout,
    SclDegrade,
    SclSafeStop,
    SclOverride,
    OperatorEstop,
    OperatorAck,
    Recovered,
};

std::string_view to_string(SafeIoCause c);

struct AxisEnvelope {
    double position_min = 0.0;
    double position_max = 0.0;
    double velocity_max = 0.0;
    double torque_max = 0.0;
};

struct SafeIoConfig {
    std::uint64_t heartbeat_period_ns = 1'000'000;
    std::uint32_t heartbeat_timeout_multiple = 3;
    std::map<std::string, AxisEnvelope> envelopes;
    double degraded_scale = 0.5;           // velocity/torque derate in DEGRADED
    std::uint64_t recovery_window_ns = 1'000'000'000; // sustained-healthy exit from DEGRADED
};

// Physical-output model. SAFE_STOP forces motors off and brakes on; the
// estop line is reserved for physical-hazard causes (envelope, operator).
struct OverrideLines {
    bool motor_enable = true;
    bool brake_engaged = false;
    bool estop_asserted = false;

    bool operator==(const OverrideLines&) const = default;
};

struct SafeIoState {
    SafeIoMode mode = SafeIoMode::Normal;
    SafeIoCause cause = SafeIoCause::None;
    std::uint64_t entered_at_ns = 0;
    bool ack_required = false;
    std::uint64_t last_heartbeat_ns = 0;
    std::uint64_t last_anomaly_ns = 0; // recovery window anchor
};

struct AxisCommand {
    double position = 0.0;
    double velocity = 0.0;
    double torque = 0.0;
};

struct EnvelopeViolationInfo {
    std::string axis;
    std::string quantity; // "position" | "velocity" | "torque"
    double value = 0.0;
    double limit = 0.0;
};

struct SafetyEvent {
    enum class Kind {
        HeartbeatSeen,
        HeartbeatTimeout,
        EnvelopeViolation,
        SclAction,
        OperatorAck,
        OperatorEstop,
    };
    Kind kind = Kind::HeartbeatSeen;
    std::uint64_t timestamp_ns = 0;
    SafetyAction scl_action = SafetyAction::None; // SclAction only
    EnvelopeViolationInfo violation;              // EnvelopeViolation only
};

std::string_view to_string(SafetyEvent::Kind k);

// One state-machine transition. Consumes only the event and config; never
// reads PSS or RT-domain internals.
std::pair<SafeIoState, OverrideLines> step(const SafeIoState& state, const SafeIoConfig& cfg,
                                           const SafetyEvent& event, std::uint64_t now_ns);

OverrideLines lines_for(const SafeIoState& state);

// Envelope check for a command set; in DEGRADED the velocity/torque limits
// shrink by degraded_scale. First violation wins (axes in name order;
// position, velocity, torque within an axis).
enum class EnvelopeError { UnknownAxis };
std::optional<std::variant<EnvelopeViolationInfo, EnvelopeError>>
check_envelope(const SafeIoConfig& cfg, const std::map<std::string, AxisCommand>& command,
               SafeIoMode mode);

// Heartbeat watchdog: emits HeartbeatTimeout once silence exceeds
// period * multiple.
std::optional<SafetyEvent> supervise_heartbeat(const SafeIoState& state, const SafeIoConfig& cfg,
                                               std::uint64_t now_ns);

} // namespace safesim
