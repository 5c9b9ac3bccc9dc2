#pragma once

#include "safesim/channel.hpp"
#include "safesim/endpoint.hpp"
#include "safesim/phase_noise.hpp"
#include "safesim/pss.hpp"
#include "safesim/safe_io.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace safesim {

// Scripted external stimuli, applied at their timestamps before any cell
// runs at that instant.
struct ActionParamUpdate {
    std::string name;
    ParamValue value{0.0};
};

struct ActionSilenceHeartbeats {
    std::uint64_t duration_ns = 0;
};

struct ActionInjectEnvelopeCommand {
    std::string axis;
    AxisCommand command;
};

struct ActionSetFaultModel {
    std::uint8_t channel = 0;
    ChannelFaultModel faults;
};

struct ActionOperatorAck {};
struct ActionOperatorEstop {};

using ScriptAction = std::variant<ActionParamUpdate, ActionSilenceHeartbeats,
                                  ActionInjectEnvelopeCommand, ActionSetFaultModel,
                                  ActionOperatorAck, ActionOperatorEstop>;

struct ScriptEntry {
    std::uint64_t at_ns = 0;
    ScriptAction action;
};

struct TimingNoiseConfig {
    PhaseNoise::Params params; // default: noiseless
};

struct Scenario {
    std::uint64_t duration_ns = 0;
    std::uint64_t seed = 0;
    ChannelFaultModel pss_channel_faults;
    ChannelFaultModel rt_monitor_channel_faults;
    EndpointConfig endpoint_cfg;
    SafeIoConfig safe_io_cfg;
    SyncManagerConfig sync_cfg;
    std::vector<ParamDescriptor> param_declarations;
    TimingNoiseConfig timing_noise;
    std::vector<ScriptEntry> script; // sorted by at_ns

    std::uint64_t rt_tick_ns = 1'000'000;       // 1 kHz control tick
    std::uint64_t non_rt_tick_ns = 10'000'000;  // service tick
    std::uint64_t safe_io_tick_ns = 1'000'000;  // supervision tick
};

struct InvalidScenario : std::runtime_error {
    // what() carries the offending field path.
    using std::runtime_error::runtime_error;
};

// Parses and validates the scenario JSON document. Throws InvalidScenario
// on malformed input or violated invariants.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

} // namespace safesim
