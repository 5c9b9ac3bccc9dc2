#pragma once

#include "safesim/jitter.hpp"
#include "safesim/scenario.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace safesim {

// One append-only log record; serialized as a JSONL line.
struct LogEvent {
    std::uint64_t t_ns = 0;
    std::string source_cell; // "safe_io" | "rt" | "non_rt" | "script"
    std::string kind;
    std::string detail_json; // JSON object with event-specific fields
};

struct FinalState {
    SafeIoState safe_io;
    OverrideLines lines;
    std::vector<std::pair<std::string, ParamValue>> params;
    ChannelStats pss_down;   // Non-RT -> RT
    ChannelStats pss_up;     // RT -> Non-RT (acks)
    ChannelStats rt_monitor; // RT -> Safe IO
    std::uint64_t acked_txns = 0;
    std::uint64_t exhausted_txns = 0;
    std::uint64_t stale_acks = 0;
};

struct RunResult {
    std::vector<LogEvent> events;
    FinalState final_state;
    std::vector<TraceRecord> frame_trace;
};

// Advances the deterministic event queue to scenario.duration_ns. Ties are
// processed script first, then Safe IO, RT, Non-RT.
RunResult run(const Scenario& scenario);

std::string event_to_jsonl(const LogEvent& ev);
std::string final_state_to_json(const FinalState& fs);
void write_run_outputs(const RunResult& result, const std::string& out_dir);

// CLI entry point shared by the `simrun` binary and the acceptance suite.
// Exit codes: 0 clean, 1 I/O error, 2 invalid scenario, 3 final SAFE_STOP
// without --expect-safe-stop.
int run_cli(const std::vector<std::string>& args);

} // namespace safesim
