#include "safesim/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <queue>

namespace safesim {

namespace {

using nlohmann::json;

json value_to_json(const ParamValue& v) {
    if (const auto* d = std::get_if<double>(&v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
    return std::get<bool>(v);
}

json lines_to_json(const OverrideLines& lines) {
    return json{{"motor_enable", lines.motor_enable},
                {"brake_engaged", lines.brake_engaged},
                {"estop_asserted", lines.estop_asserted}};
}

json stats_to_json(const ChannelStats& s) {
    return json{{"sent", s.sent},
                {"enqueued", s.enqueued},
                {"delivered", s.delivered},
                {"lost_injected", s.lost_injected},
                {"lost_overflow", s.lost_overflow},
                {"duplicated", s.duplicated},
                {"corrupted", s.corrupted}};
}

// Tie-break: script stimuli first, then the safety authority, then the
// cells it supervises.
enum class EvKind : int {
    Script = 0,
    SafeIoTick = 1,
    RtTick = 2,
    NonRtTick = 3,
};

struct QueuedEvent {
    std::uint64_t t_ns;
    EvKind kind;
    std::uint64_t seq;
    std::size_t script_index = 0;

    bool operator>(const QueuedEvent& other) const {
        if (t_ns != other.t_ns) return t_ns > other.t_ns;
        if (kind != other.kind) return static_cast<int>(kind) > static_cast<int>(other.kind);
        return seq > other.seq;
    }
};

class Simulator {
public:
    explicit Simulator(const Scenario& sc)
        : sc_(sc),
          non_rt_ep_cfg_([&] {
              // The service cell polls once per tick, so acks legitimately age
              // up to a full tick in the mailbox before freshness is judged.
              EndpointConfig cfg = sc.endpoint_cfg;
              cfg.freshness_budget_ns += sc.non_rt_tick_ns;
              return cfg;
          }()),
          sync_(registry_, sc.sync_cfg),
          pss_down_(0, sc.pss_channel_faults, sc.seed),
          pss_up_(0, sc.pss_channel_faults, sc.seed ^ 0xA5A5A5A5DEADBEEFull),
          rt_monitor_(1, sc.rt_monitor_channel_faults, sc.seed),
          store_(registry_),
          noise_(sc.seed ^ 0x7E57AB1E00Dull) {}

    RunResult execute();

private:
    void log(std::uint64_t t, const std::string& cell, const std::string& kind, json detail) {
        events_.push_back({t, cell, kind, detail.dump()});
    }

    void apply_safety_event(const SafetyEvent& ev, std::uint64_t t);
    void handle_script(const ScriptEntry& entry);
    void safe_io_tick(std::uint64_t t);
    void rt_tick(std::uint64_t t);
    void non_rt_tick(std::uint64_t t);
    void send_update_frame(const ParamUpdatePayload& payload, std::uint64_t t);

    const Scenario& sc_;
    EndpointConfig non_rt_ep_cfg_;
    ParamRegistry registry_;
    SyncManager sync_;
    Channel pss_down_;   // Non-RT -> RT
    Channel pss_up_;     // RT -> Non-RT
    Channel rt_monitor_; // RT -> Safe IO
    RtParamStore store_;
    PhaseNoise noise_;

    EndpointState ep_rt_;
    EndpointState ep_non_rt_;
    EndpointState ep_safe_io_;
    SeqnoGenerator seq_pss_down_;
    SeqnoGenerator seq_pss_up_;
    SeqnoGenerator seq_rt_monitor_;

    SafeIoState sio_;
    OverrideLines lines_;
    SafetyAction last_loss_action_ = SafetyAction::None;
    std::deque<std::pair<std::uint64_t, SafetyEvent>> sio_pending_;
    std::deque<std::pair<std::uint64_t, ActionInjectEnvelopeCommand>> pending_commands_;
    std::uint64_t rt_silenced_until_ = 0;
    std::uint64_t trace_index_ = 0;

    std::vector<LogEvent> events_;
    std::vector<TraceRecord> trace_;
};

void Simulator::apply_safety_event(const SafetyEvent& ev, std::uint64_t t) {
    const SafeIoMode before = sio_.mode;
    auto [next, lines] = step(sio_, sc_.safe_io_cfg, ev, t);
    const bool motor_cut = lines_.motor_enable && !lines.motor_enable;
    sio_ = next;
    lines_ = lines;
    if (sio_.mode != before) {
        log(t, "safe_io", "transition",
            json{{"from", to_string(before)},
                 {"to", to_string(sio_.mode)},
                 {"cause", to_string(sio_.cause)},
                 {"lines", lines_to_json(lines_)}});
    }
    if (motor_cut) {
        log(t, "safe_io", "override",
            json{{"cause", to_string(sio_.cause)}, {"lines", lines_to_json(lines_)}});
    }
}

void Simulator::handle_script(const ScriptEntry& entry) {
    const std::uint64_t t = entry.at_ns;
    std::visit(
        [&](const auto& action) {
            using T = std::decay_t<decltype(action)>;
            if constexpr (std::is_same_v<T, ActionParamUpdate>) {
                auto result = sync_.request_update(action.name, action.value, t);
                if (const auto* txn = std::get_if<std::uint32_t>(&result)) {
                    log(t, "script", "param_update_requested",
                        json{{"name", action.name},
                             {"value", value_to_json(action.value)},
                             {"txn_id", *txn}});
                } else {
                    log(t, "script", "param_update_rejected",
                        json{{"name", action.name},
                             {"value", value_to_json(action.value)},
                             {"error", std::string(to_string(std::get<ValidateError>(result)))}});
                }
            } else if constexpr (std::is_same_v<T, ActionSilenceHeartbeats>) {
                rt_silenced_until_ = std::max(rt_silenced_until_, t + action.duration_ns);
                log(t, "script", "silence_heartbeats", json{{"duration_ns", action.duration_ns}});
            } else if constexpr (std::is_same_v<T, ActionInjectEnvelopeCommand>) {
                pending_commands_.emplace_back(t, action);
                log(t, "script", "inject_envelope_command",
                    json{{"axis", action.axis},
                         {"position", action.command.position},
                         {"velocity", action.command.velocity},
                         {"torque", action.command.torque}});
            } else if constexpr (std::is_same_v<T, ActionSetFaultModel>) {
                if (action.channel == 0) {
                    pss_down_.set_fault_model(action.faults);
                    pss_up_.set_fault_model(action.faults);
                } else {
                    rt_monitor_.set_fault_model(action.faults);
                }
                log(t, "script", "set_fault_model", json{{"channel", action.channel}});
            } else if constexpr (std::is_same_v<T, ActionOperatorAck>) {
                SafetyEvent ev;
                ev.kind = SafetyEvent::Kind::OperatorAck;
                ev.timestamp_ns = t;
                sio_pending_.emplace_back(t, ev);
                log(t, "script", "operator_ack", json::object());
            } else if constexpr (std::is_same_v<T, ActionOperatorEstop>) {
                SafetyEvent ev;
                ev.kind = SafetyEvent::Kind::OperatorEstop;
                ev.timestamp_ns = t;
                sio_pending_.emplace_back(t, ev);
                log(t, "script", "operator_estop", json::object());
            }
        },
        entry.action);
}

void Simulator::safe_io_tick(std::uint64_t t) {
    // 1. Heartbeat / diagnostic traffic on the RT Monitor channel.
    for (const RawBytes& raw : rt_monitor_.poll(t)) {
        DecodeResult decoded = decode({raw.data(), raw.size()});
        ReceiveVerdict verdict = classify(ep_safe_io_, sc_.endpoint_cfg, decoded, t);
        if (verdict.kind == VerdictKind::Accept || verdict.kind == VerdictKind::GapDetected) {
            if (verdict.frame->msg_type == MsgType::Heartbeat) {
                SafetyEvent ev;
                ev.kind = SafetyEvent::Kind::HeartbeatSeen;
                ev.timestamp_ns = t;
                apply_safety_event(ev, t);
            }
            if (verdict.kind == VerdictKind::GapDetected) {
                log(t, "safe_io", "gap", json{{"missing", verdict.missing_count}});
            }
        } else {
            log(t, "safe_io", "drop",
                json{{"verdict", std::string(to_string(verdict.kind))},
                     {"action", std::string(to_string(verdict.action))}});
        }
        if (verdict.action != SafetyAction::None) {
            SafetyEvent ev;
            ev.kind = SafetyEvent::Kind::SclAction;
            ev.scl_action = verdict.action;
            ev.timestamp_ns = t;
            apply_safety_event(ev, t);
        }
    }

    // 2. Loss watchdog on the endpoint itself; logged on change only.
    const SafetyAction loss = check_loss(ep_safe_io_, sc_.endpoint_cfg, t);
    if (loss != last_loss_action_) {
        log(t, "safe_io", "loss_action", json{{"action", std::string(to_string(loss))}});
        last_loss_action_ = loss;
        if (loss != SafetyAction::None) {
            SafetyEvent ev;
            ev.kind = SafetyEvent::Kind::SclAction;
            ev.scl_action = loss;
            ev.timestamp_ns = t;
            apply_safety_event(ev, t);
        }
    }

    // 3. Independent heartbeat supervision.
    if (auto timeout = supervise_heartbeat(sio_, sc_.safe_io_cfg, t)) {
        if (sio_.mode != SafeIoMode::SafeStop) {
            log(t, "safe_io", "heartbeat_timeout",
                json{{"silence_ns", t - sio_.last_heartbeat_ns}});
        }
        apply_safety_event(*timeout, t);
    }

    // 4. Envelope checks for injected commands.
    while (!pending_commands_.empty()) {
        auto [at, cmd] = pending_commands_.front();
        pending_commands_.pop_front();
        auto result = check_envelope(sc_.safe_io_cfg, {{cmd.axis, cmd.command}}, sio_.mode);
        if (!result) {
            log(t, "safe_io", "envelope_ok", json{{"axis", cmd.axis}});
            continue;
        }
        if (const auto* violation = std::get_if<EnvelopeViolationInfo>(&*result)) {
            log(t, "safe_io", "envelope_violation",
                json{{"axis", violation->axis},
                     {"quantity", violation->quantity},
                     {"value", violation->value},
                     {"limit", violation->limit}});
            SafetyEvent ev;
            ev.kind = SafetyEvent::Kind::EnvelopeViolation;
            ev.timestamp_ns = t;
            ev.violation = *violation;
            apply_safety_event(ev, t);
        } else {
            log(t, "safe_io", "envelope_unknown_axis", json{{"axis", cmd.axis}});
        }
    }

    // 5. Operator events and actions routed from the other cells.
    while (!sio_pending_.empty()) {
        auto [at, ev] = sio_pending_.front();
        sio_pending_.pop_front();
        apply_safety_event(ev, t);
    }
}

void Simulator::rt_tick(std::uint64_t t) {
    // 1. Parameter updates arriving on the PSS channel.
    for (const RawBytes& raw : pss_down_.poll(t)) {
        DecodeResult decoded = decode({raw.data(), raw.size()});
        ReceiveVerdict verdict = classify(ep_rt_, sc_.endpoint_cfg, decoded, t);
        if (verdict.action != SafetyAction::None) {
            SafetyEvent ev;
            ev.kind = SafetyEvent::Kind::SclAction;
            ev.scl_action = verdict.action;
            ev.timestamp_ns = t;
            sio_pending_.emplace_back(t, ev);
        }
        if (verdict.kind != VerdictKind::Accept && verdict.kind != VerdictKind::GapDetected) {
            log(t, "rt", "drop",
                json{{"verdict", std::string(to_string(verdict.kind))},
                     {"action", std::string(to_string(verdict.action))}});
            continue;
        }
        if (verdict.frame->msg_type != MsgType::ParamUpdate) continue;
        auto update = decode_param_update({verdict.frame->payload.data(),
                                           verdict.frame->payload.size()});
        if (!update) {
            log(t, "rt", "malformed_param_update", json::object());
            continue;
        }
        ApplyResult applied = store_.apply(*update);
        log(t, "rt", applied.acked ? "param_applied" : "param_rejected",
            json{{"txn_id", update->txn_id},
                 {"generation", applied.generation},
                 {"nack_reason",
                  applied.acked ? "" : std::string(to_string(applied.nack_reason))}});

        ParamAckPayload ack;
        ack.txn_id = update->txn_id;
        ack.acked = applied.acked;
        ack.nack_reason = applied.nack_reason;
        ack.generation = applied.generation;
        SclFrame frame;
        frame.channel_id = ChannelId::Pss;
        frame.msg_type = MsgType::ParamAck;
        frame.seqno = seq_pss_up_.next();
        frame.timestamp_ns = t;
        frame.payload = encode_param_ack(ack);
        pss_up_.send(*encode(frame), t);
    }

    // 2. Heartbeat on the RT Monitor channel (unless scripted silence).
    if (t >= rt_silenced_until_) {
        SclFrame hb;
        hb.channel_id = ChannelId::RtMonitor;
        hb.msg_type = MsgType::Heartbeat;
        hb.seqno = seq_rt_monitor_.next();
        hb.timestamp_ns = t;
        rt_monitor_.send(*encode(hb), t);
    }

    // 3. Two timestamped trace records per control tick, modeling the
    // command/status frame pair of one fieldbus cycle. The command frame
    // stays on the ideal grid; the status frame carries this cycle's
    // transient phase error.
    const double status_offset_ns = 0.4 * static_cast<double>(sc_.rt_tick_ns);
    double phase_ns = noise_.draw_ns(sc_.timing_noise.params);
    phase_ns = std::clamp(phase_ns, -status_offset_ns + 1.0,
                          static_cast<double>(sc_.rt_tick_ns) - status_offset_ns - 1.0);
    trace_.push_back({trace_index_++, t, FrameKind::Command});
    trace_.push_back({trace_index_++,
                      static_cast<std::uint64_t>(std::llround(
                          static_cast<double>(t) + status_offset_ns + phase_ns)),
                      FrameKind::Status});
}

void Simulator::send_update_frame(const ParamUpdatePayload& payload, std::uint64_t t) {
    SclFrame frame;
    frame.channel_id = ChannelId::Pss;
    frame.msg_type = MsgType::ParamUpdate;
    frame.seqno = seq_pss_down_.next();
    frame.timestamp_ns = t;
    frame.payload = encode_param_update(payload);
    const SendResult sent = pss_down_.send(*encode(frame), t);
    log(t, "non_rt", "param_update_sent",
        json{{"txn_id", payload.txn_id},
             {"seqno", frame.seqno},
             {"result", sent == SendResult::Enqueued ? "enqueued"
                        : sent == SendResult::Lost   ? "lost"
                                                     : "channel_full"}});
}

void Simulator::non_rt_tick(std::uint64_t t) {
    // 1. Acks coming back from the RT domain.
    for (const RawBytes& raw : pss_up_.poll(t)) {
        DecodeResult decoded = decode({raw.data(), raw.size()});
        ReceiveVerdict verdict = classify(ep_non_rt_, non_rt_ep_cfg_, decoded, t);
        if (verdict.action != SafetyAction::None) {
            SafetyEvent ev;
            ev.kind = SafetyEvent::Kind::SclAction;
            ev.scl_action = verdict.action;
            ev.timestamp_ns = t;
            sio_pending_.emplace_back(t, ev);
        }
        if (verdict.kind != VerdictKind::Accept && verdict.kind != VerdictKind::GapDetected) {
            log(t, "non_rt", "drop",
                json{{"verdict", std::string(to_string(verdict.kind))},
                     {"action", std::string(to_string(verdict.action))}});
            continue;
        }
        if (verdict.frame->msg_type != MsgType::ParamAck) continue;
        auto ack = decode_param_ack({verdict.frame->payload.data(), verdict.frame->payload.size()});
        if (!ack) {
            log(t, "non_rt", "malformed_param_ack", json::object());
            continue;
        }
        sync_.handle_ack(*ack, t);
        const ParamTransaction* txn = sync_.transaction(ack->txn_id);
        log(t, "non_rt", "ack_handled",
            json{{"txn_id", ack->txn_id},
                 {"acked", ack->acked},
                 {"state", txn ? std::string(to_string(txn->state)) : "unknown"}});
    }

    // 2. Fresh updates and due retransmissions.
    for (const auto& payload : sync_.take_outbox()) send_update_frame(payload, t);
    for (const ParamTransaction* txn : sync_.due_resends(t)) {
        send_update_frame(txn->payload, t);
        sync_.mark_resent(txn->txn_id, t);
    }
}

RunResult Simulator::execute() {
    for (const auto& d : sc_.param_declarations) {
        if (auto err = registry_.declare(d)) {
            throw InvalidScenario("$.params: declare failed for " + d.name);
        }
    }
    store_.sync_with_registry();

    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, std::greater<>> queue;
    std::uint64_t seq = 0;
    for (std::size_t i = 0; i < sc_.script.size(); ++i) {
        queue.push({sc_.script[i].at_ns, EvKind::Script, seq++, i});
    }
    queue.push({0, EvKind::SafeIoTick, seq++});
    queue.push({0, EvKind::RtTick, seq++});
    queue.push({0, EvKind::NonRtTick, seq++});

    while (!queue.empty()) {
        const QueuedEvent ev = queue.top();
        queue.pop();
        if (ev.t_ns > sc_.duration_ns) break;
        switch (ev.kind) {
            case EvKind::Script:
                handle_script(sc_.script[ev.script_index]);
                break;
            case EvKind::SafeIoTick:
                safe_io_tick(ev.t_ns);
                queue.push({ev.t_ns + sc_.safe_io_tick_ns, EvKind::SafeIoTick, seq++});
                break;
            case EvKind::RtTick:
                if (ev.t_ns + sc_.rt_tick_ns <= sc_.duration_ns) rt_tick(ev.t_ns);
                queue.push({ev.t_ns + sc_.rt_tick_ns, EvKind::RtTick, seq++});
                break;
            case EvKind::NonRtTick:
                non_rt_tick(ev.t_ns);
                queue.push({ev.t_ns + sc_.non_rt_tick_ns, EvKind::NonRtTick, seq++});
                break;
        }
    }

    RunResult result;
    result.events = std::move(events_);
    result.frame_trace = std::move(trace_);

    FinalState& fs = result.final_state;
    fs.safe_io = sio_;
    fs.lines = lines_;
    const auto snapshot = store_.read_params();
    for (std::size_t i = 0; i < registry_.descriptors().size(); ++i) {
        fs.params.emplace_back(registry_.descriptors()[i].name, snapshot[i]);
    }
    fs.pss_down = pss_down_.stats();
    fs.pss_up = pss_up_.stats();
    fs.rt_monitor = rt_monitor_.stats();
    fs.stale_acks = sync_.stale_acks();
    for (std::uint32_t id = 1;; ++id) {
        const ParamTransaction* txn = sync_.transaction(id);
        if (!txn) break;
        if (txn->state == TxnState::Acked) fs.acked_txns += 1;
        if (txn->state == TxnState::Exhausted) fs.exhausted_txns += 1;
    }
    return result;
}

} // namespace

RunResult run(const Scenario& scenario) {
    Simulator sim(scenario);
    return sim.execute();
}

std::string event_to_jsonl(const LogEvent& ev) {
    json line{{"t", ev.t_ns}, {"cell", ev.source_cell}, {"kind", ev.kind},
              {"detail", json::parse(ev.detail_json)}};
    return line.dump();
}

std::string final_state_to_json(const FinalState& fs) {
    json params = json::object();
    for (const auto& [name, value] : fs.params) params[name] = value_to_json(value);
    json doc{{"safe_io",
              json{{"mode", std::string(to_string(fs.safe_io.mode))},
                   {"cause", std::string(to_string(fs.safe_io.cause))},
                   {"entered_at_ns", fs.safe_io.entered_at_ns},
                   {"ack_required", fs.safe_io.ack_required}}},
             {"lines", lines_to_json(fs.lines)},
             {"params", params},
             {"channels",
              json{{"pss_down", stats_to_json(fs.pss_down)},
                   {"pss_up", stats_to_json(fs.pss_up)},
                   {"rt_monitor", stats_to_json(fs.rt_monitor)}}},
             {"transactions",
              json{{"acked", fs.acked_txns},
                   {"exhausted", fs.exhausted_txns},
                   {"stale_acks", fs.stale_acks}}}};
    return doc.dump(2);
}

void write_run_outputs(const RunResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    std::ofstream events(fs::path(out_dir) / "events.jsonl");
    if (!events) throw std::ios_base::failure("cannot write events.jsonl");
    for (const auto& ev : result.events) events << event_to_jsonl(ev) << '\n';

    write_trace_csv(fs::path(out_dir) / "trace.csv", result.frame_trace);

    std::ofstream final_state(fs::path(out_dir) / "final_state.json");
    if (!final_state) throw std::ios_base::failure("cannot write final_state.json");
    final_state << final_state_to_json(result.final_state) << '\n';
}

} // namespace safesim
