#include "safesim/channel.hpp"
#include "safesim/crc32c.hpp"
#include "safesim/endpoint.hpp"
#include "safesim/jitter.hpp"
#include "safesim/pss.hpp"
#include "safesim/safe_io.hpp"
#include "safesim/scl_frame.hpp"
#include "safesim/simulator.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

namespace py = pybind11;
using namespace safesim;

namespace {

RawBytes to_bytes(const py::bytes& data) {
    std::string_view view = data;
    RawBytes out(view.size());
    std::memcpy(out.data(), view.data(), view.size());
    return out;
}

py::bytes from_bytes(const std::vector<std::uint8_t>& data) {
    return py::bytes(reinterpret_cast<const char*>(data.data()), data.size());
}

} // namespace

PYBIND11_MODULE(_safesim, m) {
    m.doc() = "partition-safety simulator core";

    // --- crc ---------------------------------------------------------------
    m.def("crc32c", [](const py::bytes& data) {
        const RawBytes raw = to_bytes(data);
        return crc32c({raw.data(), raw.size()});
    });

    // --- frame codec ---------------------------------------------------------
    py::enum_<ChannelId>(m, "ChannelId")
        .value("PSS", ChannelId::Pss)
        .value("RT_MONITOR", ChannelId::RtMonitor);
    py::enum_<MsgType>(m, "MsgType")
        .value("HEARTBEAT", MsgType::Heartbeat)
        .value("PARAM_UPDATE", MsgType::ParamUpdate)
        .value("PARAM_ACK", MsgType::ParamAck)
        .value("COMMAND", MsgType::Command)
        .value("DIAGNOSTIC", MsgType::Diagnostic);
    py::enum_<CorruptReason>(m, "CorruptReason")
        .value("BAD_MAGIC", CorruptReason::BadMagic)
        .value("BAD_LENGTH", CorruptReason::BadLength)
        .value("BAD_CRC", CorruptReason::BadCrc)
        .value("UNKNOWN_MSG_TYPE", CorruptReason::UnknownMsgType)
        .value("UNKNOWN_CHANNEL", CorruptReason::UnknownChannel);

    py::class_<SclFrame>(m, "SclFrame")
        .def(py::init<>())
        .def_readwrite("channel_id", &SclFrame::channel_id)
        .def_readwrite("msg_type", &SclFrame::msg_type)
        .def_readwrite("seqno", &SclFrame::seqno)
        .def_readwrite("timestamp_ns", &SclFrame::timestamp_ns)
        .def_property(
            "payload", [](const SclFrame& f) { return from_bytes(f.payload); },
            [](SclFrame& f, const py::bytes& data) { f.payload = to_bytes(data); });

    m.def("encode", [](const SclFrame& frame) -> py::object {
        const auto wire = encode(frame);
        if (!wire) return py::none();
        return from_bytes(*wire);
    });
    m.def("decode", [](const py::bytes& data) -> py::object {
        const RawBytes raw = to_bytes(data);
        const DecodeResult result = decode({raw.data(), raw.size()});
        if (const auto* frame = std::get_if<SclFrame>(&result)) return py::cast(*frame);
        return py::cast(std::get<CorruptReason>(result));
    });

    // --- endpoint ------------------------------------------------------------
    py::enum_<VerdictKind>(m, "VerdictKind")
        .value("ACCEPT", VerdictKind::Accept)
        .value("DROP_CORRUPT", VerdictKind::DropCorrupt)
        .value("DROP_REPLAY", VerdictKind::DropReplay)
        .value("DROP_STALE", VerdictKind::DropStale)
        .value("GAP_DETECTED", VerdictKind::GapDetected);
    py::enum_<SafetyAction>(m, "SafetyAction")
        .value("NONE", SafetyAction::None)
        .value("RETRY", SafetyAction::Retry)
        .value("DEGRADE", SafetyAction::Degrade)
        .value("SAFE_STOP", SafetyAction::SafeStop)
        .value("OVERRIDE", SafetyAction::Override);
    py::enum_<DegradationState>(m, "DegradationState")
        .value("HEALTHY", DegradationState::Healthy)
        .value("WARNING", DegradationState::Warning)
        .value("DEGRADE", DegradationState::Degrade)
        .value("SAFE_STOP_REQUEST", DegradationState::SafeStopRequest)
        .value("OVERRIDE_REQUEST", DegradationState::OverrideRequest);

    py::class_<EndpointConfig>(m, "EndpointConfig")
        .def(py::init<>())
        .def_readwrite("freshness_budget_ns", &EndpointConfig::freshness_budget_ns)
        .def_readwrite("persistent_corrupt_threshold",
                       &EndpointConfig::persistent_corrupt_threshold)
        .def_readwrite("persistent_replay_threshold", &EndpointConfig::persistent_replay_threshold)
        .def_readwrite("persistent_stale_threshold", &EndpointConfig::persistent_stale_threshold)
        .def_readwrite("loss_timeout_ns", &EndpointConfig::loss_timeout_ns)
        .def_readwrite("failure_window_ns", &EndpointConfig::failure_window_ns);

    py::class_<EndpointState>(m, "EndpointState")
        .def(py::init<>())
        .def_readonly("last_accepted_seqno", &EndpointState::last_accepted_seqno)
        .def_readonly("consecutive_crc_failures", &EndpointState::consecutive_crc_failures)
        .def_readonly("consecutive_stale", &EndpointState::consecutive_stale)
        .def_readonly("last_receipt_ns", &EndpointState::last_receipt_ns)
        .def_readonly("health", &EndpointState::health);

    py::class_<ReceiveVerdict>(m, "ReceiveVerdict")
        .def_readonly("kind", &ReceiveVerdict::kind)
        .def_readonly("action", &ReceiveVerdict::action)
        .def_readonly("missing_count", &ReceiveVerdict::missing_count);

    m.def("classify",
          [](EndpointState& state, const EndpointConfig& cfg, const py::bytes& wire,
             std::uint64_t now_ns) {
              const RawBytes raw = to_bytes(wire);
              return classify(state, cfg, decode({raw.data(), raw.size()}), now_ns);
          });
    m.def("check_loss", &check_loss);
    m.def("seq_after", &seq_after);

    py::class_<SeqnoGenerator>(m, "SeqnoGenerator")
        .def(py::init<>())
        .def("next", &SeqnoGenerator::next);

    // --- fault-injected channel ----------------------------------------------
    py::enum_<SendResult>(m, "SendResult")
        .value("ENQUEUED", SendResult::Enqueued)
        .value("LOST", SendResult::Lost)
        .value("CHANNEL_FULL", SendResult::ChannelFull);

    py::class_<ChannelFaultModel>(m, "ChannelFaultModel")
        .def(py::init<>())
        .def_readwrite("bit_error_rate", &ChannelFaultModel::bit_error_rate)
        .def_readwrite("loss_prob", &ChannelFaultModel::loss_prob)
        .def_readwrite("dup_prob", &ChannelFaultModel::dup_prob)
        .def_readwrite("reorder_prob", &ChannelFaultModel::reorder_prob)
        .def_readwrite("delay_fixed_ns", &ChannelFaultModel::delay_fixed_ns)
        .def_readwrite("delay_jitter_ns", &ChannelFaultModel::delay_jitter_ns);

    py::class_<ChannelStats>(m, "ChannelStats")
        .def_readonly("sent", &ChannelStats::sent)
        .def_readonly("enqueued", &ChannelStats::enqueued)
        .def_readonly("delivered", &ChannelStats::delivered)
        .def_readonly("lost_injected", &ChannelStats::lost_injected)
        .def_readonly("lost_overflow", &ChannelStats::lost_overflow)
        .def_readonly("duplicated", &ChannelStats::duplicated)
        .def_readonly("corrupted", &ChannelStats::corrupted);

    py::class_<Channel>(m, "Channel")
        .def(py::init<std::uint8_t, ChannelFaultModel, std::uint64_t, std::size_t>(),
             py::arg("channel_id"), py::arg("faults") = ChannelFaultModel{},
             py::arg("seed") = 0, py::arg("capacity") = 64)
        .def("send",
             [](Channel& ch, const py::bytes& frame, std::uint64_t now_ns) {
                 return ch.send(to_bytes(frame), now_ns);
             })
        .def("poll",
             [](Channel& ch, std::uint64_t now_ns) {
                 py::list out;
                 for (const RawBytes& raw : ch.poll(now_ns)) out.append(from_bytes(raw));
                 return out;
             })
        .def("doorbell", &Channel::doorbell)
        .def("in_flight", &Channel::in_flight)
        .def("set_fault_model", &Channel::set_fault_model)
        .def("stats", &Channel::stats, py::return_value_policy::copy);

    // --- jitter analyzer -------------------------------------------------------
    py::enum_<FrameKind>(m, "FrameKind")
        .value("COMMAND", FrameKind::Command)
        .value("STATUS", FrameKind::Status)
        .value("UNKNOWN", FrameKind::Unknown);

    py::class_<TraceRecord>(m, "TraceRecord")
        .def(py::init<>())
        .def(py::init([](std::uint64_t index, std::uint64_t timestamp_ns, FrameKind kind) {
                 return TraceRecord{index, timestamp_ns, kind};
             }),
             py::arg("index"), py::arg("timestamp_ns"),
             py::arg("frame_kind") = FrameKind::Unknown)
        .def_readwrite("index", &TraceRecord::index)
        .def_readwrite("timestamp_ns", &TraceRecord::timestamp_ns)
        .def_readwrite("frame_kind", &TraceRecord::frame_kind);

    py::register_exception<TraceError>(m, "TraceError", PyExc_ValueError);
    py::register_exception<InvalidConfig>(m, "InvalidConfig", PyExc_ValueError);
    py::register_exception<InvalidScenario>(m, "InvalidScenario", PyExc_ValueError);

    py::class_<AnalyzeConfig>(m, "AnalyzeConfig")
        .def(py::init<>())
        .def_readwrite("excursion_threshold_us", &AnalyzeConfig::excursion_threshold_us)
        .def_readwrite("missed_cycle_threshold_ms", &AnalyzeConfig::missed_cycle_threshold_ms)
        .def_readwrite("band_us", &AnalyzeConfig::band_us);

    py::class_<JitterReport>(m, "JitterReport")
        .def_readonly("nominal_cycle_us", &JitterReport::nominal_cycle_us)
        .def_readonly("sigma_us", &JitterReport::sigma_us)
        .def_readonly("p99_abs_us", &JitterReport::p99_abs_us)
        .def_readonly("p999_abs_us", &JitterReport::p999_abs_us)
        .def_readonly("max_abs_us", &JitterReport::max_abs_us)
        .def_readonly("excursion_fraction", &JitterReport::excursion_fraction)
        .def_readonly("excursion_count", &JitterReport::excursion_count)
        .def_readonly("missed_cycles", &JitterReport::missed_cycles)
        .def_readonly("within_band_fraction", &JitterReport::within_band_fraction)
        .def_readonly("cycles_analyzed", &JitterReport::cycles_analyzed);

    py::class_<CcdfPoint>(m, "CcdfPoint")
        .def_readonly("threshold_us", &CcdfPoint::threshold_us)
        .def_readonly("fraction", &CcdfPoint::fraction);

    py::class_<PerSecondBucket>(m, "PerSecondBucket")
        .def_readonly("second", &PerSecondBucket::second)
        .def_readonly("count", &PerSecondBucket::count);

    py::class_<GeneratorConfig>(m, "GeneratorConfig")
        .def(py::init<>())
        .def_readwrite("n_cycles", &GeneratorConfig::n_cycles)
        .def_readwrite("nominal_us", &GeneratorConfig::nominal_us)
        .def_readwrite("sigma_us", &GeneratorConfig::sigma_us)
        .def_readwrite("p_tail", &GeneratorConfig::p_tail)
        .def_readwrite("tail_min_us", &GeneratorConfig::tail_min_us)
        .def_readwrite("tail_max_us", &GeneratorConfig::tail_max_us)
        .def_readwrite("seed", &GeneratorConfig::seed)
        .def_readwrite("start_ns", &GeneratorConfig::start_ns);

    m.def("compute_delta2", &compute_delta2);
    m.def("analyze", &analyze, py::arg("trace"), py::arg("config") = AnalyzeConfig{});
    m.def("ccdf", &ccdf, py::arg("trace"), py::arg("thresholds_us") = kDefaultCcdfGrid);
    m.def("excursions_per_second", &excursions_per_second, py::arg("trace"),
          py::arg("threshold_us") = 50.0);
    m.def("generate_trace", &generate_trace);
    m.def("read_trace_csv", &read_trace_csv);
    m.def("write_trace_csv", &write_trace_csv);
    m.def("report_to_json", &report_to_json);

    // --- scenario runner --------------------------------------------------------
    py::class_<Scenario>(m, "Scenario")
        .def_readwrite("duration_ns", &Scenario::duration_ns)
        .def_readwrite("seed", &Scenario::seed);

    py::class_<LogEvent>(m, "LogEvent")
        .def_readonly("t_ns", &LogEvent::t_ns)
        .def_readonly("source_cell", &LogEvent::source_cell)
        .def_readonly("kind", &LogEvent::kind)
        .def_readonly("detail_json", &LogEvent::detail_json);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("events", &RunResult::events)
        .def_readonly("frame_trace", &RunResult::frame_trace)
        .def_property_readonly(
            "final_state_json",
            [](const RunResult& r) { return final_state_to_json(r.final_state); });

    m.def("parse_scenario", &parse_scenario);
    m.def("load_scenario", &load_scenario);
    m.def("run", &run);
    m.def("event_to_jsonl", &event_to_jsonl);
    m.def("write_run_outputs", &write_run_outputs);
}
