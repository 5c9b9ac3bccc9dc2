#include "safesim/scenario.hpp"

#include <json.hpp>

#include <fstream>

namespace safesim {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw InvalidScenario(path + ": " + why);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& path) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(path + "." + key, "wrong type");
    }
}

double get_prob(const json& obj, const std::string& key, const std::string& path) {
    const double v = get_or<double>(obj, key, 0.0, path);
    if (v < 0.0 || v > 1.0) fail(path + "." + key, "probability outside [0,1]");
    return v;
}

ChannelFaultModel parse_faults(const json& obj, const std::string& path) {
    ChannelFaultModel fm;
    fm.bit_error_rate = get_prob(obj, "bit_error_rate", path);
    fm.loss_prob = get_prob(obj, "loss_prob", path);
    fm.dup_prob = get_prob(obj, "dup_prob", path);
    fm.reorder_prob = get_prob(obj, "reorder_prob", path);
    fm.delay_fixed_ns = get_or<std::uint64_t>(obj, "delay_fixed_ns", 0, path);
    fm.delay_jitter_ns = get_or<std::uint64_t>(obj, "delay_jitter_ns", 0, path);
    return fm;
}

ParamValue parse_value(const json& v, ParamType type, const std::string& path) {
    try {
        switch (type) {
            case ParamType::Float64: return v.get<double>();
            case ParamType::Int64: return v.get<std::int64_t>();
            case ParamType::Bool: return v.get<bool>();
        }
    } catch (const json::exception&) {
    }
    fail(path, "value does not match declared type");
}

ParamDescriptor parse_param(const json& obj, const std::string& path) {
    ParamDescriptor d;
    if (!obj.contains("name") || !obj.contains("type")) fail(path, "missing name/type");
    d.name = obj.at("name").get<std::string>();
    const std::string type = obj.at("type").get<std::string>();
    if (type == "float64") d.value_type = ParamType::Float64;
    else if (type == "int64") d.value_type = ParamType::Int64;
    else if (type == "bool") d.value_type = ParamType::Bool;
    else fail(path + ".type", "unknown type " + type);

    if (d.value_type == ParamType::Bool) {
        d.min = false;
        d.max = true;
        d.default_value = obj.contains("default")
                              ? parse_value(obj.at("default"), d.value_type, path + ".default")
                              : ParamValue{false};
    } else {
        for (const char* key : {"min", "max", "default"}) {
            if (!obj.contains(key)) fail(path, std::string("missing ") + key);
        }
        d.min = parse_value(obj.at("min"), d.value_type, path + ".min");
        d.max = parse_value(obj.at("max"), d.value_type, path + ".max");
        d.default_value = parse_value(obj.at("default"), d.value_type, path + ".default");
    }

    const std::string crit = get_or<std::string>(obj, "criticality", "low", path);
    if (crit == "low") d.criticality = Criticality::Low;
    else if (crit == "medium") d.criticality = Criticality::Medium;
    else if (crit == "critical") d.criticality = Criticality::Critical;
    else fail(path + ".criticality", "unknown criticality " + crit);
    return d;
}

ScriptAction parse_action(const json& obj, const Scenario& sc, const std::string& path) {
    const std::string action = obj.at("action").get<std::string>();
    if (action == "param_update") {
        ActionParamUpdate a;
        a.name = obj.at("name").get<std::string>();
        ParamType type = ParamType::Float64;
        for (const auto& d : sc.param_declarations) {
            if (d.name == a.name) type = d.value_type;
        }
        a.value = parse_value(obj.at("value"), type, path + ".value");
        return a;
    }
    if (action == "silence_heartbeats") {
        return ActionSilenceHeartbeats{obj.at("duration_ns").get<std::uint64_t>()};
    }
    if (action == "inject_envelope_command") {
        ActionInjectEnvelopeCommand a;
        a.axis = obj.at("axis").get<std::string>();
        a.command.position = get_or<double>(obj, "position", 0.0, path);
        a.command.velocity = get_or<double>(obj, "velocity", 0.0, path);
        a.command.torque = get_or<double>(obj, "torque", 0.0, path);
        return a;
    }
    if (action == "set_fault_model") {
        ActionSetFaultModel a;
        a.channel = get_or<std::uint8_t>(obj, "channel", 0, path);
        if (a.channel > 1) fail(path + ".channel", "unknown channel id");
        a.faults = parse_faults(obj, path);
        return a;
    }
    if (action == "operator_ack") return ActionOperatorAck{};
    if (action == "operator_estop") return ActionOperatorEstop{};
    fail(path + ".action", "unknown action " + action);
}

} // namespace

Scenario parse_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidScenario(std::string("$: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InvalidScenario("$: top level must be an object");

    Scenario sc;
    sc.duration_ns = get_or<std::uint64_t>(doc, "duration_ns", 0, "$");
    if (sc.duration_ns == 0) fail("$.duration_ns", "must be positive");
    sc.seed = get_or<std::uint64_t>(doc, "seed", 0, "$");

    if (doc.contains("channels")) {
        const json& ch = doc.at("channels");
        if (ch.contains("pss")) sc.pss_channel_faults = parse_faults(ch.at("pss"), "$.channels.pss");
        if (ch.contains("rt_monitor")) {
            sc.rt_monitor_channel_faults = parse_faults(ch.at("rt_monitor"), "$.channels.rt_monitor");
        }
    }

    if (doc.contains("endpoint")) {
        const json& ep = doc.at("endpoint");
        EndpointConfig& cfg = sc.endpoint_cfg;
        cfg.freshness_budget_ns =
            get_or<std::uint64_t>(ep, "freshness_budget_ns", cfg.freshness_budget_ns, "$.endpoint");
        cfg.persistent_corrupt_threshold = get_or<std::uint32_t>(
            ep, "persistent_corrupt_threshold", cfg.persistent_corrupt_threshold, "$.endpoint");
        cfg.persistent_replay_threshold = get_or<std::uint32_t>(
            ep, "persistent_replay_threshold", cfg.persistent_replay_threshold, "$.endpoint");
        cfg.persistent_stale_threshold = get_or<std::uint32_t>(
            ep, "persistent_stale_threshold", cfg.persistent_stale_threshold, "$.endpoint");
        cfg.loss_timeout_ns =
            get_or<std::uint64_t>(ep, "loss_timeout_ns", cfg.loss_timeout_ns, "$.endpoint");
        cfg.failure_window_ns =
            get_or<std::uint64_t>(ep, "failure_window_ns", cfg.failure_window_ns, "$.endpoint");
        if (cfg.persistent_corrupt_threshold < 1 || cfg.persistent_replay_threshold < 1 ||
            cfg.persistent_stale_threshold < 1) {
            fail("$.endpoint", "thresholds must be >= 1");
        }
        if (cfg.freshness_budget_ns == 0 || cfg.loss_timeout_ns == 0 || cfg.failure_window_ns == 0) {
            fail("$.endpoint", "durations must be > 0");
        }
    }

    if (doc.contains("safe_io")) {
        const json& sio = doc.at("safe_io");
        SafeIoConfig& cfg = sc.safe_io_cfg;
        cfg.heartbeat_period_ns =
            get_or<std::uint64_t>(sio, "heartbeat_period_ns", cfg.heartbeat_period_ns, "$.safe_io");
        cfg.heartbeat_timeout_multiple = get_or<std::uint32_t>(
            sio, "heartbeat_timeout_multiple", cfg.heartbeat_timeout_multiple, "$.safe_io");
        cfg.degraded_scale = get_or<double>(sio, "degraded_scale", cfg.degraded_scale, "$.safe_io");
        cfg.recovery_window_ns =
            get_or<std::uint64_t>(sio, "recovery_window_ns", cfg.recovery_window_ns, "$.safe_io");
        if (cfg.heartbeat_timeout_multiple < 1) fail("$.safe_io.heartbeat_timeout_multiple", "must be >= 1");
        if (cfg.degraded_scale <= 0.0 || cfg.degraded_scale > 1.0) {
            fail("$.safe_io.degraded_scale", "must be in (0,1]");
        }
        if (sio.contains("envelopes")) {
            for (const auto& [axis, env] : sio.at("envelopes").items()) {
                AxisEnvelope e;
                const std::string p = "$.safe_io.envelopes." + axis;
                e.position_min = get_or<double>(env, "position_min", 0.0, p);
                e.position_max = get_or<double>(env, "position_max", 0.0, p);
                e.velocity_max = get_or<double>(env, "velocity_max", 0.0, p);
                e.torque_max = get_or<double>(env, "torque_max", 0.0, p);
                if (e.position_min >= e.position_max) fail(p, "position_min must be < position_max");
                cfg.envelopes.emplace(axis, e);
            }
        }
    }

    if (doc.contains("sync")) {
        const json& sy = doc.at("sync");
        sc.sync_cfg.retry_limit = get_or<std::uint32_t>(sy, "retry_limit", sc.sync_cfg.retry_limit, "$.sync");
        sc.sync_cfg.retry_interval_ns =
            get_or<std::uint64_t>(sy, "retry_interval_ns", sc.sync_cfg.retry_interval_ns, "$.sync");
    }

    if (doc.contains("params")) {
        std::size_t i = 0;
        for (const auto& p : doc.at("params")) {
            sc.param_declarations.push_back(parse_param(p, "$.params[" + std::to_string(i) + "]"));
            ++i;
        }
    }

    if (doc.contains("timing_noise")) {
        const json& tn = doc.at("timing_noise");
        const std::string profile = get_or<std::string>(tn, "profile", "custom", "$.timing_noise");
        if (profile == "isolated") sc.timing_noise.params = isolated_profile();
        else if (profile == "contended") sc.timing_noise.params = contended_profile();
        else if (profile == "none") sc.timing_noise.params = {};
        else if (profile == "custom") {
            sc.timing_noise.params.sigma_us = get_or<double>(tn, "sigma_us", 0.0, "$.timing_noise");
            sc.timing_noise.params.p_tail = get_prob(tn, "p_tail", "$.timing_noise");
            sc.timing_noise.params.tail_min_us =
                get_or<double>(tn, "tail_min_us", 50.0, "$.timing_noise");
            sc.timing_noise.params.tail_max_us =
                get_or<double>(tn, "tail_max_us", 350.0, "$.timing_noise");
        } else {
            fail("$.timing_noise.profile", "unknown profile " + profile);
        }
    }

    if (doc.contains("script")) {
        std::size_t i = 0;
        std::uint64_t prev_at = 0;
        for (const auto& entry : doc.at("script")) {
            const std::string path = "$.script[" + std::to_string(i) + "]";
            ScriptEntry se;
            se.at_ns = get_or<std::uint64_t>(entry, "at_ns", 0, path);
            if (se.at_ns < prev_at) fail(path + ".at_ns", "script must be sorted by at_ns");
            if (se.at_ns > sc.duration_ns) fail(path + ".at_ns", "beyond scenario duration");
            prev_at = se.at_ns;
            if (!entry.contains("action")) fail(path, "missing action");
            se.action = parse_action(entry, sc, path);
            sc.script.push_back(std::move(se));
            ++i;
        }
    }

    return sc;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open scenario file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_scenario(text);
}

} // namespace safesim
