import json

import pytest

import safesim as ss


def test_crc_check_value():
    assert ss.crc32c(b"123456789") == 0xE3069283
    assert ss.crc32c(b"") == 0


def test_frame_roundtrip():
    frame = ss.SclFrame()
    frame.channel_id = ss.ChannelId.PSS
    frame.msg_type = ss.MsgType.PARAM_UPDATE
    frame.seqno = 41
    frame.timestamp_ns = 123_456_789
    frame.payload = b"\x01\x02\x03"

    wire = ss.encode(frame)
    assert isinstance(wire, bytes)
    back = ss.decode(wire)
    assert isinstance(back, ss.SclFrame)
    assert back.seqno == 41
    assert back.payload == b"\x01\x02\x03"


def test_decode_rejects_bit_flip():
    frame = ss.SclFrame()
    frame.msg_type = ss.MsgType.HEARTBEAT
    wire = bytearray(ss.encode(frame))
    wire[-1] ^= 0x01
    assert ss.decode(bytes(wire)) == ss.CorruptReason.BAD_CRC


def test_classify_accepts_fresh_frame():
    state = ss.EndpointState()
    cfg = ss.EndpointConfig()
    frame = ss.SclFrame()
    frame.msg_type = ss.MsgType.HEARTBEAT
    frame.seqno = 0
    frame.timestamp_ns = 1_000_000
    verdict = ss.classify(state, cfg, ss.encode(frame), 1_500_000)
    assert verdict.kind == ss.VerdictKind.ACCEPT
    assert verdict.action == ss.SafetyAction.NONE


def test_channel_identity_delivery():
    ch = ss.Channel(0, ss.ChannelFaultModel(), seed=1)
    frame = ss.SclFrame()
    frame.msg_type = ss.MsgType.HEARTBEAT
    wire = ss.encode(frame)
    assert ch.send(wire, 1000) == ss.SendResult.ENQUEUED
    assert ch.poll(1000) == [wire]
    assert ch.stats().delivered == 1


def test_generate_and_analyze():
    cfg = ss.GeneratorConfig()
    cfg.n_cycles = 50_000
    cfg.sigma_us = 2.0
    cfg.seed = 9
    trace = ss.generate_trace(cfg)
    report = ss.analyze(trace)
    assert 1.9 < report.sigma_us < 2.1
    assert report.missed_cycles == 0
    parsed = json.loads(ss.report_to_json(report))
    assert parsed["cycles_analyzed"] == report.cycles_analyzed


def test_ccdf_monotone():
    cfg = ss.GeneratorConfig()
    cfg.n_cycles = 10_000
    cfg.sigma_us = 10.0
    cfg.p_tail = 0.02
    cfg.seed = 4
    points = ss.ccdf(ss.generate_trace(cfg))
    fractions = [p.fraction for p in points]
    assert fractions == sorted(fractions, reverse=True)


def test_run_scenario_end_to_end():
    scenario = ss.parse_scenario(json.dumps({
        "duration_ns": 50_000_000,
        "seed": 3,
        "script": [{"at_ns": 20_000_000, "action": "operator_estop"}],
    }))
    result = ss.run(scenario)
    final = json.loads(result.final_state_json)
    assert final["safe_io"]["mode"] == "SAFE_STOP"
    assert final["lines"]["motor_enable"] is False
    assert any(ev.kind == "override" for ev in result.events)
    assert len(result.frame_trace) == 2 * 50


def test_invalid_scenario_raises():
    with pytest.raises(ValueError):
        ss.parse_scenario("{}")
