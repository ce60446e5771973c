import json
import socket
import threading

import pytest

from scriptarena import (
    Abort,
    ActionMsg,
    AgentClient,
    AgentTimeoutError,
    CameraModel,
    EpisodeEnd,
    FramingError,
    LocalAgentSession,
    ObservationMsg,
    ParseFeedback,
    ProtocolServer,
    RecordingSession,
    ReplayError,
    SessionClosedError,
    SessionHello,
    SessionPolicy,
    SuiteConfig,
    TranscriptWriter,
    WIRE_VERSION,
    encode_line,
    parse_line,
    read_transcript,
    run_suite,
)
from scriptarena.protocol import StreamSession


def sample_messages():
    return [
        SessionHello(session_id="s-1", seq=0, suite_id="demo", policy={"max_scripts_per_episode": 30}),
        ObservationMsg(
            session_id="s-1", seq=1, task_id="l01_task1", step=0, health=100.0,
            cumulative_reward=0.0, scripts_remaining=30, image_b64="aGk=",
            extra_images_b64=("aGk=", "aGk="), text_prompt="go",
        ),
        ActionMsg(session_id="s-1", seq=1, raw_script_text="Go(5);"),
        ParseFeedback(session_id="s-1", seq=2, error_kind="EmptyScript",
                      error_message="no commands found", retry_index=1),
        EpisodeEnd(session_id="s-1", seq=3, task_id="l01_task1", passed=True,
                   final_reward=0.42, reason="GoalReached"),
        Abort(session_id="s-1", seq=4, reason="shutdown"),
    ]


def test_every_message_type_round_trips_over_the_wire():
    for msg in sample_messages():
        line = encode_line(msg)
        assert line.endswith(b"\n")
        assert parse_line(line) == msg
        assert parse_line(line.decode("utf-8")) == msg


def test_encoding_is_canonical_and_versioned():
    msg = sample_messages()[0]
    assert encode_line(msg) == encode_line(msg)
    data = json.loads(encode_line(msg))
    assert data["wire_version"] == WIRE_VERSION
    assert list(data) == sorted(data)  # stable key order


def test_framing_errors():
    with pytest.raises(FramingError):
        parse_line(b"not json\n")
    with pytest.raises(FramingError):
        parse_line(b"[1, 2]\n")
    with pytest.raises(FramingError):
        parse_line(b'{"type": "teleport"}\n')
    with pytest.raises(FramingError):
        parse_line(b'{"type": "action", "seq": 1}\n')  # missing fields
    with pytest.raises(FramingError):
        parse_line(b"\xff\xfe\n")


def test_policy_validation():
    SessionPolicy().validate()
    with pytest.raises(ValueError):
        SessionPolicy(max_scripts_per_episode=0).validate()
    with pytest.raises(ValueError):
        SessionPolicy(response_timeout=0.0).validate()


# --- transcripts ----------------------------------------------------------------


def test_transcript_write_and_read_round_trip(tmp_path):
    path = tmp_path / "episode.jsonl"
    with TranscriptWriter(path) as writer:
        for i, msg in enumerate(sample_messages()):
            writer.log("out" if i % 2 == 0 else "in", msg)
    rows = read_transcript(path)
    assert [m for _, m in rows] == sample_messages()
    assert [d for d, _ in rows] == ["out", "in"] * 3


def test_reading_a_damaged_transcript_raises_replay_error(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text("definitely not json\n", encoding="utf-8")
    with pytest.raises(ReplayError):
        read_transcript(path)
    path.write_text('{"transcript": "v2"}\n', encoding="utf-8")
    with pytest.raises(ReplayError):
        read_transcript(path)
    path.write_text('{"transcript": "v1"}\n{"dir": "in", "msg": {"type": "nope"}}\n',
                    encoding="utf-8")
    with pytest.raises(ReplayError):
        read_transcript(path)


def test_recording_session_mirrors_both_directions(tmp_path):
    inner = LocalAgentSession(lambda obs, priv: "Go(3);")
    path = tmp_path / "mirror.jsonl"
    writer = TranscriptWriter(path)
    session = RecordingSession(inner, writer)
    obs = sample_messages()[1]
    session.send(obs)
    action = session.receive_action(timeout=1.0)
    writer.close()
    rows = read_transcript(path)
    assert rows[0] == ("out", obs)
    assert rows[1][0] == "in"
    assert rows[1][1].raw_script_text == action.raw_script_text == "Go(3);"


# --- local sessions ----------------------------------------------------------------


def test_local_session_answers_pending_observations():
    session = LocalAgentSession(lambda obs, priv: f"Go({obs.step + 1});")
    obs = sample_messages()[1]
    session.send(obs)
    action = session.receive_action(timeout=1.0)
    assert action.raw_script_text == "Go(1);"
    with pytest.raises(SessionClosedError):
        session.receive_action(timeout=1.0)  # nothing pending any more


def test_local_session_passes_privileged_state_only_when_asked():
    seen = []
    plain = LocalAgentSession(lambda obs, priv: seen.append(priv) or "Go(1);")
    plain.attach_privileged(("state", "spec"))
    plain.send(sample_messages()[1])
    plain.receive_action(timeout=1.0)
    assert seen == [None]

    oracle = LocalAgentSession(lambda obs, priv: seen.append(priv) or "Go(1);",
                               needs_privileged=True)
    oracle.attach_privileged(("state", "spec"))
    oracle.send(sample_messages()[1])
    oracle.receive_action(timeout=1.0)
    assert seen[-1] == ("state", "spec")


# --- byte-stream sessions ------------------------------------------------------------


def test_stream_session_times_out_without_a_reply():
    a, b = socket.socketpair()
    try:
        session = StreamSession("s-1", a.makefile("rb"), a.makefile("wb"))
        with pytest.raises(AgentTimeoutError):
            session.receive_action(timeout=0.05)
    finally:
        a.close()
        b.close()


def test_stream_session_rejects_non_action_replies():
    a, b = socket.socketpair()
    try:
        session = StreamSession("s-1", a.makefile("rb"), a.makefile("wb"))
        b.sendall(encode_line(sample_messages()[0]))
        with pytest.raises(FramingError):
            session.receive_action(timeout=1.0)
    finally:
        a.close()
        b.close()


def test_stream_session_reports_a_closed_peer():
    a, b = socket.socketpair()
    session = StreamSession("s-1", a.makefile("rb"), a.makefile("wb"))
    b.close()
    try:
        with pytest.raises(SessionClosedError):
            session.receive_action(timeout=1.0)
    finally:
        a.close()


# --- tcp server end to end -----------------------------------------------------------


def test_server_runs_an_episode_for_a_connecting_client():
    config = SuiteConfig(
        suite_id="wire-demo",
        tasks=("l01_task1",),
        trials_per_task=1,
        camera=CameraModel(width=32, height=32),
        agent_id="remote",
    )
    done = threading.Event()
    results = {}

    def handler(session):
        results["records"] = run_suite(config, session=session)
        done.set()

    server = ProtocolServer("127.0.0.1", 0, handler)
    server.serve_in_thread()
    host, port = server.address
    try:
        client = AgentClient(host, port)
        seen = {"hello": 0, "observation": 0}

        def respond(obs):
            seen["observation"] += 1
            return "Go(35);"

        ends = client.run(respond)
        assert done.wait(timeout=30.0)
        client.close()
    finally:
        server.shutdown()

    assert len(ends) == 1
    assert ends[0].task_id == "l01_task1"
    assert seen["observation"] >= 1
    records = results["records"]
    assert len(records) == 1
    assert records[0].task_id == "l01_task1"
    assert records[0].scripts_used <= 30
