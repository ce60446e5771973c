import json
from pathlib import Path
from types import SimpleNamespace

import jsonschema
import pytest

from scriptarena import (
    Abort,
    ActionMsg,
    CameraModel,
    EpisodeEnd,
    ObservationMsg,
    ParseFeedback,
    SessionHello,
    SuiteConfig,
    encode_line,
    run_suite,
)

SCHEMA = json.loads(
    (Path(__file__).resolve().parent.parent / "docs" / "wire-schema.json").read_text("utf-8")
)
VALIDATOR = jsonschema.Draft7Validator(SCHEMA)

SAMPLES = [
    SessionHello(session_id="s1", seq=0, suite_id="pack-all", policy={"max_scripts_per_episode": 30}),
    ObservationMsg(session_id="s1", seq=1, task_id="l01_task1", step=0, health=100.0,
                   cumulative_reward=0.0, scripts_remaining=30, image_b64="aGk=",
                   text_prompt="what do you do?", extra_images_b64=("aGk=", "aGk=")),
    ActionMsg(session_id="s1", seq=0, raw_script_text="Think('go'); Go(10);"),
    ParseFeedback(session_id="s1", seq=2, error_kind="UnknownCommand",
                  error_message="no such command", retry_index=1),
    EpisodeEnd(session_id="s1", seq=3, task_id="l01_task1", passed=True,
               final_reward=0.42, reason="GoalReached"),
    Abort(session_id="s1", seq=4, reason="session complete"),
    Abort(session_id="s1", seq=-1, reason="timeout note"),
]


def validate(payload: dict) -> None:
    VALIDATOR.validate(payload)


def test_every_message_shape_matches_the_schema():
    jsonschema.Draft7Validator.check_schema(SCHEMA)
    for msg in SAMPLES:
        validate(json.loads(encode_line(msg)))


def test_schema_rejects_malformed_payloads():
    good = json.loads(encode_line(SAMPLES[2]))
    bad = [
        {**good, "type": "mystery"},
        {k: v for k, v in good.items() if k != "raw_script_text"},
        {**good, "unexpected": 1},
        {**good, "seq": -1},
        {**good, "raw_script_text": 7},
        {},
    ]
    for payload in bad:
        with pytest.raises(jsonschema.ValidationError):
            validate(payload)


def test_machine_transcripts_validate_line_by_line(tmp_path):
    config = SuiteConfig(suite_id="mini", tasks=("l01_task1", "l01_task2"),
                         trials_per_task=1, camera=CameraModel(width=16, height=16))
    replies = iter(["%%%", "Go(35);", "Turn(180);", "Go(35);"])
    factory = lambda: SimpleNamespace(respond=lambda obs, privileged=None: next(replies))
    run_suite(config, agent_factory=factory, out_dir=tmp_path)

    checked = 0
    for transcript in sorted((tmp_path / "transcripts").glob("*.jsonl")):
        lines = transcript.read_text("utf-8").splitlines()
        assert json.loads(lines[0]) == {"transcript": "v1", "wire_version": "wire-v1"}
        for line in lines[1:]:
            row = json.loads(line)
            assert row["dir"] in ("out", "in", "note")
            validate(row["msg"])
            checked += 1
    assert checked >= 7  # both episodes plus the parse feedback exchange
