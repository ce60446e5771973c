import http.client
import io
import json
import subprocess
import sys
import time

import pytest

from scriptarena import (
    ArenaSpec,
    ObjectKind,
    ObjectSpec,
    decode_png,
    dump_arena,
    records_from_jsonl,
    records_to_jsonl,
    TrialRecord,
)
from scriptarena.cli import RESULTS_DIR_ENV, main


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert capsys.readouterr().out.startswith("scriptarena ")


# --- dsl check -----------------------------------------------------------------


def test_dsl_check_prints_canonical_form(tmp_path, capsys):
    source = tmp_path / "plan.txt"
    source.write_text('Think("scan");   Go( 5)  ;Turn(-12);', encoding="utf-8")
    assert main(["dsl", "check", str(source)]) == 0
    out = capsys.readouterr().out
    assert "Think('scan'); Go(5); Turn(-12);" in out
    assert "commands: 3" in out and "motor frames: 7" in out


def test_dsl_check_reads_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO("Go(3);"))
    assert main(["dsl", "check"]) == 0
    assert "Go(3);" in capsys.readouterr().out


def test_dsl_check_reports_parse_errors(tmp_path, capsys):
    source = tmp_path / "bad.txt"
    source.write_text("Jump(3);", encoding="utf-8")
    assert main(["dsl", "check", str(source)]) == 1
    assert "parse error [" in capsys.readouterr().out


# --- render ---------------------------------------------------------------------


def test_render_writes_first_person_png(tmp_path, capsys):
    out = tmp_path / "view.png"
    code = main(["render", "--task", "l01_task1", "--out", str(out),
                 "--width", "64", "--height", "48"])
    assert code == 0
    assert decode_png(out.read_bytes()).shape == (48, 64, 3)
    assert "wrote" in capsys.readouterr().out


def test_render_runs_a_script_first_and_supports_topdown(tmp_path, capsys):
    out = tmp_path / "top.png"
    code = main(["render", "--task", "l01_task1", "--out", str(out),
                 "--topdown", "--width", "128", "--script", "Turn(90); Go(3);"])
    assert code == 0
    assert decode_png(out.read_bytes()).shape == (128, 128, 3)
    out_text = capsys.readouterr().out
    assert "step 18" in out_text  # 15 turn increments + 3 go frames
    assert "128x128" in out_text


def test_render_accepts_a_task_file_path(tmp_path):
    ball = ObjectSpec(kind=ObjectKind.GREEN_GOAL, position=(20.0, 30.0, 0.5), size=(1.0,))
    spec = ArenaSpec(id="custom", agent_start=(20.0, 5.0, 0.0), objects=(ball,))
    task = tmp_path / "custom.task"
    task.write_text(dump_arena(spec), encoding="utf-8")
    out = tmp_path / "custom.png"
    assert main(["render", "--task", str(task), "--out", str(out), "--width", "32", "--height", "32"]) == 0
    assert out.exists()


def test_render_unknown_task_fails_cleanly(tmp_path, capsys):
    assert main(["render", "--task", "no_such_task", "--out", str(tmp_path / "x.png")]) == 2
    assert "error:" in capsys.readouterr().err


# --- run ------------------------------------------------------------------------


def suite_file(tmp_path, **extra):
    payload = {"suite_id": "tiny", "tasks": ["l01_task1"], "trials_per_task": 1}
    payload.update(extra)
    path = tmp_path / "suite.json"
    path.write_text(json.dumps(payload), encoding="utf-8")
    return path


def test_run_plays_a_suite_and_writes_records(tmp_path, capsys):
    out_dir = tmp_path / "results"
    code = main(["run", "--suite", str(suite_file(tmp_path)), "--agent", "greedy",
                 "--size", "32", "--out", str(out_dir)])
    assert code == 0
    records = records_from_jsonl((out_dir / "records.jsonl").read_text("utf-8"))
    assert len(records) == 1 and records[0].passed
    assert records[0].agent_id == "greedy-oracle"
    out = capsys.readouterr().out
    assert "1 trials, 1 passed" in out
    assert "population" in out  # report table follows the summary line


def test_run_uses_results_dir_env_when_out_is_omitted(tmp_path, capsys, monkeypatch):
    out_dir = tmp_path / "from-env"
    monkeypatch.setenv(RESULTS_DIR_ENV, str(out_dir))
    code = main(["run", "--suite", str(suite_file(tmp_path)), "--agent", "random",
                 "--size", "16", "--trials", "1"])
    assert code == 0
    assert (out_dir / "records.jsonl").exists()
    assert (out_dir / "transcripts" / "l01_task1_t0.jsonl").exists()


# --- report ---------------------------------------------------------------------


def test_report_merges_jsonl_and_csv_inputs(tmp_path, capsys):
    records = [
        TrialRecord(agent_id="m1", population="llm", task_id="l01_task1",
                    level=1, trial_index=0, passed=True),
        TrialRecord(agent_id="m1", population="llm", task_id="l01_task1",
                    level=1, trial_index=1, passed=False),
    ]
    jsonl = tmp_path / "records.jsonl"
    jsonl.write_text(records_to_jsonl(records), encoding="utf-8")
    csv_path = tmp_path / "kids.csv"
    csv_path.write_text("participant_id,population,task_id,passed\n"
                        "k1,child,l01_task1,1\nk2,child,l01_task1,0\n", encoding="utf-8")

    assert main(["report", "--in", str(jsonl), "--in", str(csv_path)]) == 0
    table = capsys.readouterr().out
    assert "llm" in table and "child" in table and "50.0" in table

    out = tmp_path / "report.json"
    assert main(["report", "--in", str(jsonl), "--format", "data", "--out", str(out)]) == 0
    payload = json.loads(out.read_text("utf-8"))
    assert payload["report"] == "v1" and len(payload["rows"]) == 1
    assert f"wrote {out}" in capsys.readouterr().out


def test_report_rejects_bad_csv(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("who,what\n", encoding="utf-8")
    assert main(["report", "--in", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


# --- serve ----------------------------------------------------------------------


def test_serve_requires_exactly_one_transport(capsys):
    assert main(["serve"]) == 2
    assert "exactly one" in capsys.readouterr().err
    assert main(["serve", "--stdio", "--bind", "127.0.0.1:0"]) == 2


def test_serve_human_subprocess_end_to_end(tmp_path):
    proc = subprocess.Popen(
        [sys.executable, "-m", "scriptarena", "serve", "--human",
         "--http", "127.0.0.1:0", "--task", "l01_task1", "--out", str(tmp_path)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        line = proc.stdout.readline().strip()
        assert line.startswith("listening on http://")
        host, port = line.rsplit("/", 1)[1].split(":")

        def call(method, path, payload=None):
            conn = http.client.HTTPConnection(host, int(port), timeout=30)
            body = json.dumps(payload).encode() if payload is not None else None
            conn.request(method, path, body=body,
                         headers={"Content-Type": "application/json"} if body else {})
            response = conn.getresponse()
            data = json.loads(response.read())
            conn.close()
            return response.status, data

        status, created = call("POST", "/api/session", {})
        assert status == 200
        sid = created["session_id"]
        after, done, deadline = 0, False, time.monotonic() + 60
        while not done and time.monotonic() < deadline:
            _, chunk = call("GET", f"/api/session/{sid}/messages?after={after}&wait=2")
            for message in chunk["messages"]:
                if message["type"] == "observation":
                    call("POST", f"/api/session/{sid}/action", {"raw_script_text": "Go(35);"})
                if message["type"] == "episode_end":
                    assert message["task_id"] == "l01_task1" and message["passed"] is True
            after = chunk["next"]
            done = chunk["closed"]
        assert done
    finally:
        proc.terminate()
        proc.wait(timeout=10)
