import json
import subprocess
import sys
from pathlib import Path

from scriptarena import ingest_external_csv

CONVERTER = Path(__file__).resolve().parent.parent / "tools" / "convert_external_results.py"

RAW = """\
child_id,task_name,success,notes
kid-a,open field,yes,quick
kid-a,two spheres,no,
kid-b,open field,1,
"""


def run_converter(tmp_path, extra, raw=RAW):
    src = tmp_path / "raw.csv"
    src.write_text(raw, encoding="utf-8")
    dst = tmp_path / "out.csv"
    argv = [sys.executable, str(CONVERTER), "--in", str(src), "--out", str(dst),
            "--population", "child", "--participant-col", "child_id",
            "--task-col", "task_name", "--passed-col", "success"] + extra
    proc = subprocess.run(argv, capture_output=True, text=True, timeout=60)
    return proc, dst


def test_converted_file_loads_through_the_strict_ingest(tmp_path):
    mapping = tmp_path / "map.json"
    mapping.write_text(json.dumps({"open field": "l01_task1", "two spheres": "l02_task1"}))
    proc, dst = run_converter(tmp_path, ["--task-map", str(mapping)])
    assert proc.returncode == 0, proc.stderr
    assert "3 trials from 2 participants" in proc.stdout

    records = ingest_external_csv(dst.read_text("utf-8"))
    assert [(r.agent_id, r.task_id, r.passed) for r in records] == [
        ("kid-a", "l01_task1", True),
        ("kid-a", "l02_task1", False),
        ("kid-b", "l01_task1", True),
    ]
    assert all(r.population == "child" for r in records)


def test_unmapped_task_names_are_an_error(tmp_path):
    mapping = tmp_path / "map.json"
    mapping.write_text(json.dumps({"open field": "l01_task1"}))
    proc, dst = run_converter(tmp_path, ["--task-map", str(mapping)])
    assert proc.returncode != 0
    assert "missing from the task map" in proc.stderr
    assert not dst.exists()


def test_unreadable_pass_flag_is_an_error(tmp_path):
    raw = "child_id,task_name,success\nkid-a,l01_task1,maybe\n"
    proc, dst = run_converter(tmp_path, [], raw=raw)
    assert proc.returncode != 0
    assert "cannot read 'maybe'" in proc.stderr
    assert not dst.exists()
