"""Map an external study's results file onto the interchange CSV.

Population comparisons run off a four-column CSV
(participant_id,population,task_id,passed; see docs/stats-schemas.md).
External datasets rarely arrive in that shape. This stub handles the
common case, a long-format CSV with one row per trial and arbitrary
column names; wide layouts or per-session spreadsheets should start
from a copy of this file.

Example:

    python3 tools/convert_external_results.py \
        --in raw_children.csv --out children.csv \
        --population child --participant-col child_id \
        --task-col task_name --passed-col success \
        --task-map name_to_id.json

The optional task map is a JSON object from external task names to
bundled task ids. Output is re-read through the strict ingest path
before it is written, so a converted file always loads.
"""

import argparse
import csv
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from scriptarena import ingest_external_csv  # noqa: E402

TRUE_WORDS = {"1", "true", "yes", "y", "pass", "passed"}
FALSE_WORDS = {"0", "false", "no", "n", "fail", "failed"}


def convert(raw_text, population, participant_col, task_col, passed_col, task_map):
    reader = csv.DictReader(raw_text.splitlines())
    for col in (participant_col, task_col, passed_col):
        if reader.fieldnames is None or col not in reader.fieldnames:
            raise SystemExit(f"error: column {col!r} not in input header {reader.fieldnames}")

    out_rows = []
    unmapped = set()
    for line_no, row in enumerate(reader, start=2):
        task = row[task_col].strip()
        if task_map is not None:
            if task not in task_map:
                unmapped.add(task)
                continue
            task = task_map[task]
        flag = row[passed_col].strip().lower()
        if flag in TRUE_WORDS:
            passed = "1"
        elif flag in FALSE_WORDS:
            passed = "0"
        else:
            raise SystemExit(f"error: line {line_no}: cannot read {row[passed_col]!r} as pass/fail")
        out_rows.append((row[participant_col].strip(), population, task, passed))

    if unmapped:
        names = ", ".join(sorted(unmapped)[:5])
        raise SystemExit(f"error: {len(unmapped)} task name(s) missing from the task map: {names}")
    if not out_rows:
        raise SystemExit("error: no trials found in the input")

    lines = ["participant_id,population,task_id,passed"]
    lines += [",".join(row) for row in out_rows]
    return "\n".join(lines) + "\n"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--in", dest="src", required=True, help="external results CSV")
    parser.add_argument("--out", dest="dst", required=True, help="interchange CSV to write")
    parser.add_argument("--population", default="child",
                        choices=["child", "competition", "llm", "baseline"])
    parser.add_argument("--participant-col", default="participant_id")
    parser.add_argument("--task-col", default="task_id")
    parser.add_argument("--passed-col", default="passed")
    parser.add_argument("--task-map", help="JSON object: external task name -> bundled task id")
    args = parser.parse_args(argv)

    task_map = None
    if args.task_map:
        task_map = json.loads(pathlib.Path(args.task_map).read_text("utf-8"))

    raw = pathlib.Path(args.src).read_text("utf-8")
    out_text = convert(raw, args.population, args.participant_col,
                       args.task_col, args.passed_col, task_map)
    records = ingest_external_csv(out_text)  # strict validation before writing
    pathlib.Path(args.dst).write_text(out_text, encoding="utf-8")
    participants = len({r.agent_id for r in records})
    print(f"wrote {args.dst}: {len(records)} trials from {participants} participants")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
