"""Trial records, aggregation, external-results ingest, report emission.

Single-individual agents (LLMs, baselines) pool their trials into one pass
proportion per level. Population records (child cohorts, competition entrants)
first compute per-individual proportions, then summarise with median and
quartiles under linear interpolation. Reports are emitted deterministically:
stable ordering, canonical float formatting, byte-identical across reruns.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field

import numpy as np

POOLED_POPULATIONS = frozenset({"llm", "baseline"})
COHORT_POPULATIONS = frozenset({"child", "competition"})
KNOWN_POPULATIONS = POOLED_POPULATIONS | COHORT_POPULATIONS

_TASK_ID_RE = re.compile(r"^l(\d+)_task(\d+)$")


class SchemaError(ValueError):
    """External results rows do not match the interchange schema."""


class MixedPopulationError(ValueError):
    """A single summary would pool incompatible population kinds."""


@dataclass(frozen=True)
class TrialRecord:
    agent_id: str
    population: str
    task_id: str
    level: int
    trial_index: int
    passed: bool
    final_reward: float | None = None
    steps_used: int = 0
    scripts_used: int = 0
    transcript_ref: str | None = None
    trace_hash: str | None = None
    reason: str | None = None


def level_of_task(task_id: str) -> int:
    """Level encoded in a task id (l07_task2 -> 7); 0 for out-of-pack ids."""
    m = _TASK_ID_RE.match(task_id)
    return int(m.group(1)) if m else 0


@dataclass(frozen=True)
class LevelSummary:
    population: str
    agent_id: str | None  # None for cohort populations
    level: int
    n_trials: int
    n_individuals: int
    proportion_passed: float
    q1: float | None = None
    median: float | None = None
    q3: float | None = None


def quantile_linear(values: list[float], q: float) -> float:
    """Linear-interpolation quantile over the inclusive order statistics."""
    return float(np.percentile(np.asarray(values, dtype=np.float64), q * 100.0, method="linear"))


def aggregate(records: list[TrialRecord]) -> list[LevelSummary]:
    """Summarise pass proportions by level, honouring the population kind split."""
    for rec in records:
        if rec.population not in KNOWN_POPULATIONS:
            raise SchemaError(f"unknown population {rec.population!r}")

    by_agent: dict[str, set[str]] = {}
    for rec in records:
        by_agent.setdefault(rec.agent_id, set()).add(rec.population)
    for agent_id, pops in sorted(by_agent.items()):
        if len(pops) > 1:
            raise MixedPopulationError(f"agent {agent_id!r} spans populations {sorted(pops)}")

    summaries: list[LevelSummary] = []

    pooled: dict[tuple[str, str, int], list[TrialRecord]] = {}
    cohorts: dict[tuple[str, int], list[TrialRecord]] = {}
    for rec in records:
        if rec.population in POOLED_POPULATIONS:
            pooled.setdefault((rec.population, rec.agent_id, rec.level), []).append(rec)
        else:
            cohorts.setdefault((rec.population, rec.level), []).append(rec)

    for (population, agent_id, level), recs in sorted(pooled.items()):
        n = len(recs)
        passed = sum(1 for r in recs if r.passed)
        summaries.append(
            LevelSummary(
                population=population,
                agent_id=agent_id,
                level=level,
                n_trials=n,
                n_individuals=1,
                proportion_passed=passed / n,
            )
        )

    for (population, level), recs in sorted(cohorts.items()):
        per_individual: dict[str, list[bool]] = {}
        for r in recs:
            per_individual.setdefault(r.agent_id, []).append(r.passed)
        props = [sum(v) / len(v) for _, v in sorted(per_individual.items())]
        summaries.append(
            LevelSummary(
                population=population,
                agent_id=None,
                level=level,
                n_trials=len(recs),
                n_individuals=len(props),
                proportion_passed=sum(1 for r in recs if r.passed) / len(recs),
                q1=quantile_linear(props, 0.25),
                median=quantile_linear(props, 0.50),
                q3=quantile_linear(props, 0.75),
            )
        )

    summaries.sort(key=lambda s: (s.population, s.agent_id or "", s.level))
    return summaries


# --- records serialization ---------------------------------------------------


def records_to_jsonl(records: list[TrialRecord]) -> str:
    lines = []
    for rec in records:
        row = {
            "agent_id": rec.agent_id,
            "population": rec.population,
            "task_id": rec.task_id,
            "level": rec.level,
            "trial_index": rec.trial_index,
            "passed": rec.passed,
            "final_reward": rec.final_reward,
            "steps_used": rec.steps_used,
            "scripts_used": rec.scripts_used,
            "transcript_ref": rec.transcript_ref,
            "trace_hash": rec.trace_hash,
            "reason": rec.reason,
        }
        lines.append(json.dumps(row, sort_keys=True, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def records_from_jsonl(text: str) -> list[TrialRecord]:
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
            out.append(TrialRecord(**row))
        except (json.JSONDecodeError, TypeError) as exc:
            raise SchemaError(f"records line {i}: {exc}") from None
    return out


# --- interchange CSV -----------------------------------------------------------

CSV_HEADER = ["participant_id", "population", "task_id", "passed"]
_TRUTHY = {"1": True, "true": True, "0": False, "false": False}


def ingest_external_csv(text: str) -> list[TrialRecord]:
    """Read externally collected results from the interchange CSV format."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("csv is empty") from None
    if [h.strip() for h in header] != CSV_HEADER:
        raise SchemaError(f"csv header must be {','.join(CSV_HEADER)}")
    records: list[TrialRecord] = []
    seen: dict[tuple[str, str], int] = {}
    for i, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise SchemaError(f"row {i}: expected 4 columns, got {len(row)}")
        participant, population, task_id, passed_raw = (cell.strip() for cell in row)
        if population not in KNOWN_POPULATIONS:
            raise SchemaError(f"row {i}: unknown population {population!r}")
        flag = _TRUTHY.get(passed_raw.lower())
        if flag is None:
            raise SchemaError(f"row {i}: passed must be 0/1/true/false, got {passed_raw!r}")
        trial = seen.get((participant, task_id), 0)
        seen[(participant, task_id)] = trial + 1
        records.append(
            TrialRecord(
                agent_id=participant,
                population=population,
                task_id=task_id,
                level=level_of_task(task_id),
                trial_index=trial,
                passed=flag,
            )
        )
    return records


def export_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([rec.agent_id, rec.population, rec.task_id, "1" if rec.passed else "0"])
    return buf.getvalue()


# --- reports -----------------------------------------------------------------


def emit_report(summaries: list[LevelSummary], format: str = "table") -> str:
    """Deterministic report text: 'table' for humans, 'data' for machines."""
    ordered = sorted(summaries, key=lambda s: (s.population, s.agent_id or "", s.level))
    if format == "data":
        rows = []
        for s in ordered:
            rows.append(
                {
                    "population": s.population,
                    "agent_id": s.agent_id,
                    "level": s.level,
                    "n_trials": s.n_trials,
                    "n_individuals": s.n_individuals,
                    "proportion_passed": _round6(s.proportion_passed),
                    "q1": _round6(s.q1),
                    "median": _round6(s.median),
                    "q3": _round6(s.q3),
                }
            )
        return json.dumps({"report": "v1", "rows": rows}, sort_keys=True, indent=2) + "\n"
    if format != "table":
        raise ValueError(f"unknown report format {format!r}")

    headers = ["population", "agent", "level", "trials", "pass%", "q1", "median", "q3"]
    rows = [headers]
    for s in ordered:
        rows.append(
            [
                s.population,
                s.agent_id or "-",
                str(s.level),
                str(s.n_trials),
                f"{100.0 * s.proportion_passed:.1f}",
                _cell(s.q1),
                _cell(s.median),
                _cell(s.q3),
            ]
        )
    widths = [max(len(r[c]) for r in rows) for c in range(len(headers))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[c] for c in range(len(headers))))
    return "\n".join(lines) + "\n"


def _cell(x: float | None) -> str:
    return "-" if x is None else f"{x:.3f}"


def _round6(x: float | None) -> float | None:
    return None if x is None else round(x, 6)
