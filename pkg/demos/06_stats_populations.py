"""Comparing populations: machine records, an external cohort, one report.

Run: python3 demos/06_stats_populations.py
"""

from scriptarena import (
    TrialRecord,
    aggregate,
    emit_report,
    export_csv,
    ingest_external_csv,
    level_of_task,
    records_from_jsonl,
    records_to_jsonl,
)

# --- machine trials, three per task, as the harness records them ------------------


def machine(task: str, trial: int, passed: bool) -> TrialRecord:
    return TrialRecord(
        agent_id="walker-1", population="llm", task_id=task,
        level=level_of_task(task), trial_index=trial, passed=passed,
        final_reward=0.9 if passed else -0.2, steps_used=40, scripts_used=3,
        reason="GoalReached" if passed else "TimedOut",
    )


records = [
    machine(task, trial, passed)
    for task, outcomes in [
        ("l01_task1", (True, True, True)),
        ("l01_task2", (True, False, True)),
        ("l02_task1", (False, False, True)),
    ]
    for trial, passed in enumerate(outcomes)
]

# --- an external cohort arrives as a four-column CSV -------------------------------

COHORT_CSV = """\
participant_id,population,task_id,passed
kid-a,child,l01_task1,1
kid-a,child,l01_task2,1
kid-b,child,l01_task1,1
kid-b,child,l01_task2,0
kid-c,child,l01_task1,0
kid-c,child,l01_task2,0
kid-d,child,l01_task1,1
kid-d,child,l01_task2,1
"""
cohort = ingest_external_csv(COHORT_CSV)
print(f"ingested {len(cohort)} cohort trials from {len({r.agent_id for r in cohort})} children")

# --- one aggregation covers both: pooled agents and per-individual quartiles --------

summaries = aggregate(records + cohort)
print(emit_report(summaries), end="")

child_row = next(s for s in summaries if s.population == "child")
assert child_row.n_individuals == 4
assert child_row.q1 is not None and child_row.q1 <= child_row.median <= child_row.q3
llm_rows = [s for s in summaries if s.population == "llm"]
assert all(s.q1 is None for s in llm_rows)  # single individual: no quartile band

# --- round-trips: jsonl for our records, csv for the interchange schema -------------

assert records_from_jsonl(records_to_jsonl(records)) == records
assert ingest_external_csv(export_csv(cohort)) == cohort
print("jsonl and csv round-trips: exact")

# --- the data format is byte-stable for diffing --------------------------------------

data = emit_report(summaries, format="data")
assert data == emit_report(list(reversed(summaries)), format="data")
print(f"data report: {len(data)} bytes, order-insensitive")

print("ok")
