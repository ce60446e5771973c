"""Prompted episodes end to end: templates, a privileged baseline, a suite.

Run: python3 demos/05_harness_suite.py
"""

from scriptarena import (
    CameraModel,
    GreedyOracle,
    LocalAgentSession,
    aggregate,
    build_icl_transcript,
    emit_report,
    levels_suite,
    load_task_pack,
    load_template,
    run_episode,
    run_suite,
)

SMALL = CameraModel(width=32, height=32)

# --- prompt templates: plain instructions or a worked demonstration --------------

base = load_template("base", camera=SMALL)
print(f"base template: {len(base.base_text)} chars of instructions")
icl = load_template("icl", camera=SMALL)
pairs = build_icl_transcript(SMALL)
print(f"icl template: {len(pairs)} demonstration frames from the tutorial walkthrough")
assert len(pairs) == 44
assert sum(1 for _, response in pairs if response is not None) == 42

# --- one episode with the privileged greedy baseline ------------------------------

spec = load_task_pack()["l02_task2"]  # a red goal sits between agent and green
agent = GreedyOracle()
session = LocalAgentSession(agent.respond, needs_privileged=True)
record = run_episode(spec, session, template=base, camera=SMALL, agent_id="greedy-oracle")
print(f"{spec.id}: passed={record.passed} reward {record.final_reward:+.4f}"
      f" in {record.scripts_used} scripts / {record.steps_used} steps")
assert record.passed and record.reason == "GoalReached"

# --- a whole level as a suite, records aggregated into the standard table ---------

config = levels_suite([1], trials_per_task=2, camera=SMALL, agent_id="greedy-oracle")
records = run_suite(config, agent_factory=GreedyOracle)
assert len(records) == 8 and all(r.passed for r in records)
assert all(r.scripts_used <= 30 for r in records)
print(emit_report(aggregate(records)), end="")

print("ok")
