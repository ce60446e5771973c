"""The simulator by hand: motor frames, the reward ledger, termination.

Run: python3 demos/01_world_rewards.py
"""

from scriptarena import (
    MotorFrame,
    Termination,
    TraceRecorder,
    check_pass,
    initial_state,
    load_arena,
    run_frames,
)

FORWARD = MotorFrame(forward=1)
IDLE = MotorFrame()


def fresh(objects: str, agent: str = "20 8 heading=0"):
    text = (
        "arenaspec v1\n"
        "id: demo\n"
        "size: 40 40\n"
        "time_limit: 500\n"
        "pass_mark: 0.5\n"
        f"agent: {agent}\n" + objects
    )
    spec = load_arena(text)
    return spec, initial_state(spec)


GREEN = "object: GreenGoal\n  position: 20 26 0.5\n  size: 1\n"

# --- idling costs 1/T reward per step ----------------------------------------

spec, state = fresh(GREEN)
state, _ = run_frames(state, [IDLE] * 10, spec)
print(f"10 idle steps: reward {state.cumulative_reward:+.6f}, health {state.health:.1f}")
assert abs(state.cumulative_reward - (-10 / 500)) < 1e-12

# --- hot zones double the decay ----------------------------------------------

spec, state = fresh("object: HotZone\n  position: 20 8 0\n  size: 10 10\n")
state, _ = run_frames(state, [IDLE] * 10, spec)
print(f"10 idle steps in a hot zone: reward {state.cumulative_reward:+.6f}")
assert abs(state.cumulative_reward - (-20 / 500)) < 1e-12

# --- goals pay their diameter; green ends the episode --------------------------

spec, state = fresh(GREEN)
state, outcomes = run_frames(state, [FORWARD] * 35, spec)
hits = [e for o in outcomes for e in o.events if e.kind == "CollectedGoal"]
print(f"walked into the green: {hits[0].value:+.1f} at step {state.step}, {state.terminated.value}")
assert state.terminated is Termination.GOAL_REACHED
assert abs(hits[0].value - 1.0) < 1e-9
assert check_pass(state, spec)

# --- death zones cost -1 and end the episode ----------------------------------

spec, state = fresh("object: DeathZone\n  position: 20 14 0\n  size: 8 8\n")
state, _ = run_frames(state, [FORWARD] * 10, spec)
print(f"stepped into the death zone: reward {state.cumulative_reward:+.4f}, {state.terminated.value}")
assert state.terminated is Termination.DIED
assert state.cumulative_reward < -1.0
assert not check_pass(state, spec)

# --- identical runs hash identically -------------------------------------------


def digest() -> str:
    spec, state = fresh(GREEN)
    recorder = TraceRecorder(spec, 0)
    run_frames(state, [FORWARD] * 35, spec, recorder=recorder)
    return recorder.digest()


first, second = digest(), digest()
print(f"trace digest, twice: {first[:16]}... == {second[:16]}...")
assert first == second

print("ok")
