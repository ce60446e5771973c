"""Baseline policies: random walker, privileged greedy oracle, replay, canned mock.

Each agent exposes `respond(observation, privileged) -> str` so harness episodes
can wrap any of them in a LocalAgentSession. Only GreedyOracle sets
needs_privileged: it plans from exact world state, never from pixels.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from . import dsl
from .protocol import ObservationMsg, ReplayError, read_transcript
from .world import (
    AGENT_RADIUS,
    ArenaSpec,
    EpisodeState,
    ObjectKind,
    ObjectSpec,
    STEP_LENGTH,
    obb_for,
)

RANDOM_ARMS: tuple[str, ...] = (
    "Turn(-90);",
    "Turn(-30);",
    "Turn(30);",
    "Turn(90);",
    *[f"Go({n});" for n in range(3, 16)],
)


def random_script(seed: int, turn_index: int) -> str:
    """Uniform draw over the 17 baseline arms, reproducible per (seed, turn)."""
    rng = random.Random(f"random-agent:{seed}:{turn_index}")
    return RANDOM_ARMS[rng.randrange(len(RANDOM_ARMS))]


class RandomAgent:
    """Ignores observations; emits seeded uniform exploration scripts."""

    agent_id = "random"
    needs_privileged = False

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._turn = 0

    def respond(self, observation: ObservationMsg, privileged: object = None) -> str:
        script = random_script(self.seed, self._turn)
        self._turn += 1
        return script


@dataclass(frozen=True)
class _Target:
    index: int
    value: float
    distance: float
    x: float
    y: float


class GreedyOracle:
    """Privileged baseline: turn toward the best goal, then overshoot into it.

    Picks the highest-value surviving goal (greens and yellows, value = diameter),
    aims with the nearest 6-degree turn, and walks with a +3-step margin so the
    contact check lands inside the goal. Straight legs that would cross a death
    zone or graze a red goal detour via an inflated corner waypoint. Long legs
    are halved so residual aim error stays within the contact radius.
    """

    agent_id = "greedy-oracle"
    needs_privileged = True

    def __init__(self, margin_steps: int = 3, replan_every: int = 1):
        self.margin_steps = margin_steps
        self.replan_every = replan_every

    def respond(self, observation: ObservationMsg, privileged: object = None) -> str:
        if privileged is None:
            raise ValueError("GreedyOracle needs privileged world state")
        state, spec = privileged
        return greedy_script(state, spec, margin_steps=self.margin_steps)


def greedy_script(state: EpisodeState, spec: ArenaSpec, margin_steps: int = 3) -> str:
    ax, ay, az = state.agent_pos
    target = _pick_target(state, spec)
    if target is None:
        return "Turn(90);"

    gx, gy = target.x, target.y
    if _leg_blocked(spec, state, ax, ay, gx, gy):
        waypoint = _detour_waypoint(spec, state, ax, ay, gx, gy)
        if waypoint is not None:
            gx, gy = waypoint

    bearing = _relative_bearing(ax, ay, state.agent_heading, gx, gy)
    snapped = int(round(bearing / 6.0)) * 6
    if snapped != 0:
        return f"Turn({snapped});"

    distance = math.hypot(gx - ax, gy - ay)
    if (gx, gy) != (target.x, target.y):
        steps = max(1, round(distance / STEP_LENGTH))
        return f"Go({min(dsl.GO_RANGE, steps)});"
    if distance > 15.0 * STEP_LENGTH:
        steps = max(1, math.ceil(distance / (2.0 * STEP_LENGTH)))
        return f"Go({min(dsl.GO_RANGE, steps)});"
    steps = math.ceil(distance / STEP_LENGTH) + margin_steps
    return f"Go({min(dsl.GO_RANGE, steps)});"


def _pick_target(state: EpisodeState, spec: ArenaSpec) -> _Target | None:
    ax, ay, az = state.agent_pos
    best: _Target | None = None
    for idx, obj in enumerate(spec.objects):
        if obj.kind not in (ObjectKind.YELLOW_GOAL, ObjectKind.GREEN_GOAL):
            continue
        ostate = state.object_states[idx]
        if ostate.collected:
            continue
        gx, gy, gz = ostate.position
        if gz - obj.radius > az + 0.6:
            continue  # out of reach overhead; this oracle does not climb
        cand = _Target(
            index=idx,
            value=obj.size[0],
            distance=math.hypot(gx - ax, gy - ay),
            x=gx,
            y=gy,
        )
        if best is None or (cand.value, -cand.distance) > (best.value, -best.distance):
            best = cand
    return best


def _relative_bearing(ax: float, ay: float, heading: float, gx: float, gy: float) -> float:
    world = math.degrees(math.atan2(gx - ax, gy - ay))
    return (world - heading + 180.0) % 360.0 - 180.0


def _hazards(spec: ArenaSpec, state: EpisodeState):
    """Regions a straight leg must not cross: death zones and live red goals."""
    out = []
    for idx, obj in enumerate(spec.objects):
        if obj.kind is ObjectKind.DEATH_ZONE:
            out.append((obb_for(obj), AGENT_RADIUS + 0.4))
        elif obj.kind is ObjectKind.RED_GOAL and not state.object_states[idx].collected:
            pos = state.object_states[idx].position
            proxy = ObjectSpec(
                kind=ObjectKind.DEATH_ZONE, position=pos, size=(obj.size[0], obj.size[0])
            )
            out.append((obb_for(proxy), AGENT_RADIUS + obj.radius + 0.3))
    return out


def _leg_blocked(spec: ArenaSpec, state: EpisodeState, ax: float, ay: float, gx: float, gy: float) -> bool:
    length = math.hypot(gx - ax, gy - ay)
    if length < 1e-9:
        return False
    samples = max(2, int(length / 0.5))
    for (box, margin) in _hazards(spec, state):
        for i in range(samples + 1):
            t = i / samples
            px = ax + (gx - ax) * t
            py = ay + (gy - ay) * t
            if box.contains(px, py, margin=margin):
                return True
    return False


def _detour_waypoint(
    spec: ArenaSpec, state: EpisodeState, ax: float, ay: float, gx: float, gy: float
) -> tuple[float, float] | None:
    candidates: list[tuple[float, tuple[float, float]]] = []
    for (box, margin) in _hazards(spec, state):
        grow = margin + 1.0
        for cx, cy in box.corners():
            wx = box.cx + (cx - box.cx) * (1.0 + grow / max(box.hx, box.hy))
            wy = box.cy + (cy - box.cy) * (1.0 + grow / max(box.hx, box.hy))
            wx = min(spec.size[0] - AGENT_RADIUS, max(AGENT_RADIUS, wx))
            wy = min(spec.size[1] - AGENT_RADIUS, max(AGENT_RADIUS, wy))
            if _leg_blocked(spec, state, ax, ay, wx, wy):
                continue
            if _leg_blocked(spec, state, wx, wy, gx, gy):
                continue
            cost = math.hypot(wx - ax, wy - ay) + math.hypot(gx - wx, gy - wy)
            candidates.append((cost, (wx, wy)))
    if not candidates:
        return None
    candidates.sort(key=lambda c: c[0])
    return candidates[0][1]


class ReplayAgent:
    """Re-issues the action stream of a recorded transcript, verbatim."""

    agent_id = "replay"
    needs_privileged = False

    def __init__(self, transcript_path):
        actions = [
            msg.raw_script_text
            for direction, msg in read_transcript(transcript_path)
            if direction == "in" and msg.type == "action"
        ]
        if not actions:
            raise ReplayError("transcript holds no actions")
        self._actions = actions
        self._cursor = 0

    def respond(self, observation: ObservationMsg, privileged: object = None) -> str:
        if self._cursor >= len(self._actions):
            raise ReplayError("transcript exhausted mid-episode")
        text = self._actions[self._cursor]
        self._cursor += 1
        return text


class MockLLM:
    """Plays back canned response strings; raises when queried past the end."""

    agent_id = "mock-llm"
    needs_privileged = False

    def __init__(self, responses):
        self._responses = list(responses)
        self._cursor = 0

    def respond(self, observation: ObservationMsg, privileged: object = None) -> str:
        if self._cursor >= len(self._responses):
            raise ReplayError("mock responses exhausted")
        text = self._responses[self._cursor]
        self._cursor += 1
        return text
