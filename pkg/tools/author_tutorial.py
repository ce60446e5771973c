"""Regenerate resources/taskpack/tutorial.task from the canned walkthrough.

The tutorial arena must make the fixed response sequence in
resources/tutorial_responses.json play out as written: the agent crosses the
hot zone early, passes a death zone without entering, picks up a yellow ball
mid-route, skirts two red balls, shoves a box pile aside near the end, and
finishes on the green ball. Placements are derived from the simulated
trajectory itself (several legs ride the fence, so poses cannot be computed by
hand), then the full episode is re-verified before the task file is written.

Run from the repository root:  python3 tools/author_tutorial.py [--write]
"""

from __future__ import annotations

import argparse
import json
import math
import pathlib
import sys
from dataclasses import dataclass

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from scriptarena import dsl  # noqa: E402
from scriptarena.taskfile import dump_arena, load_arena  # noqa: E402
from scriptarena.world import (  # noqa: E402
    ArenaSpec,
    ObjectKind,
    ObjectSpec,
    Termination,
    initial_state,
    step as world_step,
    trace_hash,
)

ROOT = pathlib.Path(__file__).resolve().parents[1]
RESPONSES = json.loads(
    (ROOT / "src/scriptarena/resources/tutorial_responses.json").read_text("utf-8")
)
TASK_PATH = ROOT / "src/scriptarena/resources/taskpack/tutorial.task"

START = (6.0, 14.0, 0.0)
TIME_LIMIT = 2000
PASS_MARK = 1.0

# 1-based response indices carrying narrative beats
R_HOT = 9
R_DEATH = 13
R_YELLOW = 18
R_RED1_VIEW = 21
R_RED2_VIEW = 34
R_BOXES = 38
R_GREEN = 42


@dataclass
class Leg:
    index: int  # 1-based response number
    start: tuple[float, float, float]  # x, y, heading at leg start
    end: tuple[float, float, float]
    points: list[tuple[float, float]]  # per-frame positions
    events: list


def simulate(spec: ArenaSpec):
    state = initial_state(spec)
    legs: list[Leg] = []
    steps = []
    for i, response in enumerate(RESPONSES, start=1):
        plan = dsl.compile(dsl.parse(response))
        start = (state.agent_pos[0], state.agent_pos[1], state.agent_heading)
        points = []
        events = []
        for motor in plan.frames:
            if state.terminated is not Termination.RUNNING:
                break
            state, outcome = world_step(state, motor, spec)
            steps.append((state, outcome))
            points.append((state.agent_pos[0], state.agent_pos[1]))
            events.extend(outcome.events)
        legs.append(
            Leg(
                index=i,
                start=start,
                end=(state.agent_pos[0], state.agent_pos[1], state.agent_heading),
                points=points,
                events=events,
            )
        )
        if state.terminated is not Termination.RUNNING:
            break
    return legs, state, steps


def bearing_offset(pose, bearing_deg: float, dist: float) -> tuple[float, float]:
    """Point at a camera-relative bearing (degrees right of heading) and range."""
    x, y, h = pose
    rad = math.radians(h + bearing_deg)
    return x + dist * math.sin(rad), y + dist * math.cos(rad)


def leg_frame(leg: Leg) -> tuple[tuple[float, float], tuple[float, float]]:
    """Unit displacement direction of a leg and its left-hand normal."""
    sx, sy = leg.start[:2]
    ex, ey = leg.end[:2]
    dx, dy = ex - sx, ey - sy
    norm = math.hypot(dx, dy)
    if norm < 1e-9:
        raise ValueError(f"leg {leg.index} has no displacement")
    d = (dx / norm, dy / norm)
    return d, (-d[1], d[0])


def leg_point(leg: Leg, fraction: float) -> tuple[float, float]:
    pts = [leg.start[:2]] + leg.points
    i = min(len(pts) - 1, int(round(fraction * (len(pts) - 1))))
    return pts[i]


def all_points(legs: list[Leg], upto: int | None = None) -> list[tuple[float, float]]:
    pts = []
    for leg in legs:
        if upto is not None and leg.index > upto:
            break
        pts.append(leg.start[:2])
        pts.extend(leg.points)
    return pts


def min_dist(point, pts) -> float:
    return min(math.hypot(point[0] - p[0], point[1] - p[1]) for p in pts)


def build_spec(objects) -> ArenaSpec:
    spec = ArenaSpec(
        id="tutorial",
        time_limit_steps=TIME_LIMIT,
        pass_mark=PASS_MARK,
        agent_start=START,
        objects=tuple(objects),
    )
    spec.validate()
    return spec


SCENERY = [
    ObjectSpec(kind=ObjectKind.RAMP, position=(10.0, 33.0, 0.0), size=(3.0, 4.0, 1.2), rotation=135.0),
    ObjectSpec(kind=ObjectKind.PLATFORM, position=(30.0, 34.0, 0.25), size=(8.0, 2.0, 0.5)),
    ObjectSpec(kind=ObjectKind.TUNNEL, position=(3.2, 30.0, 0.0), size=(2.5, 4.0, 2.0)),
    ObjectSpec(kind=ObjectKind.WALL, position=(36.0, 30.0, 0.75), size=(5.0, 0.5, 1.5), rotation=90.0, transparent=True),
    ObjectSpec(kind=ObjectKind.WALL, position=(12.0, 3.0, 1.0), size=(6.0, 0.5, 2.0)),
]


def author():
    problems: list[str] = []

    # phase A: the bare trajectory fixes zones, balls, and red-ball anchors
    legs, _, _ = simulate(build_spec(SCENERY))
    by_index = {leg.index: leg for leg in legs}
    if len(legs) < len(RESPONSES):
        problems.append(f"phase A: run ended early at response {legs[-1].index}")
        return build_spec(SCENERY), None, None, problems

    hx, hy = leg_point(by_index[R_HOT], 0.55)
    hot = ObjectSpec(kind=ObjectKind.HOT_ZONE, position=(hx, hy, 0.0), size=(4.5, 3.5))

    dmid = leg_point(by_index[R_DEATH], 0.5)
    _, dleft = leg_frame(by_index[R_DEATH])
    death = ObjectSpec(
        kind=ObjectKind.DEATH_ZONE,
        position=(dmid[0] + 3.6 * dleft[0], dmid[1] + 3.6 * dleft[1], 0.0),
        size=(3.2, 4.0),
    )

    yx, yy = leg_point(by_index[R_YELLOW], 0.5)
    yellow = ObjectSpec(kind=ObjectKind.YELLOW_GOAL, position=(yx, yy, 0.25), size=(0.5,))

    r1 = bearing_offset(by_index[R_RED1_VIEW].end, 26.0, 8.0)
    r2 = bearing_offset(by_index[R_RED2_VIEW].end, 25.0, 4.0)
    red1 = ObjectSpec(kind=ObjectKind.RED_GOAL, position=(r1[0], r1[1], 0.375), size=(0.75,))
    red2 = ObjectSpec(kind=ObjectKind.RED_GOAL, position=(r2[0], r2[1], 0.375), size=(0.75,))

    # phase B: the box pile grazes the push leg so the agent shoves it and slides past
    bdir, bleft = leg_frame(by_index[R_BOXES])
    bx, by = leg_point(by_index[R_BOXES], 0.35)
    a_pos = (bx + 0.78 * bleft[0], by + 0.78 * bleft[1])
    b_pos = (a_pos[0] + 1.04 * bleft[0] + 0.9 * bdir[0], a_pos[1] + 1.04 * bleft[1] + 0.9 * bdir[1])
    box_a = ObjectSpec(kind=ObjectKind.PUSHABLE_BLOCK, position=(a_pos[0], a_pos[1], 0.5), size=(1.0, 1.0, 1.0))
    box_b = ObjectSpec(kind=ObjectKind.PUSHABLE_BLOCK, position=(b_pos[0], b_pos[1], 0.5), size=(1.0, 1.0, 1.0))

    fixed = [yellow, red1, red2, hot, death, box_a, box_b, *SCENERY]
    legs_b, _, _ = simulate(build_spec(fixed))
    by_b = {leg.index: leg for leg in legs_b}
    if len(legs_b) < len(RESPONSES):
        problems.append(f"phase B: run ended early at response {legs_b[-1].index}")
        return build_spec(fixed), None, None, problems

    # phase C: green ball on the final approach
    gdir, gleft = leg_frame(by_b[R_GREEN])
    gx, gy = leg_point(by_b[R_GREEN], 0.55)
    green = ObjectSpec(
        kind=ObjectKind.GREEN_GOAL,
        position=(gx + 0.45 * gleft[0], gy + 0.45 * gleft[1], 0.75),
        size=(1.5,),
    )

    spec = build_spec([green, yellow, red1, red2, hot, death, box_a, box_b, *SCENERY])
    legs_f, state, steps = simulate(spec)
    by_f = {leg.index: leg for leg in legs_f}

    # phase D: verify every narrative beat against the final simulation
    if legs_f[-1].index != len(RESPONSES):
        problems.append(f"final run ended early at response {legs_f[-1].index}")
        return spec, state, steps, problems

    pre_pts = all_points(legs_f, upto=R_GREEN - 1)
    for label, obj, margin in [
        ("red ball 1", red1, 1.6),
        ("red ball 2", red2, 1.6),
        ("green ball", green, 2.0),
    ]:
        d = min_dist(obj.position[:2], pre_pts)
        if d < margin:
            problems.append(f"{label} too close to the route before its moment: {d:.2f} < {margin}")

    for obj in SCENERY:
        d = min_dist(obj.position[:2], all_points(legs_f))
        if d < 3.0:
            problems.append(f"scenery {obj.kind.value} close to the route: {d:.2f}")

    hot_on_leg = sum(1 for e in by_f[R_HOT].events if e.kind == "InHotZone")
    hot_total = sum(1 for leg in legs_f for e in leg.events if e.kind == "InHotZone")
    if hot_on_leg == 0:
        problems.append("hot zone never crossed during its leg")
    if hot_total != hot_on_leg:
        problems.append("hot zone touched outside its leg")

    collected = [e for leg in legs_f for e in leg.events if e.kind == "CollectedGoal"]
    if not any(e.kind == "CollectedGoal" for e in by_f[R_YELLOW].events):
        problems.append("yellow ball not collected on its leg")
    if len(collected) != 2:
        problems.append(f"expected the yellow and green collections only, saw {len(collected)}")

    if not any(e.kind == "Pushed" for e in by_f[R_BOXES].events):
        problems.append("no box pushed during the push leg")
    push_leg = by_f[R_BOXES]
    through = (push_leg.end[0] - box_a.position[0]) * bdir[0] + (push_leg.end[1] - box_a.position[1]) * bdir[1]
    if through < 0.8:
        problems.append(f"agent did not make it past the box pile: {through:.2f}")

    if any(e.kind == "EnteredDeathZone" for leg in legs_f for e in leg.events):
        problems.append("stepped into the death zone")
    if state.terminated is not Termination.GOAL_REACHED:
        problems.append(f"episode ended {state.terminated.value}, wanted GoalReached")
    if not any(e.kind == "CollectedGoal" for e in by_f[R_GREEN].events):
        problems.append("green ball not collected on the final leg")
    if state.cumulative_reward < PASS_MARK:
        problems.append(f"final reward {state.cumulative_reward:.3f} under the pass mark")

    return spec, state, steps, problems


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--write", action="store_true", help="write the task file")
    parser.add_argument("--trace", action="store_true", help="print per-response positions")
    args = parser.parse_args()

    spec, state, steps, problems = author()

    if args.trace:
        legs, _, _ = simulate(spec)
        for leg in legs:
            x, y, h = leg.end
            print(f"  r{leg.index:02d} -> ({x:6.2f}, {y:6.2f}) h={h:7.1f} "
                  f"events={[e.kind for e in leg.events]}")

    if problems:
        print("NOT OK:")
        for p in problems:
            print(f"  - {p}")
        return 1

    print(f"OK: ends {state.terminated.value} at step {state.step}, "
          f"reward {state.cumulative_reward:.6f}, health {state.health:.1f}")
    print(f"trace hash {trace_hash(spec, 0, steps)}")

    if args.write:
        text = dump_arena(spec)
        reparsed = load_arena(text)
        assert reparsed.id == spec.id and len(reparsed.objects) == len(spec.objects)
        TASK_PATH.write_text(text, encoding="utf-8")
        print(f"wrote {TASK_PATH}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
