"""Author and verify the bundled 40-task pack.

Each task is defined as an ArenaSpec plus a scripted reference solution.
The tool simulates every solution through the real engine, enforces the
level structure rules (choice tasks have real choices, knock-down tasks
need the knock-down, every pass mark is positive and attainable with
margin), and freezes the .task files plus reference_solutions.json into
src/scriptarena/resources/taskpack/.

Usage: python3 tools/author_pack.py [--write]
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from scriptarena import dsl
from scriptarena.agents import greedy_script
from scriptarena.taskfile import dump_arena, load_arena
from scriptarena.world import (
    STEP_LENGTH,
    ArenaSpec,
    ObjectKind,
    ObjectSpec,
    Termination,
    TraceRecorder,
    check_pass,
    initial_state,
    run_frames,
)

PACK_DIR = Path(__file__).resolve().parent.parent / "src" / "scriptarena" / "resources" / "taskpack"
MAX_SCRIPTS = 30
PASS_SLACK = 0.1  # every reference solution must clear the pass mark by this much

K = ObjectKind


def sphere(kind: ObjectKind, x: float, y: float, d: float, z: float | None = None) -> ObjectSpec:
    return ObjectSpec(kind=kind, position=(x, y, d / 2.0 if z is None else z), size=(d,))


def zone(kind: ObjectKind, x: float, y: float, sx: float, sy: float) -> ObjectSpec:
    return ObjectSpec(kind=kind, position=(x, y, 0.0), size=(sx, sy))


def box(
    kind: ObjectKind,
    x: float,
    y: float,
    sx: float,
    sy: float,
    sz: float,
    rot: float = 0.0,
    transparent: bool = False,
) -> ObjectSpec:
    return ObjectSpec(
        kind=kind, position=(x, y, sz / 2.0), size=(sx, sy, sz), rotation=rot, transparent=transparent
    )


def arena(task_id, agent, objects, pass_mark, time_limit=500, blackouts=(), palette=()):
    spec = ArenaSpec(
        id=task_id,
        agent_start=agent,
        objects=tuple(objects),
        pass_mark=pass_mark,
        time_limit_steps=time_limit,
        blackouts=tuple(blackouts),
        palette_overrides=tuple(palette),
    )
    spec.validate()
    return spec


# --- scripted solution runner ----------------------------------------------


class Sim:
    def __init__(self, spec: ArenaSpec, seed: int = 0):
        self.spec = spec
        self.state = initial_state(spec, seed)
        self.scripts: list[str] = []
        self.event_kinds: list[str] = []
        self.steps: list = []

    @property
    def pos(self):
        return self.state.agent_pos

    def done(self) -> bool:
        return self.state.terminated is not Termination.RUNNING

    def run(self, text: str) -> None:
        if self.done():
            raise RuntimeError(f"{self.spec.id}: script after termination: {text}")
        self.scripts.append(text)
        if len(self.scripts) > MAX_SCRIPTS:
            raise RuntimeError(f"{self.spec.id}: blew the {MAX_SCRIPTS}-script budget")
        plan = dsl.compile(dsl.parse(text))
        state = self.state
        for frame in plan.frames:
            from scriptarena.world import step as world_step

            state, outcome = world_step(state, frame, self.spec)
            self.steps.append((state, outcome))
            self.event_kinds.extend(e.kind for e in outcome.events)
            if outcome.terminated_now:
                break
        self.state = state


def rel_bearing(state, x: float, y: float) -> float:
    ax, ay, _ = state.agent_pos
    world = math.degrees(math.atan2(x - ax, y - ay))
    return (world - state.agent_heading + 180.0) % 360.0 - 180.0


def goto(sim: Sim, x, y, tol=1.0, margin=0, stall_ok=False, max_iters=10, stop=None) -> str:
    for _ in range(max_iters):
        if sim.done():
            return "done"
        if stop is not None and stop():
            return "stopped"
        ax, ay, _ = sim.pos
        dist = math.hypot(x - ax, y - ay)
        if dist <= tol:
            return "arrived"
        snapped = int(round(rel_bearing(sim.state, x, y) / 6.0)) * 6
        steps = min(dsl.GO_RANGE, max(1, math.ceil(dist / STEP_LENGTH) + margin))
        sim.run((f"Turn({snapped});" if snapped else "") + f"Go({steps});")
        nx, ny, _ = sim.pos
        if math.hypot(nx - ax, ny - ay) < 0.08:
            if stall_ok:
                return "stalled"
            raise RuntimeError(f"{sim.spec.id}: stalled at {sim.pos} heading for ({x},{y})")
    if stall_ok:
        return "stalled"
    raise RuntimeError(f"{sim.spec.id}: never converged on ({x},{y}); at {sim.pos}")


def collect(sim: Sim, idx: int, margin=2) -> None:
    def stop() -> bool:
        return sim.state.object_states[idx].collected

    for _ in range(4):
        if sim.done() or stop():
            return
        gx, gy, _ = sim.state.object_states[idx].position
        goto(sim, gx, gy, tol=0.6, margin=margin, max_iters=6, stop=stop, stall_ok=True)
    if not (sim.done() or stop()):
        raise RuntimeError(f"{sim.spec.id}: object {idx} never collected; at {sim.pos}")


def run_oracle(sim: Sim) -> None:
    while not sim.done():
        sim.run(greedy_script(sim.state, sim.spec))


def run_plan(sim: Sim, plan) -> None:
    for op in plan:
        if sim.done():
            break
        kind = op[0]
        if kind == "oracle":
            run_oracle(sim)
        elif kind == "goto":
            _, x, y, *rest = op
            goto(sim, x, y, **(rest[0] if rest else {}))
        elif kind == "push":
            _, x, y = op
            goto(sim, x, y, tol=0.5, stall_ok=True, max_iters=14)
        elif kind == "script":
            sim.run(op[1])
        elif kind == "collect":
            _, idx, *rest = op
            collect(sim, idx, **(rest[0] if rest else {}))
        elif kind == "expect_knock":
            if "GoalKnockedDown" not in sim.event_kinds:
                raise RuntimeError(f"{sim.spec.id}: no knock-down happened; events {set(sim.event_kinds)}")
        else:
            raise ValueError(f"unknown plan op {op!r}")


# --- the 40 tasks -----------------------------------------------------------
#
# Level themes: 1 retrieval, 2 value preference, 3 static obstacles,
# 4 avoidance, 5 support/occlusion with knock-down, 6 recolored surroundings,
# 7 blackout intervals, 8 hidden goals, 9 counting, 10 tool use.


def l01_task1():
    spec = arena("l01_task1", (20, 8, 0), [sphere(K.GREEN_GOAL, 20, 26, 1.0)], pass_mark=0.5)
    return spec, [("oracle",)]


def l01_task2():
    spec = arena("l01_task2", (20, 20, 0), [sphere(K.GREEN_GOAL, 20, 6, 1.0)], pass_mark=0.5)
    return spec, [("oracle",)]


def l01_task3():
    spec = arena("l01_task3", (5, 5, 45), [sphere(K.GREEN_GOAL, 34, 33, 1.0)], pass_mark=0.5)
    return spec, [("oracle",)]


def l01_task4():
    spec = arena(
        "l01_task4",
        (5, 18, 90),
        [sphere(K.YELLOW_GOAL, 14, 20, 1.0), sphere(K.GREEN_GOAL, 27, 22, 1.0)],
        pass_mark=1.2,
    )
    return spec, [("oracle",)]


def l02_task1():
    spec = arena(
        "l02_task1",
        (20, 20, 0),
        [sphere(K.GREEN_GOAL, 8, 30, 2.0), sphere(K.GREEN_GOAL, 30, 28, 0.5)],
        pass_mark=1.5,
    )
    return spec, [("oracle",)]


def l02_task2():
    spec = arena(
        "l02_task2",
        (20, 5, 0),
        [sphere(K.RED_GOAL, 20, 14, 1.0), sphere(K.GREEN_GOAL, 20, 30, 1.0)],
        pass_mark=0.7,
    )
    return spec, [("oracle",)]


def l02_task3():
    spec = arena(
        "l02_task3",
        (6, 20, 90),
        [sphere(K.YELLOW_GOAL, 16, 20, 1.0), sphere(K.GREEN_GOAL, 34, 20, 0.5)],
        pass_mark=1.2,
    )
    return spec, [("oracle",)]


def l02_task4():
    spec = arena(
        "l02_task4",
        (20, 35, 180),
        [sphere(K.GREEN_GOAL, 10, 12, 1.5), sphere(K.GREEN_GOAL, 26, 22, 1.0)],
        pass_mark=1.25,
    )
    return spec, [("oracle",)]


def l03_task1():
    spec = arena(
        "l03_task1",
        (20, 6, 0),
        [box(K.WALL, 20, 18, 10, 0.5, 2.0), sphere(K.GREEN_GOAL, 20, 30, 1.0)],
        pass_mark=0.5,
    )
    return spec, [("goto", 27, 12), ("goto", 27, 24), ("collect", 1)]


def l03_task2():
    spec = arena(
        "l03_task2",
        (20, 10, 0),
        [
            box(K.WALL, 16.75, 28, 0.5, 7, 1.5),
            box(K.WALL, 23.25, 28, 0.5, 7, 1.5),
            box(K.WALL, 20, 24.75, 7, 0.5, 1.5),
            sphere(K.GREEN_GOAL, 20, 28, 1.0),
        ],
        pass_mark=0.5,
    )
    return spec, [("goto", 28, 16), ("goto", 28, 34), ("goto", 20, 34), ("collect", 3)]


def l03_task3():
    spec = arena(
        "l03_task3",
        (20, 6, 0),
        [
            box(K.WALL, 12, 16, 16, 0.5, 2.0),
            box(K.WALL, 28, 24, 16, 0.5, 2.0),
            sphere(K.GREEN_GOAL, 20, 32, 1.0),
        ],
        pass_mark=0.5,
    )
    return spec, [("goto", 24, 16), ("goto", 16, 24), ("collect", 2)]


def l03_task4():
    pillars = [box(K.WALL, x, y, 2, 2, 1.5) for x, y in ((12, 16), (20, 14), (28, 18), (16, 24), (24, 26))]
    spec = arena("l03_task4", (20, 4, 0), pillars + [sphere(K.GREEN_GOAL, 20, 34, 1.0)], pass_mark=0.5)
    return spec, [("goto", 7, 18), ("goto", 8, 28), ("collect", 5)]


def l04_task1():
    spec = arena(
        "l04_task1",
        (20, 8, 0),
        [zone(K.DEATH_ZONE, 20, 20, 24, 4), sphere(K.GREEN_GOAL, 20, 32, 1.0)],
        pass_mark=0.5,
    )
    return spec, [("goto", 35.5, 12), ("goto", 35.5, 28), ("collect", 1)]


def l04_task2():
    spec = arena(
        "l04_task2",
        (20, 8, 0),
        [
            sphere(K.RED_GOAL, 17, 20, 1.0),
            sphere(K.RED_GOAL, 23, 20, 1.0),
            sphere(K.GREEN_GOAL, 20, 32, 1.0),
        ],
        pass_mark=0.5,
    )
    return spec, [("goto", 20, 25), ("collect", 2)]


def l04_task3():
    spec = arena(
        "l04_task3",
        (5, 5, 0),
        [
            zone(K.DEATH_ZONE, 26, 31, 2, 10),
            zone(K.DEATH_ZONE, 31, 26, 10, 2),
            sphere(K.GREEN_GOAL, 31, 31, 1.0),
        ],
        pass_mark=0.5,
    )
    return spec, [("goto", 37, 10), ("goto", 37, 37), ("goto", 31, 36), ("collect", 2)]


def l04_task4():
    spec = arena(
        "l04_task4",
        (20, 8, 0),
        [
            zone(K.HOT_ZONE, 20, 20, 36, 8),
            sphere(K.RED_GOAL, 16, 20, 1.0),
            sphere(K.GREEN_GOAL, 20, 32, 1.0),
        ],
        pass_mark=0.8,
    )
    return spec, [("collect", 2)]


def l05_task1():
    spec = arena(
        "l05_task1",
        (8, 20, 90),
        [
            box(K.RAMP, 20.5, 20, 4, 5, 1.5, rot=90),
            box(K.PLATFORM, 26, 20, 6, 6, 1.5),
            sphere(K.GREEN_GOAL, 26, 20, 0.75, z=1.875),
        ],
        pass_mark=0.5,
    )
    return spec, [("goto", 16, 20), ("goto", 21, 20), ("goto", 25.5, 20), ("collect", 2)]


def l05_task2():
    spec = arena(
        "l05_task2",
        (14, 20, 90),
        [
            box(K.PLATFORM, 26, 20, 4, 4, 1.2),
            sphere(K.GREEN_GOAL, 26, 20, 0.75, z=1.575),
            box(K.PUSHABLE_BLOCK, 20, 20, 1, 1, 1),
        ],
        pass_mark=0.4,
    )
    return spec, [
        ("push", 25, 20),
        ("expect_knock",),
        ("script", "Go(-4);"),
        ("goto", 20, 15.2),
        ("goto", 31, 15.2),
        ("goto", 31, 19.5),
        ("collect", 1),
    ]


def l05_task3():
    spec = arena(
        "l05_task3",
        (12, 8, 20),
        [box(K.WALL, 28, 26, 8, 0.5, 2.0), sphere(K.GREEN_GOAL, 28, 30, 1.0)],
        pass_mark=0.5,
    )
    return spec, [("goto", 35, 20), ("goto", 35, 29), ("collect", 1)]


def l05_task4():
    spec = arena(
        "l05_task4",
        (20, 14, 0),
        [
            box(K.PLATFORM, 20, 28, 2, 2, 2.0),
            sphere(K.YELLOW_GOAL, 20, 28, 1.0, z=2.5),
            box(K.PUSHABLE_BLOCK, 20, 22, 1, 1, 1),
            sphere(K.GREEN_GOAL, 8, 8, 0.5),
        ],
        pass_mark=1.0,
    )
    return spec, [
        ("push", 20, 27),
        ("expect_knock",),
        ("script", "Go(-3);"),
        ("goto", 16.5, 25),
        ("goto", 16.5, 29.9),
        ("collect", 1),
        ("collect", 3),
    ]


def l06_task1():
    spec = arena(
        "l06_task1",
        (20, 6, 0),
        [sphere(K.GREEN_GOAL, 20, 28, 1.0)],
        pass_mark=0.5,
        palette=(("ground", "#7a5c3a"), ("fence", "#29295e"), ("sky", "#f2c891")),
    )
    return spec, [("oracle",)]


def l06_task2():
    spec = arena(
        "l06_task2",
        (20, 16, 0),
        [sphere(K.GREEN_GOAL, 10, 30, 1.5), sphere(K.GREEN_GOAL, 30, 26, 0.5)],
        pass_mark=1.2,
        palette=(("ground", "#3d3d3d"), ("fence", "#a63d3d"), ("sky", "#6a89a8")),
    )
    return spec, [("oracle",)]


def l06_task3():
    spec = arena(
        "l06_task3",
        (20, 6, 0),
        [
            box(K.WALL, 12, 16, 16, 0.5, 2.0),
            box(K.WALL, 28, 24, 16, 0.5, 2.0),
            sphere(K.GREEN_GOAL, 20, 32, 1.0),
        ],
        pass_mark=0.5,
        palette=(("wall", "#2b6f6f"), ("ground", "#544a2e"), ("sky", "#caa3d6")),
    )
    return spec, [("goto", 24, 16), ("goto", 16, 24), ("collect", 2)]


def l06_task4():
    spec = arena(
        "l06_task4",
        (20, 8, 0),
        [zone(K.DEATH_ZONE, 20, 20, 20, 4), sphere(K.GREEN_GOAL, 20, 30, 1.0)],
        pass_mark=0.5,
        palette=(("ground", "#1f3320"), ("sky", "#0f1040"), ("fence", "#9c9c9c")),
    )
    return spec, [("goto", 34, 14), ("goto", 34, 26), ("collect", 1)]


def l07_task1():
    spec = arena(
        "l07_task1",
        (20, 8, 0),
        [sphere(K.GREEN_GOAL, 20, 30, 1.0)],
        pass_mark=0.5,
        blackouts=((15, 45), (80, 120)),
    )
    return spec, [("collect", 0)]


def l07_task2():
    spec = arena(
        "l07_task2",
        (20, 10, 0),
        [sphere(K.GREEN_GOAL, 8, 28, 1.5), sphere(K.GREEN_GOAL, 32, 28, 0.5)],
        pass_mark=1.2,
        blackouts=((10, 40), (70, 100), (140, 180)),
    )
    return spec, [("oracle",)]


def l07_task3():
    spec = arena(
        "l07_task3",
        (20, 6, 0),
        [
            box(K.WALL, 12, 18, 16, 0.5, 2.0),
            box(K.WALL, 28, 26, 16, 0.5, 2.0),
            sphere(K.GREEN_GOAL, 20, 33, 1.0),
        ],
        pass_mark=0.5,
        blackouts=((20, 60), (100, 140)),
    )
    return spec, [("goto", 24, 18), ("goto", 16, 26), ("collect", 2)]


def l07_task4():
    spec = arena(
        "l07_task4",
        (20, 8, 0),
        [zone(K.DEATH_ZONE, 20, 20, 24, 4), sphere(K.GREEN_GOAL, 20, 32, 1.0)],
        pass_mark=0.5,
        blackouts=((25, 55), (90, 130)),
    )
    return spec, [("goto", 35.5, 12), ("goto", 35.5, 28), ("collect", 1)]


def l08_task1():
    spec = arena(
        "l08_task1",
        (20, 10, 0),
        [box(K.WALL, 20, 26, 8, 0.5, 2.5), sphere(K.GREEN_GOAL, 20, 30, 1.0)],
        pass_mark=0.5,
    )
    return spec, [("goto", 27, 20), ("goto", 27, 28), ("collect", 1)]


def l08_task2():
    spec = arena(
        "l08_task2",
        (8, 20, 90),
        [
            box(K.WALL, 30, 23.25, 6, 0.5, 1.5),
            box(K.WALL, 30, 16.75, 6, 0.5, 1.5),
            box(K.WALL, 27.25, 20, 0.5, 7, 1.5),
            sphere(K.GREEN_GOAL, 30, 20, 1.0),
        ],
        pass_mark=0.5,
    )
    return spec, [("goto", 26, 13), ("goto", 36, 14), ("goto", 36, 20), ("collect", 3)]


def l08_task3():
    spec = arena(
        "l08_task3",
        (8, 10, 30),
        [box(K.TUNNEL, 26, 26, 3, 6, 2.0, rot=90), sphere(K.GREEN_GOAL, 26, 26, 0.75)],
        pass_mark=0.5,
    )
    return spec, [("goto", 18, 26), ("collect", 1, {"margin": 3})]


def l08_task4():
    spec = arena(
        "l08_task4",
        (28, 8, -30),
        [box(K.PLATFORM, 12, 30, 5, 3, 1.8), sphere(K.GREEN_GOAL, 12, 33.8, 0.75)],
        pass_mark=0.5,
    )
    return spec, [("goto", 20, 34), ("collect", 1)]


def l09_task1():
    spec = arena(
        "l09_task1",
        (20, 10, 0),
        [
            sphere(K.YELLOW_GOAL, 10, 28, 1.0),
            sphere(K.YELLOW_GOAL, 13, 31, 1.0),
            sphere(K.YELLOW_GOAL, 27, 28, 1.0),
            sphere(K.YELLOW_GOAL, 31, 27, 1.0),
            sphere(K.YELLOW_GOAL, 30, 31, 1.0),
            sphere(K.YELLOW_GOAL, 27, 32, 1.0),
            sphere(K.GREEN_GOAL, 20, 36, 0.5),
        ],
        pass_mark=3.3,
    )
    return spec, [("collect", 2), ("collect", 3), ("collect", 4), ("collect", 5), ("collect", 6)]


def l09_task2():
    spec = arena(
        "l09_task2",
        (20, 8, 0),
        [
            sphere(K.YELLOW_GOAL, 12, 24, 0.5),
            sphere(K.YELLOW_GOAL, 16, 26, 0.5),
            sphere(K.YELLOW_GOAL, 20, 27, 0.5),
            sphere(K.YELLOW_GOAL, 24, 26, 0.5),
            sphere(K.YELLOW_GOAL, 28, 24, 0.5),
            sphere(K.YELLOW_GOAL, 20, 31, 0.5),
            sphere(K.GREEN_GOAL, 20, 35, 0.5),
        ],
        pass_mark=2.6,
    )
    return spec, [("collect", i) for i in range(7)]


def l09_task3():
    spec = arena(
        "l09_task3",
        (20, 10, 0),
        [
            sphere(K.YELLOW_GOAL, 11, 27, 0.6),
            sphere(K.YELLOW_GOAL, 8, 26, 0.6),
            sphere(K.YELLOW_GOAL, 10, 29, 0.6),
            sphere(K.YELLOW_GOAL, 8, 32, 0.6),
            sphere(K.YELLOW_GOAL, 12, 31, 0.6),
            sphere(K.YELLOW_GOAL, 30, 29, 2.0),
            sphere(K.GREEN_GOAL, 14, 35, 0.5),
        ],
        pass_mark=2.8,
    )
    return spec, [("collect", i) for i in range(5)] + [("collect", 6)]


def l09_task4():
    spec = arena(
        "l09_task4",
        (20, 8, 0),
        [
            sphere(K.YELLOW_GOAL, 14, 24, 1.0),
            sphere(K.YELLOW_GOAL, 20, 27, 1.0),
            sphere(K.YELLOW_GOAL, 26, 24, 1.0),
            sphere(K.RED_GOAL, 17, 22.5, 1.0),
            sphere(K.RED_GOAL, 23, 22.5, 1.0),
            sphere(K.RED_GOAL, 17, 30.5, 1.0),
            sphere(K.GREEN_GOAL, 20, 33, 0.5),
        ],
        pass_mark=3.0,
    )
    return spec, [("collect", 0), ("collect", 1), ("collect", 2), ("collect", 6)]


def l10_task1():
    spec = arena(
        "l10_task1",
        (6, 20, 90),
        [
            box(K.PLATFORM, 28, 20, 4, 4, 1.5),
            sphere(K.GREEN_GOAL, 28, 20, 0.75, z=1.875),
            box(K.PUSHABLE_BLOCK, 12, 20, 1, 1, 1),
        ],
        pass_mark=0.4,
        time_limit=600,
    )
    return spec, [
        ("push", 26, 20),
        ("expect_knock",),
        ("script", "Go(-4);"),
        ("goto", 24, 15.2),
        ("goto", 32.5, 15.2),
        ("goto", 32.5, 19.5),
        ("collect", 1),
    ]


def l10_task2():
    spec = arena(
        "l10_task2",
        (20, 12, 0),
        [
            box(K.WALL, 20, 30.25, 10, 0.5, 1.5),
            box(K.WALL, 15.25, 26, 0.5, 9, 1.5),
            box(K.WALL, 24.75, 26, 0.5, 9, 1.5),
            box(K.WALL, 16.95, 21.75, 3.9, 0.5, 1.5),
            box(K.WALL, 23.05, 21.75, 3.9, 0.5, 1.5),
            box(K.PUSHABLE_BLOCK, 20, 21.75, 2, 1, 1),
            sphere(K.GREEN_GOAL, 18, 28, 1.0),
        ],
        pass_mark=0.6,
    )
    return spec, [("push", 20, 24), ("goto", 18.3, 23.0), ("collect", 6)]


def l10_task3():
    spec = arena(
        "l10_task3",
        (10, 28, 90),
        [
            box(K.WALL, 21, 25.25, 7, 0.5, 1.5),
            box(K.WALL, 21, 30.75, 7, 0.5, 1.5),
            box(K.PLATFORM, 26.5, 28, 4, 4, 1.2),
            sphere(K.GREEN_GOAL, 26.5, 28, 0.75, z=1.575),
            box(K.PUSHABLE_BLOCK, 19, 28, 1, 4.5, 1),
        ],
        pass_mark=0.4,
        time_limit=600,
    )
    return spec, [
        ("push", 24.5, 28),
        ("expect_knock",),
        ("script", "Go(-7);"),
        ("goto", 14, 23.5),
        ("goto", 31.5, 23.5),
        ("goto", 31.5, 27.5),
        ("collect", 3),
    ]


def l10_task4():
    spec = arena(
        "l10_task4",
        (20, 12, 0),
        [
            box(K.TUNNEL, 20, 20, 3.2, 6, 1.6),
            box(K.WALL, 9.2, 20, 18.4, 0.5, 1.5),
            box(K.WALL, 30.8, 20, 18.4, 0.5, 1.5),
            box(K.PUSHABLE_BLOCK, 20, 21, 1.4, 1.4, 1),
            sphere(K.GREEN_GOAL, 20, 29, 1.0),
        ],
        pass_mark=0.6,
    )
    return spec, [("push", 20, 25.5), ("goto", 16, 25.8), ("collect", 4)]


BUILDERS = [
    l01_task1, l01_task2, l01_task3, l01_task4,
    l02_task1, l02_task2, l02_task3, l02_task4,
    l03_task1, l03_task2, l03_task3, l03_task4,
    l04_task1, l04_task2, l04_task3, l04_task4,
    l05_task1, l05_task2, l05_task3, l05_task4,
    l06_task1, l06_task2, l06_task3, l06_task4,
    l07_task1, l07_task2, l07_task3, l07_task4,
    l08_task1, l08_task2, l08_task3, l08_task4,
    l09_task1, l09_task2, l09_task3, l09_task4,
    l10_task1, l10_task2, l10_task3, l10_task4,
]


def verify_structure(specs: dict[str, ArenaSpec]) -> None:
    expected = {f"l{lv:02d}_task{k}" for lv in range(1, 11) for k in range(1, 5)}
    assert set(specs) == expected, sorted(expected ^ set(specs))
    for spec in specs.values():
        assert spec.pass_mark > 0, spec.id
        roundtrip = load_arena(dump_arena(spec))
        assert roundtrip == spec, f"{spec.id}: task file does not round-trip"
    kinds2 = {o.kind for o in specs["l05_task2"].objects}
    assert K.PUSHABLE_BLOCK in kinds2 and K.PLATFORM in kinds2, "l05_task2 contents"
    for tid, spec in specs.items():
        level = int(tid[1:3])
        if level == 6:
            assert spec.palette_overrides, tid
        if level == 7:
            assert spec.blackouts, tid
        if level in (2, 9):
            goals = [o for o in spec.objects if o.kind in (K.GREEN_GOAL, K.YELLOW_GOAL, K.RED_GOAL)]
            assert len(goals) >= 2, f"{tid}: choice level needs several goals"


def main(argv):
    write = "--write" in argv
    specs: dict[str, ArenaSpec] = {}
    solutions: dict[str, dict] = {}
    oracle_by_level: dict[int, int] = {}

    for build in BUILDERS:
        spec, plan = build()
        specs[spec.id] = spec
        sim = Sim(spec, seed=0)
        run_plan(sim, plan)
        if sim.state.terminated is not Termination.GOAL_REACHED:
            raise SystemExit(f"{spec.id}: solution ended {sim.state.terminated.value} at {sim.pos}")
        reward = sim.state.cumulative_reward
        if not check_pass(sim.state, spec) or reward - spec.pass_mark < PASS_SLACK:
            raise SystemExit(f"{spec.id}: reward {reward:.3f} too close to pass mark {spec.pass_mark}")
        rec = TraceRecorder(spec, 0)
        for st, out in sim.steps:
            rec.record(st, out)
        solutions[spec.id] = {
            "scripts": sim.scripts,
            "final_reward": reward,
            "steps": sim.state.step,
            "trace_hash": rec.digest(),
        }
        print(
            f"{spec.id}: {len(sim.scripts):2d} scripts {sim.state.step:3d} steps "
            f"reward {reward:6.3f} (mark {spec.pass_mark}) events {sorted(set(sim.event_kinds))}"
        )

        # informational: does the privileged oracle solve it?
        osim = Sim(spec, seed=0)
        try:
            run_oracle(osim)
            passed = osim.state.terminated is Termination.GOAL_REACHED and check_pass(osim.state, spec)
        except RuntimeError:
            passed = False
        level = int(spec.id[1:3])
        oracle_by_level[level] = oracle_by_level.get(level, 0) + (1 if passed else 0)

    verify_structure(specs)
    print("oracle passes by level:", dict(sorted(oracle_by_level.items())))
    assert oracle_by_level[1] == 4, "oracle must clear every retrieval task"
    assert oracle_by_level[2] >= 3, "oracle must clear most preference tasks"

    if write:
        for tid, spec in sorted(specs.items()):
            (PACK_DIR / f"{tid}.task").write_text(dump_arena(spec))
        (PACK_DIR / "reference_solutions.json").write_text(
            json.dumps(solutions, indent=1, sort_keys=True) + "\n"
        )
        print(f"wrote {len(specs)} task files + reference_solutions.json to {PACK_DIR}")


if __name__ == "__main__":
    main(sys.argv[1:])
