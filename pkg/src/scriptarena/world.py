"""Arena world model: geometry, kinematics, reward ledger, termination.

Goals:
  * deterministic episode dynamics (fixed iteration order, fixed-precision trig,
    integer decay ticks) so a trace hashes identically across reruns and platforms
  * a small 2.5D physics core: the agent is a circle on a height field, boxes are
    oriented rectangles, elevation only changes via ramps and platform tops

Non-goals: rendering (see render.py), script parsing (see dsl.py), any networking.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field, replace
from enum import Enum

AGENT_DIAMETER = 1.0
AGENT_RADIUS = AGENT_DIAMETER / 2.0
DEFAULT_ARENA_SIZE = 40.0

#: Distance covered by one forward motor frame. Calibrated so a 35-step run
#: spans the full arena width: 35 * (40/35) == 40.
STEP_LENGTH = 40.0 / 35.0

#: Degrees applied by one rotation motor frame.
TURN_INCREMENT = 6

_GROUND_EPS = 0.05
_RESOLVE_EPS = 1e-9


class ValidationError(ValueError):
    """An arena description violates a structural invariant.

    The message names the invariant ("blackouts overlap", "object outside
    arena", ...) so callers can match on it.
    """


class InvalidStateError(RuntimeError):
    """Raised when stepping or scoring an episode in the wrong lifecycle phase."""


class Termination(str, Enum):
    RUNNING = "Running"
    GOAL_REACHED = "GoalReached"
    DIED = "Died"
    TIMED_OUT = "TimedOut"
    BUDGET_EXHAUSTED = "BudgetExhausted"


class ObjectKind(str, Enum):
    YELLOW_GOAL = "YellowGoal"
    GREEN_GOAL = "GreenGoal"
    RED_GOAL = "RedGoal"
    DEATH_ZONE = "DeathZone"
    HOT_ZONE = "HotZone"
    WALL = "Wall"
    RAMP = "Ramp"
    PLATFORM = "Platform"
    PUSHABLE_BLOCK = "PushableBlock"
    TUNNEL = "Tunnel"


SPHERE_KINDS = frozenset({ObjectKind.YELLOW_GOAL, ObjectKind.GREEN_GOAL, ObjectKind.RED_GOAL})
ZONE_KINDS = frozenset({ObjectKind.DEATH_ZONE, ObjectKind.HOT_ZONE})
BOX_KINDS = frozenset(
    {ObjectKind.WALL, ObjectKind.RAMP, ObjectKind.PLATFORM, ObjectKind.PUSHABLE_BLOCK, ObjectKind.TUNNEL}
)
#: Kinds whose colour carries meaning and therefore cannot be restyled.
FIXED_COLOR_KINDS = frozenset(
    {
        ObjectKind.YELLOW_GOAL,
        ObjectKind.GREEN_GOAL,
        ObjectKind.RED_GOAL,
        ObjectKind.DEATH_ZONE,
        ObjectKind.HOT_ZONE,
        ObjectKind.RAMP,
        ObjectKind.PLATFORM,
        ObjectKind.PUSHABLE_BLOCK,
    }
)

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class ObjectSpec:
    """One placed object.

    size semantics by kind: spheres take a single diameter, flat zones take
    (sx, sy) ground extents, boxes take (sx, sy, sz). position is the centre;
    for spheres z is the sphere centre height (defaults to the radius, i.e.
    resting on the ground), for boxes z is the vertical centre.
    """

    kind: ObjectKind
    position: Vec3
    size: tuple[float, ...]
    rotation: float = 0.0
    color: str | None = None
    transparent: bool = False

    @property
    def radius(self) -> float:
        return self.size[0] / 2.0

    @property
    def top_height(self) -> float:
        if self.kind in SPHERE_KINDS:
            return self.position[2] + self.radius
        if self.kind in ZONE_KINDS:
            return 0.0
        return self.position[2] + self.size[2] / 2.0

    @property
    def base_height(self) -> float:
        if self.kind in SPHERE_KINDS:
            return self.position[2] - self.radius
        if self.kind in ZONE_KINDS:
            return 0.0
        return self.position[2] - self.size[2] / 2.0


@dataclass(frozen=True)
class ArenaSpec:
    """Static description of one task: geometry, timing, pass threshold."""

    id: str
    size: tuple[float, float] = (DEFAULT_ARENA_SIZE, DEFAULT_ARENA_SIZE)
    time_limit_steps: int = 500
    pass_mark: float = 0.0
    agent_start: tuple[float, float, float] = (20.0, 20.0, 0.0)  # x, y, heading in degrees
    objects: tuple[ObjectSpec, ...] = ()
    blackouts: tuple[tuple[int, int], ...] = ()
    palette_overrides: tuple[tuple[str, str], ...] = ()

    def in_blackout(self, step: int) -> bool:
        return any(a <= step < b for a, b in self.blackouts)

    def validate(self) -> None:
        if self.time_limit_steps <= 0:
            raise ValidationError("time limit not positive")
        if self.size[0] <= 2 * AGENT_RADIUS or self.size[1] <= 2 * AGENT_RADIUS:
            raise ValidationError("arena too small")
        ax, ay, _ = self.agent_start
        if not (AGENT_RADIUS <= ax <= self.size[0] - AGENT_RADIUS and AGENT_RADIUS <= ay <= self.size[1] - AGENT_RADIUS):
            raise ValidationError("agent start outside arena")
        spans = sorted(self.blackouts)
        for a, b in spans:
            if a < 0 or b > self.time_limit_steps:
                raise ValidationError("blackout outside episode")
            if b <= a:
                raise ValidationError("blackout interval empty")
        for (_, b1), (a2, _) in zip(spans, spans[1:]):
            if a2 < b1:
                raise ValidationError("blackouts overlap")
        for key, _ in self.palette_overrides:
            if key not in ("sky", "ground", "fence", "wall", "tunnel"):
                raise ValidationError("palette override not allowed for semantic surface")
        for obj in self.objects:
            self._validate_object(obj)

    def _validate_object(self, obj: ObjectSpec) -> None:
        if obj.kind in SPHERE_KINDS:
            if len(obj.size) != 1 or obj.size[0] <= 0:
                raise ValidationError("sphere size not positive")
            half = obj.radius
        elif obj.kind in ZONE_KINDS:
            if len(obj.size) != 2 or min(obj.size) <= 0:
                raise ValidationError("zone extents not positive")
            half = math.hypot(obj.size[0], obj.size[1]) / 2.0
        else:
            if len(obj.size) != 3 or min(obj.size) <= 0:
                raise ValidationError("box extents not positive")
            half = math.hypot(obj.size[0], obj.size[1]) / 2.0
        x, y, _ = obj.position
        if not (-half <= x <= self.size[0] + half and -half <= y <= self.size[1] + half):
            raise ValidationError("object outside arena")
        if x < half - 1e-9 or x > self.size[0] - half + 1e-9 or y < half - 1e-9 or y > self.size[1] - half + 1e-9:
            # footprint may poke past the fence only for axis-aligned boundary walls
            if obj.kind not in BOX_KINDS or abs(obj.rotation) % 90 > 1e-9:
                raise ValidationError("object outside arena")
        if obj.color is not None and obj.kind in FIXED_COLOR_KINDS:
            raise ValidationError("color fixed for kind")
        if obj.transparent and obj.kind is not ObjectKind.WALL:
            raise ValidationError("transparency only for walls")


@dataclass(frozen=True)
class PhysicsConfig:
    """Tunable dynamics constants shared by the world and the script compiler."""

    step_length: float = STEP_LENGTH
    goal_value_per_diameter: float = 1.0
    health_reference: float = 1.0
    hot_zone_decay_multiplier: int = 2
    death_zone_penalty: float = 1.0
    push_speed_threshold: float = 1.0
    push_distance: float = STEP_LENGTH / 2.0
    climb_tolerance: float = 0.55


DEFAULT_PHYSICS = PhysicsConfig()


@dataclass(frozen=True)
class MotorFrame:
    """One atomic world step: forward in {-1, 0, +1}, rotate in {-6, 0, +6}."""

    forward: int = 0
    rotate: int = 0


IDLE_FRAME = MotorFrame()


@dataclass(frozen=True)
class ObjectState:
    """Mutable-per-episode part of one object: where it is, whether it is gone."""

    position: Vec3
    collected: bool = False


@dataclass(frozen=True)
class Event:
    kind: str  # CollectedGoal | EnteredDeathZone | InHotZone | Collision | Pushed | GoalKnockedDown
    object_index: int = -1
    value: float = 0.0

    def canonical(self) -> str:
        return f"{self.kind}:{self.object_index}:{self.value!r}"


@dataclass(frozen=True)
class StepOutcome:
    events: tuple[Event, ...]
    reward_delta: float
    terminated_now: bool


@dataclass(frozen=True)
class EpisodeState:
    """Opaque, immutable snapshot of a running episode.

    cumulative_reward is derived from an exact integer tick count so that an
    idle episode's decay equals -n/T to the last bit.
    """

    agent_pos: Vec3
    agent_heading: float
    agent_velocity: float
    step: int
    terminated: Termination
    decay_ticks: int
    event_reward: float
    object_states: tuple[ObjectState, ...]
    rng_seed: int
    time_limit: int
    health_reference: float = 1.0

    @property
    def cumulative_reward(self) -> float:
        return self.event_reward - self.decay_ticks / self.time_limit

    @property
    def health(self) -> float:
        raw = 100.0 * (1.0 + self.cumulative_reward / self.health_reference)
        return min(100.0, max(0.0, raw))


def initial_state(spec: ArenaSpec, seed: int = 0, config: PhysicsConfig = DEFAULT_PHYSICS) -> EpisodeState:
    states = tuple(ObjectState(position=obj.position) for obj in spec.objects)
    x, y, heading = spec.agent_start
    return EpisodeState(
        agent_pos=(x, y, 0.0),
        agent_heading=float(heading) % 360.0,
        agent_velocity=0.0,
        step=0,
        terminated=Termination.RUNNING,
        decay_ticks=0,
        event_reward=0.0,
        object_states=states,
        rng_seed=seed,
        time_limit=spec.time_limit_steps,
        health_reference=config.health_reference,
    )


# --- fixed-precision trig -------------------------------------------------
#
# Headings and box rotations are the only trig consumers. Rounding to twelve
# decimals wipes out last-ulp libm differences between platforms while staying
# ~1e-13 of the true value, which keeps traces portable.

def _sin_deg(deg: float) -> float:
    return round(math.sin(math.radians(deg % 360.0)), 12)


def _cos_deg(deg: float) -> float:
    return round(math.cos(math.radians(deg % 360.0)), 12)


def heading_direction(heading_deg: float) -> tuple[float, float]:
    """Unit ground-plane direction for a compass heading (0 = +y, 90 = +x)."""
    return _sin_deg(heading_deg), _cos_deg(heading_deg)


# --- oriented boxes -------------------------------------------------------


@dataclass(frozen=True)
class Obb:
    cx: float
    cy: float
    hx: float
    hy: float
    axis_x: tuple[float, float]
    axis_y: tuple[float, float]

    def to_local(self, px: float, py: float) -> tuple[float, float]:
        dx, dy = px - self.cx, py - self.cy
        return (
            dx * self.axis_x[0] + dy * self.axis_x[1],
            dx * self.axis_y[0] + dy * self.axis_y[1],
        )

    def corners(self) -> list[tuple[float, float]]:
        out = []
        for sx, sy in ((1, 1), (1, -1), (-1, -1), (-1, 1)):
            lx, ly = sx * self.hx, sy * self.hy
            out.append(
                (
                    self.cx + lx * self.axis_x[0] + ly * self.axis_y[0],
                    self.cy + lx * self.axis_x[1] + ly * self.axis_y[1],
                )
            )
        return out

    def contains(self, px: float, py: float, margin: float = 0.0) -> bool:
        lx, ly = self.to_local(px, py)
        return abs(lx) <= self.hx + margin and abs(ly) <= self.hy + margin


def obb_for(obj: ObjectSpec, position: Vec3 | None = None) -> Obb:
    """Ground-plane oriented box for a box or zone object (local +y = rotation heading)."""
    pos = position if position is not None else obj.position
    sx, sy = obj.size[0], obj.size[1]
    ax = (_cos_deg(obj.rotation), -_sin_deg(obj.rotation))
    ay = (_sin_deg(obj.rotation), _cos_deg(obj.rotation))
    return Obb(cx=pos[0], cy=pos[1], hx=sx / 2.0, hy=sy / 2.0, axis_x=ax, axis_y=ay)


#: Wall thickness used for the two solid side slabs a Tunnel contributes.
TUNNEL_SLAB_THICKNESS = 0.3


def tunnel_slabs(obj: ObjectSpec, position: Vec3 | None = None) -> list[Obb]:
    """A tunnel blocks on its two sides and is passable along its local +y axis."""
    pos = position if position is not None else obj.position
    sx, sy = obj.size[0], obj.size[1]
    ax = (_cos_deg(obj.rotation), -_sin_deg(obj.rotation))
    ay = (_sin_deg(obj.rotation), _cos_deg(obj.rotation))
    off = sx / 2.0 - TUNNEL_SLAB_THICKNESS / 2.0
    out = []
    for side in (-1.0, 1.0):
        cx = pos[0] + side * off * ax[0]
        cy = pos[1] + side * off * ax[1]
        out.append(Obb(cx=cx, cy=cy, hx=TUNNEL_SLAB_THICKNESS / 2.0, hy=sy / 2.0, axis_x=ax, axis_y=ay))
    return out


def _circle_obb_mtv(px: float, py: float, r: float, box: Obb) -> tuple[float, float, float] | None:
    """Minimal translation (unit normal + depth) to push a circle out of a box."""
    lx, ly = box.to_local(px, py)
    qx = min(box.hx, max(-box.hx, lx))
    qy = min(box.hy, max(-box.hy, ly))
    dx, dy = lx - qx, ly - qy
    d2 = dx * dx + dy * dy
    if d2 >= r * r:
        return None
    if d2 > 0.0:
        d = math.sqrt(d2)
        nlx, nly = dx / d, dy / d
        depth = r - d
    else:
        pen_x = box.hx - abs(lx)
        pen_y = box.hy - abs(ly)
        if pen_x <= pen_y:
            nlx, nly = (1.0 if lx >= 0 else -1.0), 0.0
            depth = pen_x + r
        else:
            nlx, nly = 0.0, (1.0 if ly >= 0 else -1.0)
            depth = pen_y + r
    nx = nlx * box.axis_x[0] + nly * box.axis_y[0]
    ny = nlx * box.axis_x[1] + nly * box.axis_y[1]
    return nx, ny, depth


def _obb_overlap(a: Obb, b: Obb) -> bool:
    for box, other in ((a, b), (b, a)):
        for axis in (box.axis_x, box.axis_y):
            pa = _project_obb(a, axis)
            pb = _project_obb(b, axis)
            if pa[1] < pb[0] or pb[1] < pa[0]:
                return False
    return True


def _project_obb(box: Obb, axis: tuple[float, float]) -> tuple[float, float]:
    c = box.cx * axis[0] + box.cy * axis[1]
    e = box.hx * abs(box.axis_x[0] * axis[0] + box.axis_x[1] * axis[1]) + box.hy * abs(
        box.axis_y[0] * axis[0] + box.axis_y[1] * axis[1]
    )
    return c - e, c + e


def ramp_height_at(obj: ObjectSpec, px: float, py: float) -> float | None:
    """Height of a ramp's top surface at a ground point, None when outside."""
    box = obb_for(obj)
    lx, ly = box.to_local(px, py)
    if abs(lx) > box.hx or abs(ly) > box.hy:
        return None
    frac = (ly + box.hy) / (2.0 * box.hy)
    return obj.size[2] * frac


# --- stepping -------------------------------------------------------------


class _Frame:
    """Per-step scratch context: solids and movables resolved against state."""

    __slots__ = ("spec", "cfg", "states", "events", "moved")

    def __init__(self, spec: ArenaSpec, cfg: PhysicsConfig, states: list[ObjectState]):
        self.spec = spec
        self.cfg = cfg
        self.states = states
        self.events: list[Event] = []
        self.moved = False


def step(
    state: EpisodeState,
    motor: MotorFrame,
    spec: ArenaSpec,
    config: PhysicsConfig = DEFAULT_PHYSICS,
) -> tuple[EpisodeState, StepOutcome]:
    """Advance the episode by one motor frame.

    Raises InvalidStateError if the episode already terminated. Order within a
    step is fixed: rotate, translate (with collision/push resolution), decay
    tick, goal contacts, death-zone check, time-limit check.
    """
    if state.terminated is not Termination.RUNNING:
        raise InvalidStateError("step() on a terminated episode")
    if motor.forward not in (-1, 0, 1) or motor.rotate not in (-TURN_INCREMENT, 0, TURN_INCREMENT):
        raise ValueError(f"malformed motor frame: {motor}")

    cfg = config
    heading = (state.agent_heading + motor.rotate) % 360.0
    px, py, pz = state.agent_pos
    frame = _Frame(spec, cfg, list(state.object_states))

    if motor.forward != 0:
        dirx, diry = heading_direction(heading)
        disp = cfg.step_length * motor.forward
        px, py, pz = _translate(frame, px, py, pz, dirx * disp, diry * disp)
    else:
        pz = _support_height(frame, px, py, pz)

    velocity = math.hypot(px - state.agent_pos[0], py - state.agent_pos[1])

    # decay tick: doubled while the agent centre stands in a hot zone at ground level
    on_ground = pz <= _GROUND_EPS
    in_hot = on_ground and _inside_zone(frame, ObjectKind.HOT_ZONE, px, py) >= 0
    ticks = cfg.hot_zone_decay_multiplier if in_hot else 1
    if in_hot:
        frame.events.append(Event("InHotZone"))

    event_reward = state.event_reward
    terminated = Termination.RUNNING

    agent_cz = pz + AGENT_RADIUS
    for idx, obj in enumerate(spec.objects):
        if obj.kind not in SPHERE_KINDS:
            continue
        ostate = frame.states[idx]
        if ostate.collected:
            continue
        gx, gy, gz = ostate.position
        reach = AGENT_RADIUS + obj.radius
        d2 = (px - gx) ** 2 + (py - gy) ** 2 + (agent_cz - gz) ** 2
        if d2 > reach * reach:
            continue
        value = cfg.goal_value_per_diameter * obj.size[0]
        frame.states[idx] = replace(ostate, collected=True)
        if obj.kind is ObjectKind.YELLOW_GOAL:
            event_reward += value
            frame.events.append(Event("CollectedGoal", idx, value))
        elif obj.kind is ObjectKind.GREEN_GOAL:
            event_reward += value
            frame.events.append(Event("CollectedGoal", idx, value))
            terminated = Termination.GOAL_REACHED
            break
        else:  # red goal
            event_reward -= value
            frame.events.append(Event("CollectedGoal", idx, -value))
            terminated = Termination.DIED
            break

    if terminated is Termination.RUNNING and on_ground:
        death_idx = _inside_zone(frame, ObjectKind.DEATH_ZONE, px, py)
        if death_idx >= 0:
            event_reward -= cfg.death_zone_penalty
            frame.events.append(Event("EnteredDeathZone", death_idx, -cfg.death_zone_penalty))
            terminated = Termination.DIED

    new_step = state.step + 1
    if terminated is Termination.RUNNING and new_step >= spec.time_limit_steps:
        terminated = Termination.TIMED_OUT

    new_state = replace(
        state,
        agent_pos=(px, py, pz),
        agent_heading=heading,
        agent_velocity=velocity,
        step=new_step,
        terminated=terminated,
        decay_ticks=state.decay_ticks + ticks,
        event_reward=event_reward,
        object_states=tuple(frame.states),
    )
    outcome = StepOutcome(
        events=tuple(frame.events),
        reward_delta=new_state.cumulative_reward - state.cumulative_reward,
        terminated_now=terminated is not Termination.RUNNING,
    )
    return new_state, outcome


def run_frames(
    state: EpisodeState,
    frames: tuple[MotorFrame, ...] | list[MotorFrame],
    spec: ArenaSpec,
    config: PhysicsConfig = DEFAULT_PHYSICS,
    recorder: "TraceRecorder | None" = None,
) -> tuple[EpisodeState, list[StepOutcome]]:
    """Run motor frames in order, stopping early if the episode terminates."""
    outcomes: list[StepOutcome] = []
    for frame in frames:
        state, outcome = step(state, frame, spec, config)
        outcomes.append(outcome)
        if recorder is not None:
            recorder.record(state, outcome)
        if outcome.terminated_now:
            break
    return state, outcomes


def _inside_zone(frame: _Frame, kind: ObjectKind, px: float, py: float) -> int:
    for idx, obj in enumerate(frame.spec.objects):
        if obj.kind is kind and obb_for(obj).contains(px, py):
            return idx
    return -1


def _static_solids(frame: _Frame, z: float) -> list[tuple[int, Obb]]:
    """Solid oriented boxes at the agent's current elevation (blocks excluded)."""
    cfg = frame.cfg
    out: list[tuple[int, Obb]] = []
    for idx, obj in enumerate(frame.spec.objects):
        pos = frame.states[idx].position
        if obj.kind is ObjectKind.WALL:
            if obj.top_height > z + cfg.climb_tolerance and obj.base_height < z + AGENT_DIAMETER:
                out.append((idx, obb_for(obj, pos)))
        elif obj.kind is ObjectKind.PLATFORM:
            if obj.top_height > z + cfg.climb_tolerance:
                out.append((idx, obb_for(obj, pos)))
        elif obj.kind is ObjectKind.TUNNEL:
            for slab in tunnel_slabs(obj, pos):
                out.append((idx, slab))
    return out


def _translate(frame: _Frame, px: float, py: float, pz: float, dx: float, dy: float) -> Vec3:
    """Move the agent with collision resolution, pushing, and height updates."""
    cfg = frame.cfg
    spec = frame.spec
    substeps = 4
    speed = math.hypot(dx, dy)
    push_dir = (dx / speed, dy / speed) if speed > 0 else (0.0, 0.0)
    collided = False
    for _ in range(substeps):
        px += dx / substeps
        py += dy / substeps
        solids = _static_solids(frame, pz)
        solids.extend(_ramp_walls(frame, px, py, pz))
        for _ in range(4):
            moved = False
            for _, box in solids:
                mtv = _circle_obb_mtv(px, py, AGENT_RADIUS, box)
                if mtv is not None:
                    nx, ny, depth = mtv
                    px += nx * (depth + _RESOLVE_EPS)
                    py += ny * (depth + _RESOLVE_EPS)
                    moved = True
                    collided = True
            if not moved:
                break
        px, py, fence_hit = _clamp_to_fence(spec, px, py)
        collided = collided or fence_hit
        px, py, pushed = _resolve_blocks(frame, px, py, pz, push_dir, speed)
        collided = collided or pushed
        pz = _support_height(frame, px, py, pz)
    if collided:
        frame.events.append(Event("Collision"))
    return px, py, pz


def _ramp_walls(frame: _Frame, px: float, py: float, pz: float) -> list[tuple[int, Obb]]:
    """Ramps act as walls wherever their surface is too high to step onto."""
    out = []
    for idx, obj in enumerate(frame.spec.objects):
        if obj.kind is not ObjectKind.RAMP:
            continue
        box = obb_for(obj)
        lx, ly = box.to_local(px, py)
        cx = min(box.hx, max(-box.hx, lx))
        cy = min(box.hy, max(-box.hy, ly))
        frac = (cy + box.hy) / (2.0 * box.hy)
        contact_height = obj.size[2] * frac
        if contact_height > pz + frame.cfg.climb_tolerance:
            out.append((idx, box))
    return out


def _clamp_to_fence(spec: ArenaSpec, px: float, py: float) -> tuple[float, float, bool]:
    nx = min(spec.size[0] - AGENT_RADIUS, max(AGENT_RADIUS, px))
    ny = min(spec.size[1] - AGENT_RADIUS, max(AGENT_RADIUS, py))
    return nx, ny, (nx != px or ny != py)


def _resolve_blocks(
    frame: _Frame,
    px: float,
    py: float,
    pz: float,
    push_dir: tuple[float, float],
    speed: float,
) -> tuple[float, float, bool]:
    cfg = frame.cfg
    spec = frame.spec
    touched = False
    for idx, obj in enumerate(spec.objects):
        if obj.kind is not ObjectKind.PUSHABLE_BLOCK:
            continue
        pos = frame.states[idx].position
        box = obb_for(obj, pos)
        mtv = _circle_obb_mtv(px, py, AGENT_RADIUS, box)
        if mtv is None:
            continue
        touched = True
        if speed >= cfg.push_speed_threshold and (push_dir[0] or push_dir[1]):
            shift = cfg.push_distance / 4.0  # per substep
            cand = (pos[0] + push_dir[0] * shift, pos[1] + push_dir[1] * shift, pos[2])
            cand_box = obb_for(obj, cand)
            blocker = _block_obstruction(frame, idx, cand_box)
            if blocker is None:
                frame.states[idx] = replace(frame.states[idx], position=cand)
                box = cand_box
                if not any(e.kind == "Pushed" and e.object_index == idx for e in frame.events):
                    frame.events.append(Event("Pushed", idx))
            elif blocker >= 0 and spec.objects[blocker].kind is ObjectKind.PLATFORM:
                _knock_down_goals(frame, blocker, push_dir)
        mtv = _circle_obb_mtv(px, py, AGENT_RADIUS, box)
        if mtv is not None:
            nx, ny, depth = mtv
            px += nx * (depth + _RESOLVE_EPS)
            py += ny * (depth + _RESOLVE_EPS)
    return px, py, touched


def _block_obstruction(frame: _Frame, block_idx: int, cand: Obb) -> int | None:
    """Index of whatever stops a block's candidate move, -1 for the fence, None if clear."""
    spec = frame.spec
    for cx, cy in cand.corners():
        if not (0.0 <= cx <= spec.size[0] and 0.0 <= cy <= spec.size[1]):
            return -1
    for idx, obj in enumerate(spec.objects):
        if idx == block_idx:
            continue
        pos = frame.states[idx].position
        if obj.kind in (ObjectKind.WALL, ObjectKind.PLATFORM):
            if _obb_overlap(cand, obb_for(obj, pos)):
                return idx
        elif obj.kind is ObjectKind.TUNNEL:
            if any(_obb_overlap(cand, slab) for slab in tunnel_slabs(obj, pos)):
                return idx
        elif obj.kind is ObjectKind.PUSHABLE_BLOCK:
            if _obb_overlap(cand, obb_for(obj, pos)):
                return idx
    return None


def _knock_down_goals(frame: _Frame, platform_idx: int, push_dir: tuple[float, float]) -> None:
    """A block slamming into a platform knocks spheres resting on it to the ground."""
    platform = frame.spec.objects[platform_idx]
    plat_box = obb_for(platform, frame.states[platform_idx].position)
    top = platform.top_height
    for idx, obj in enumerate(frame.spec.objects):
        if obj.kind not in SPHERE_KINDS:
            continue
        ostate = frame.states[idx]
        if ostate.collected:
            continue
        gx, gy, gz = ostate.position
        if gz < top - 0.2 or not plat_box.contains(gx, gy, margin=obj.radius + 0.2):
            continue
        reach = _project_obb(plat_box, push_dir)
        centre = plat_box.cx * push_dir[0] + plat_box.cy * push_dir[1]
        extent = reach[1] - centre
        travel = extent + obj.radius + 0.4
        nx = plat_box.cx + push_dir[0] * travel
        ny = plat_box.cy + push_dir[1] * travel
        nx = min(frame.spec.size[0] - obj.radius, max(obj.radius, nx))
        ny = min(frame.spec.size[1] - obj.radius, max(obj.radius, ny))
        frame.states[idx] = replace(ostate, position=(nx, ny, obj.radius))
        frame.events.append(Event("GoalKnockedDown", idx))


def _support_height(frame: _Frame, px: float, py: float, pz: float) -> float:
    best = 0.0
    tol = frame.cfg.climb_tolerance
    for idx, obj in enumerate(frame.spec.objects):
        if obj.kind is ObjectKind.RAMP:
            h = ramp_height_at(obj, px, py)
            if h is not None and h <= pz + tol:
                best = max(best, h)
        elif obj.kind is ObjectKind.PLATFORM:
            pos = frame.states[idx].position
            if obb_for(obj, pos).contains(px, py):
                top = obj.top_height
                if top <= pz + tol:
                    best = max(best, top)
    return best


# --- scoring & tracing ----------------------------------------------------


def check_pass(state: EpisodeState, spec: ArenaSpec) -> bool:
    """Pass/fail for a finished episode: cumulative reward >= pass mark (ties pass)."""
    if state.terminated is Termination.RUNNING:
        raise InvalidStateError("check_pass() before termination")
    return state.cumulative_reward >= spec.pass_mark


class TraceRecorder:
    """Streams (state, outcome) pairs into a stable cross-platform digest.

    Floats are hashed from their IEEE-754 bytes, never from formatted text, so
    two runs agree iff every intermediate value agrees bit for bit.
    """

    def __init__(self, spec: ArenaSpec, seed: int):
        self._h = hashlib.sha256()
        self._h.update(b"trace-v1\x00")
        self._h.update(spec.id.encode("utf-8") + b"\x00")
        self._h.update(struct.pack("<Q", seed & 0xFFFFFFFFFFFFFFFF))

    def record(self, state: EpisodeState, outcome: StepOutcome) -> None:
        h = self._h
        h.update(struct.pack("<q", state.step))
        h.update(struct.pack("<3d", *state.agent_pos))
        h.update(struct.pack("<d", state.agent_heading))
        h.update(struct.pack("<d", state.agent_velocity))
        h.update(struct.pack("<q", state.decay_ticks))
        h.update(struct.pack("<d", state.event_reward))
        h.update(state.terminated.value.encode("ascii"))
        for event in outcome.events:
            h.update(event.canonical().encode("utf-8") + b"\x00")
            if event.kind in ("Pushed", "GoalKnockedDown") and event.object_index >= 0:
                h.update(struct.pack("<3d", *state.object_states[event.object_index].position))
        h.update(b"\x01")

    def digest(self) -> str:
        return self._h.hexdigest()


def trace_hash(spec: ArenaSpec, seed: int, steps: list[tuple[EpisodeState, StepOutcome]]) -> str:
    """Digest of a full episode trace (convenience wrapper over TraceRecorder)."""
    rec = TraceRecorder(spec, seed)
    for state, outcome in steps:
        rec.record(state, outcome)
    return rec.digest()
