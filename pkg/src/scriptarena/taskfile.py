"""Line-oriented task file format ("arenaspec v1").

A task file is UTF-8 text: a header line, top-level `key: value` lines, and
`object:` blocks whose indented lines describe one object. The exact grammar
ships in docs/taskfile.ebnf. Example:

    arenaspec v1
    id: demo
    time_limit: 500
    pass_mark: 0.25
    agent: 20 4 heading=0
    object: GreenGoal
      position: 20 20
      size: 1.5
"""

from __future__ import annotations

import re

from .world import (
    DEFAULT_ARENA_SIZE,
    ArenaSpec,
    ObjectKind,
    ObjectSpec,
    SPHERE_KINDS,
    ZONE_KINDS,
    ValidationError,
)

HEADER = "arenaspec v1"

_COLOR_RE = re.compile(r"^#[0-9a-fA-F]{6}$")


class TaskSyntaxError(ValueError):
    """A task file failed to parse; carries 1-based line and column."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def _fail(lineno: int, col: int, msg: str) -> None:
    raise TaskSyntaxError(lineno, col, msg)


def _num(lineno: int, token: str) -> float:
    try:
        return float(token)
    except ValueError:
        _fail(lineno, 1, f"not a number: {token!r}")
        raise AssertionError  # unreachable


def _int(lineno: int, token: str) -> int:
    try:
        return int(token)
    except ValueError:
        _fail(lineno, 1, f"not an integer: {token!r}")
        raise AssertionError


def load_arena(text: str) -> ArenaSpec:
    """Parse and validate a task file. Raises TaskSyntaxError / ValidationError."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        _fail(1, 1, f"missing header {HEADER!r}")

    top: dict[str, object] = {
        "id": None,
        "size": (DEFAULT_ARENA_SIZE, DEFAULT_ARENA_SIZE),
        "time_limit": 500,
        "pass_mark": 0.0,
        "agent": None,
    }
    blackouts: list[tuple[int, int]] = []
    palette: list[tuple[str, str]] = []
    objects: list[ObjectSpec] = []
    block: dict[str, object] | None = None
    block_line = 0

    def close_block() -> None:
        nonlocal block
        if block is not None:
            objects.append(_build_object(block, block_line))
            block = None

    for i, raw in enumerate(lines[1:], start=2):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        indented = raw[0] in (" ", "\t")
        if ":" not in stripped:
            _fail(i, 1, "expected 'key: value'")
        key, _, value = stripped.partition(":")
        key = key.strip()
        value = value.strip()

        if indented:
            if block is None:
                _fail(i, 1, "indented line outside an object block")
            _object_field(block, key, value, i)
            continue

        close_block()
        if key == "object":
            try:
                kind = ObjectKind(value)
            except ValueError:
                _fail(i, len(raw) - len(value) + 1, f"unknown object kind {value!r}")
            block = {"kind": kind}
            block_line = i
        elif key == "id":
            top["id"] = value
        elif key == "size":
            parts = value.split()
            if len(parts) != 2:
                _fail(i, 1, "size takes two numbers")
            top["size"] = (_num(i, parts[0]), _num(i, parts[1]))
        elif key == "time_limit":
            top["time_limit"] = _int(i, value)
        elif key == "pass_mark":
            top["pass_mark"] = _num(i, value)
        elif key == "agent":
            if top["agent"] is not None:
                raise ValidationError("agent start duplicated")
            parts = value.split()
            if len(parts) != 3 or not parts[2].startswith("heading="):
                _fail(i, 1, "agent takes 'x y heading=deg'")
            top["agent"] = (
                _num(i, parts[0]),
                _num(i, parts[1]),
                _num(i, parts[2][len("heading="):]),
            )
        elif key == "blackout":
            parts = value.split()
            if len(parts) != 2:
                _fail(i, 1, "blackout takes 'start end'")
            blackouts.append((_int(i, parts[0]), _int(i, parts[1])))
        elif key == "palette":
            for assign in value.split():
                name, eq, color = assign.partition("=")
                if not eq or not _COLOR_RE.match(color):
                    _fail(i, 1, f"palette entries look like name=#rrggbb, got {assign!r}")
                palette.append((name, color.lower()))
        else:
            _fail(i, 1, f"unknown key {key!r}")

    close_block()
    if top["id"] is None:
        _fail(len(lines), 1, "missing id")
    if top["agent"] is None:
        raise ValidationError("agent start missing")

    spec = ArenaSpec(
        id=str(top["id"]),
        size=top["size"],  # type: ignore[arg-type]
        time_limit_steps=int(top["time_limit"]),  # type: ignore[arg-type]
        pass_mark=float(top["pass_mark"]),  # type: ignore[arg-type]
        agent_start=top["agent"],  # type: ignore[arg-type]
        objects=tuple(objects),
        blackouts=tuple(blackouts),
        palette_overrides=tuple(palette),
    )
    spec.validate()
    return spec


def _object_field(block: dict[str, object], key: str, value: str, lineno: int) -> None:
    if key == "position":
        parts = value.split()
        if len(parts) not in (2, 3):
            _fail(lineno, 1, "position takes 'x y' or 'x y z'")
        coords = [_num(lineno, p) for p in parts]
        block["position"] = coords
    elif key == "size":
        parts = value.split()
        if len(parts) not in (1, 2, 3):
            _fail(lineno, 1, "size takes 1-3 numbers")
        block["size"] = tuple(_num(lineno, p) for p in parts)
    elif key == "rotation":
        block["rotation"] = _num(lineno, value)
    elif key == "color":
        if not _COLOR_RE.match(value):
            _fail(lineno, 1, f"color looks like #rrggbb, got {value!r}")
        block["color"] = value.lower()
    elif key == "transparent":
        if value not in ("true", "false"):
            _fail(lineno, 1, "transparent is true or false")
        block["transparent"] = value == "true"
    else:
        _fail(lineno, 1, f"unknown object field {key!r}")


def _build_object(block: dict[str, object], lineno: int) -> ObjectSpec:
    kind: ObjectKind = block["kind"]  # type: ignore[assignment]
    if "position" not in block:
        _fail(lineno, 1, f"{kind.value} block missing position")
    if "size" not in block:
        _fail(lineno, 1, f"{kind.value} block missing size")
    coords: list[float] = block["position"]  # type: ignore[assignment]
    size: tuple[float, ...] = block["size"]  # type: ignore[assignment]

    if kind in SPHERE_KINDS:
        if len(size) != 1:
            _fail(lineno, 1, f"{kind.value} size takes one number (diameter)")
        z = coords[2] if len(coords) == 3 else size[0] / 2.0  # resting on the ground
    elif kind in ZONE_KINDS:
        if len(size) != 2:
            _fail(lineno, 1, f"{kind.value} size takes two numbers")
        z = 0.0
    else:
        if len(size) != 3:
            _fail(lineno, 1, f"{kind.value} size takes three numbers")
        z = coords[2] if len(coords) == 3 else size[2] / 2.0  # resting on the ground
    return ObjectSpec(
        kind=kind,
        position=(coords[0], coords[1], z),
        size=size,
        rotation=float(block.get("rotation", 0.0)),  # type: ignore[arg-type]
        color=block.get("color"),  # type: ignore[arg-type]
        transparent=bool(block.get("transparent", False)),
    )


def dump_arena(spec: ArenaSpec) -> str:
    """Serialize an ArenaSpec back to task-file text (load_arena round-trips it)."""
    out = [HEADER, f"id: {spec.id}"]
    out.append(f"size: {_fmt(spec.size[0])} {_fmt(spec.size[1])}")
    out.append(f"time_limit: {spec.time_limit_steps}")
    out.append(f"pass_mark: {_fmt(spec.pass_mark)}")
    ax, ay, ah = spec.agent_start
    out.append(f"agent: {_fmt(ax)} {_fmt(ay)} heading={_fmt(ah)}")
    for a, b in spec.blackouts:
        out.append(f"blackout: {a} {b}")
    if spec.palette_overrides:
        entries = " ".join(f"{k}={v}" for k, v in spec.palette_overrides)
        out.append(f"palette: {entries}")
    for obj in spec.objects:
        out.append(f"object: {obj.kind.value}")
        x, y, z = obj.position
        out.append(f"  position: {_fmt(x)} {_fmt(y)} {_fmt(z)}")
        out.append("  size: " + " ".join(_fmt(s) for s in obj.size))
        if obj.rotation:
            out.append(f"  rotation: {_fmt(obj.rotation)}")
        if obj.color is not None:
            out.append(f"  color: {obj.color}")
        if obj.transparent:
            out.append("  transparent: true")
    return "\n".join(out) + "\n"


def _fmt(x: float) -> str:
    return repr(int(x)) if float(x).is_integer() else repr(float(x))
