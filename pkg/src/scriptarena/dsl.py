"""Action-script language: Think / Go / Turn.

Scripts arrive as free-form model output, so parsing is lenient: commands are
extracted left to right out of surrounding prose, and only a malformed command
(or a script with no commands at all) is an error. Turn arguments quantize to
6-degree increments toward zero; Go arguments map to one motor frame per step.
The grammar of a well-formed command ships in docs/dsl.ebnf.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from .world import STEP_LENGTH, TURN_INCREMENT, MotorFrame

GO_RANGE = 35
TURN_RANGE = 360


class ParseErrorKind(str, Enum):
    UNKNOWN_COMMAND = "UnknownCommand"
    BAD_ARGUMENT = "BadArgument"
    WRAPPED_IN_QUOTES = "WrappedInQuotes"
    UNTERMINATED_STRING = "UnterminatedString"
    MISSING_SEMICOLON = "MissingSemicolon"
    EMPTY_SCRIPT = "EmptyScript"


class ScriptParseError(ValueError):
    def __init__(self, kind: ParseErrorKind, offset: int, message: str):
        super().__init__(f"{kind.value} at offset {offset}: {message}")
        self.kind = kind
        self.offset = offset
        self.reason = message


class OutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class Think:
    text: str


@dataclass(frozen=True)
class Go:
    steps: int


@dataclass(frozen=True)
class Turn:
    degrees: int


Command = Think | Go | Turn


@dataclass(frozen=True)
class SourceSpan:
    start: int
    end: int


@dataclass(frozen=True)
class Script:
    commands: tuple[Command, ...]
    spans: tuple[SourceSpan, ...]


_NAME_RE = re.compile(r"\b([A-Za-z_][A-Za-z_0-9]*)\s*\(")
_INT_RE = re.compile(r"\s*([+-]?\d+)\s*")


def quantize_turn(degrees: int | float) -> int:
    """Quantize a turn to the 6-degree motor grid, rounding magnitude down.

    quantize_turn(45) == 42, quantize_turn(-45) == -42, quantize_turn(5) == 0.
    """
    if abs(degrees) > TURN_RANGE:
        raise OutOfRangeError(f"turn magnitude above {TURN_RANGE}: {degrees}")
    q = TURN_INCREMENT * (abs(int(degrees)) // TURN_INCREMENT)
    return int(math.copysign(q, degrees)) if q else 0


def parse(text: str) -> Script:
    """Extract the command sequence from raw model output.

    Raises ScriptParseError if no commands are found or a recognized command is
    malformed. Prose around and between commands is ignored.
    """
    wrapped = _wrapped_in_quotes(text)
    if wrapped is not None:
        raise ScriptParseError(
            ParseErrorKind.WRAPPED_IN_QUOTES, wrapped, "script wrapped in quotation marks"
        )

    commands: list[Command] = []
    spans: list[SourceSpan] = []
    unknown_at: int | None = None
    pos = 0
    while True:
        m = _NAME_RE.search(text, pos)
        if m is None:
            break
        name = m.group(1)
        if name in ("Go", "Turn"):
            cmd, end = _parse_numeric(text, m, name)
            commands.append(cmd)
            spans.append(SourceSpan(m.start(1), end))
            pos = end
        elif name == "Think":
            cmd, end = _parse_think(text, m)
            commands.append(cmd)
            spans.append(SourceSpan(m.start(1), end))
            pos = end
        else:
            if unknown_at is None and _looks_like_command(text, m.end()):
                unknown_at = m.start(1)
            pos = m.end()

    if not commands:
        if unknown_at is not None:
            raise ScriptParseError(
                ParseErrorKind.UNKNOWN_COMMAND, unknown_at, "unrecognized command name"
            )
        raise ScriptParseError(ParseErrorKind.EMPTY_SCRIPT, 0, "no commands found")
    return Script(commands=tuple(commands), spans=tuple(spans))


def _wrapped_in_quotes(text: str) -> int | None:
    trimmed = text.strip()
    if len(trimmed) < 2 or trimmed[0] not in "'\"" or trimmed[-1] != trimmed[0]:
        return None
    inner = trimmed[1:-1]
    try:
        parse(inner)
    except ScriptParseError:
        return None
    return text.find(trimmed[0])


def _looks_like_command(text: str, after_paren: int) -> bool:
    m = re.match(r"\s*[^()]*\)\s*;", text[after_paren:])
    return m is not None


def _parse_numeric(text: str, m: re.Match, name: str) -> tuple[Command, int]:
    at = m.start(1)
    arg = _INT_RE.match(text, m.end())
    if arg is None or arg.end() >= len(text) or text[arg.end()] != ")":
        snippet = text[m.end(): m.end() + 12]
        if re.match(r"\s*[+-]?\d+\.\d", text[m.end():]):
            raise ScriptParseError(
                ParseErrorKind.BAD_ARGUMENT, at, f"{name} takes an integer, never a float"
            )
        raise ScriptParseError(
            ParseErrorKind.BAD_ARGUMENT, at, f"{name} takes one integer, got {snippet!r}"
        )
    value = int(arg.group(1))
    end = _expect_semicolon(text, arg.end() + 1, at, name)
    if name == "Go":
        if value == 0 or abs(value) > GO_RANGE:
            raise ScriptParseError(
                ParseErrorKind.BAD_ARGUMENT, at, f"Go steps must be in [-{GO_RANGE}, {GO_RANGE}] and nonzero"
            )
        return Go(value), end
    if abs(value) > TURN_RANGE:
        raise ScriptParseError(
            ParseErrorKind.BAD_ARGUMENT, at, f"Turn degrees must be in [-{TURN_RANGE}, {TURN_RANGE}]"
        )
    return Turn(value), end


def _parse_think(text: str, m: re.Match) -> tuple[Command, int]:
    at = m.start(1)
    i = m.end()
    while i < len(text) and text[i] in " \t":
        i += 1
    if i >= len(text) or text[i] not in "'\"":
        raise ScriptParseError(ParseErrorKind.BAD_ARGUMENT, at, "Think takes a quoted string")
    quote = text[i]
    close = text.find(quote, i + 1)
    if close < 0:
        raise ScriptParseError(ParseErrorKind.UNTERMINATED_STRING, i, "string never closes")
    j = close + 1
    while j < len(text) and text[j] in " \t":
        j += 1
    if j >= len(text) or text[j] != ")":
        raise ScriptParseError(ParseErrorKind.BAD_ARGUMENT, at, "Think argument must end at the quote")
    end = _expect_semicolon(text, j + 1, at, "Think")
    return Think(text[i + 1: close]), end


def _expect_semicolon(text: str, pos: int, at: int, name: str) -> int:
    i = pos
    while i < len(text) and text[i] in " \t":
        i += 1
    if i >= len(text) or text[i] != ";":
        raise ScriptParseError(
            ParseErrorKind.MISSING_SEMICOLON, at, f"{name} command must end with ';'"
        )
    return i + 1


def pretty(script: Script) -> str:
    """Canonical textual form; parse(pretty(s)) yields the same command tuple."""
    parts = []
    for cmd in script.commands:
        if isinstance(cmd, Think):
            quote = "'" if "'" not in cmd.text else '"'
            if quote in cmd.text:
                raise ValueError("Think text mixing both quote characters is not printable")
            parts.append(f"Think({quote}{cmd.text}{quote});")
        elif isinstance(cmd, Go):
            parts.append(f"Go({cmd.steps});")
        else:
            parts.append(f"Turn({cmd.degrees});")
    return " ".join(parts)


@dataclass(frozen=True)
class MotionConfig:
    step_length: float = STEP_LENGTH
    rotation_step: int = TURN_INCREMENT


DEFAULT_MOTION = MotionConfig()


@dataclass(frozen=True)
class MotorPlan:
    """Flattened motor frames plus the Think notes skipped during execution."""

    frames: tuple[MotorFrame, ...]
    think_notes: tuple[tuple[int, str], ...]  # (command index, text)

    @property
    def forward_steps(self) -> int:
        return sum(f.forward for f in self.frames)

    @property
    def total_rotation(self) -> int:
        return sum(f.rotate for f in self.frames)

    def total_displacement(self, config: MotionConfig = DEFAULT_MOTION) -> float:
        return self.forward_steps * config.step_length


def compile(script: Script, config: MotionConfig = DEFAULT_MOTION) -> MotorPlan:
    """Expand a script into motor frames: one frame per Go step / 6-degree turn."""
    frames: list[MotorFrame] = []
    notes: list[tuple[int, str]] = []
    for index, cmd in enumerate(script.commands):
        if isinstance(cmd, Think):
            notes.append((index, cmd.text))
        elif isinstance(cmd, Go):
            sign = 1 if cmd.steps > 0 else -1
            frames.extend([MotorFrame(forward=sign)] * abs(cmd.steps))
        else:
            q = quantize_turn(cmd.degrees)
            if q:
                sign = config.rotation_step if q > 0 else -config.rotation_step
                frames.extend([MotorFrame(rotate=sign)] * (abs(q) // config.rotation_step))
    return MotorPlan(frames=tuple(frames), think_notes=tuple(notes))
