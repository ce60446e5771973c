"""Episode and suite orchestration: prompts, budgets, retries, records.

The harness owns the conversation contract: a text prompt plus rendered frames
go out, one raw script comes back, the compiled frames run to completion (or to
an episode-ending contact) before the next observation. Histories live for one
episode and never leak across tasks.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import pathlib
from dataclasses import dataclass, field, replace
from importlib import resources as importlib_resources

import yaml

from . import dsl
from .protocol import (
    AgentTimeoutError,
    DEFAULT_POLICY,
    EpisodeEnd,
    LocalAgentSession,
    ObservationMsg,
    ParseFeedback,
    RecordingSession,
    SessionHello,
    SessionPolicy,
    TranscriptWriter,
)
from .render import CameraModel, DEFAULT_CAMERA, encode_png, render
from .stats import TrialRecord, level_of_task
from .taskfile import load_arena
from .world import (
    ArenaSpec,
    EpisodeState,
    ObjectKind,
    ObjectSpec,
    Termination,
    TraceRecorder,
    check_pass,
    initial_state,
    run_frames,
)

logger = logging.getLogger(__name__)

HEALTH_LINE_FORMAT = "Your remaining health is: {value}"
INITIAL_OBSERVATIONS = 3


class TrialDiscarded(RuntimeError):
    """Three consecutive agent failures: the trial is void and may be relaunched."""

    def __init__(self, task_id: str, trial_index: int, failures: int):
        super().__init__(f"{task_id} trial {trial_index}: {failures} consecutive agent failures")
        self.task_id = task_id
        self.trial_index = trial_index
        self.failures = failures


class UnsupportedConstructError(ValueError):
    """The external YAML testbed file uses an item this importer cannot map."""


# --- prompt assembly ----------------------------------------------------------


@dataclass(frozen=True)
class Segment:
    kind: str  # "text" | "image"
    text: str = ""
    image: bytes = b""


def _text(t: str) -> Segment:
    return Segment(kind="text", text=t)


def _image(data: bytes) -> Segment:
    return Segment(kind="image", image=data)


@dataclass(frozen=True)
class PromptPayload:
    segments: tuple[Segment, ...]
    new_turn_segments: tuple[Segment, ...]

    def text(self) -> str:
        return "\n".join(s.text for s in self.segments if s.kind == "text")

    def images(self) -> list[bytes]:
        return [s.image for s in self.segments if s.kind == "image"]

    def token_estimate(self) -> int:
        return sum(len(s.text) for s in self.segments if s.kind == "text") // 4


@dataclass(frozen=True)
class HistoryTurn:
    segments: tuple[Segment, ...]
    response: str | None


@dataclass
class ConversationHistory:
    turns: list[HistoryTurn] = field(default_factory=list)

    def add(self, segments: tuple[Segment, ...], response: str | None) -> None:
        self.turns.append(HistoryTurn(segments=segments, response=response))

    def clear(self) -> None:
        self.turns.clear()

    def token_estimate(self) -> int:
        total = 0
        for turn in self.turns:
            total += sum(len(s.text) for s in turn.segments if s.kind == "text")
            total += len(turn.response or "")
        return total // 4


@dataclass(frozen=True)
class PromptTemplate:
    mode: str  # "base" | "icl"
    base_text: str
    icl_pairs: tuple[tuple[bytes, str | None], ...] = ()
    health_line_format: str = HEALTH_LINE_FORMAT


def load_base_text() -> str:
    return _resource_text("base_prompt.txt")


def tutorial_responses() -> list[str]:
    return json.loads(_resource_text("tutorial_responses.json"))


def _resource_text(name: str) -> str:
    return (importlib_resources.files("scriptarena") / "resources" / name).read_text("utf-8")


def load_template(mode: str, camera: CameraModel = DEFAULT_CAMERA) -> PromptTemplate:
    """Template for a harness mode; "icl" bundles the rendered tutorial walkthrough."""
    base_text = load_base_text()
    if mode == "base":
        return PromptTemplate(mode="base", base_text=base_text)
    if mode != "icl":
        raise ValueError(f"unknown mode {mode!r}")
    return PromptTemplate(mode="icl", base_text=base_text, icl_pairs=build_icl_transcript(camera))


_ICL_CACHE: dict[tuple[int, int, float], tuple[tuple[bytes, str | None], ...]] = {}


def build_icl_transcript(camera: CameraModel = DEFAULT_CAMERA) -> tuple[tuple[bytes, str | None], ...]:
    """Replay the tutorial episode and pair each frame with the response that followed.

    Layout mirrors the played episode: the first three frames are the initial
    observations (two unpaired, the third paired with the first response), then
    one frame per script until the final goal-taking response, which needs no
    trailing frame. 44 frames, 42 responses.
    """
    key = (camera.width, camera.height, camera.horizontal_fov)
    cached = _ICL_CACHE.get(key)
    if cached is not None:
        return cached

    spec = load_task_pack()["tutorial"]
    responses = tutorial_responses()
    state = initial_state(spec)
    frames = [encode_png(render(state, spec, camera))]
    for i, response in enumerate(responses):
        plan = dsl.compile(dsl.parse(response))
        state, _ = run_frames(state, plan.frames, spec)
        if state.terminated is not Termination.RUNNING:
            if i != len(responses) - 1:
                raise RuntimeError(f"tutorial ended early on response {i + 1}")
            break
        frames.append(encode_png(render(state, spec, camera)))

    pairs: list[tuple[bytes, str | None]] = [(frames[0], None), (frames[0], None)]
    pairs.extend(zip(frames, responses))
    result = tuple(pairs)
    _ICL_CACHE[key] = result
    return result


def build_prompt(
    template: PromptTemplate,
    history: ConversationHistory,
    images: list[bytes],
    health: float,
) -> PromptPayload:
    """Assemble the full conversation payload for one agent turn.

    Turn 0 opens with the base text (and the tutorial pairs in icl mode); later
    turns replay every prior turn verbatim before the new frames. The health
    line always comes last.
    """
    segments: list[Segment] = []
    if not history.turns:
        new: list[Segment] = [_text(template.base_text)]
        if template.mode == "icl":
            for img, response in template.icl_pairs:
                new.append(_image(img))
                if response is not None:
                    new.append(_text(response))
    else:
        for turn in history.turns:
            segments.extend(turn.segments)
            if turn.response is not None:
                segments.append(_text(turn.response))
        new = []
    for img in images:
        new.append(_image(img))
    new.append(_text(template.health_line_format.format(value=f"{health:.1f}")))
    segments.extend(new)
    return PromptPayload(segments=tuple(segments), new_turn_segments=tuple(new))


# --- episode loop ---------------------------------------------------------------


class _Outbound:
    """Monotone per-session sequence numbers for harness-sent messages."""

    def __init__(self) -> None:
        self._next = 0

    def next(self) -> int:
        value = self._next
        self._next += 1
        return value


def run_episode(
    spec: ArenaSpec,
    session,
    *,
    template: PromptTemplate,
    policy: SessionPolicy = DEFAULT_POLICY,
    camera: CameraModel = DEFAULT_CAMERA,
    seed: int = 0,
    agent_id: str = "agent",
    population: str = "baseline",
    trial_index: int = 0,
    transcript_path: str | pathlib.Path | None = None,
    outbound: _Outbound | None = None,
) -> TrialRecord:
    """Play one episode over an agent session and return its trial record.

    Raises TrialDiscarded after policy.max_agent_failures consecutive parse
    failures or timeouts. The caller owns SessionHello; this function only
    exchanges observations, feedback, and the episode end marker.
    """
    policy.validate()
    camera.validate()
    outbound = outbound or _Outbound()

    writer = None
    if transcript_path is not None:
        writer = TranscriptWriter(transcript_path)
        session = RecordingSession(session, writer)

    state = initial_state(spec, seed=seed)
    recorder = TraceRecorder(spec, seed)
    history = ConversationHistory()
    scripts_used = 0
    consecutive_failures = 0

    try:
        while True:
            frame_png = encode_png(render(state, spec, camera))
            images = [frame_png] * (INITIAL_OBSERVATIONS if not history.turns else 1)
            payload = build_prompt(template, history, images, state.health)
            b64 = [base64.b64encode(img).decode("ascii") for img in payload.images()]
            obs = ObservationMsg(
                session_id=session.session_id,
                seq=outbound.next(),
                task_id=spec.id,
                step=state.step,
                health=state.health,
                cumulative_reward=state.cumulative_reward,
                scripts_remaining=policy.max_scripts_per_episode - scripts_used,
                image_b64=b64[-1],
                extra_images_b64=tuple(b64[:-1]),
                text_prompt=payload.text(),
            )
            _attach_privileged(session, (state, spec))
            session.send(obs)
            try:
                action = session.receive_action(policy.response_timeout)
                script = dsl.parse(action.raw_script_text)
            except AgentTimeoutError:
                consecutive_failures += 1
                _send_feedback(session, outbound, "Timeout", "no reply within the response timeout", consecutive_failures)
                if consecutive_failures >= policy.max_agent_failures:
                    raise TrialDiscarded(spec.id, trial_index, consecutive_failures) from None
                continue
            except dsl.ScriptParseError as exc:
                consecutive_failures += 1
                _send_feedback(session, outbound, exc.kind.value, exc.reason, consecutive_failures)
                if consecutive_failures >= policy.max_agent_failures:
                    raise TrialDiscarded(spec.id, trial_index, consecutive_failures) from None
                continue

            consecutive_failures = 0
            scripts_used += 1
            history.add(payload.new_turn_segments, action.raw_script_text)

            plan = dsl.compile(script)
            state, _ = run_frames(state, plan.frames, spec, recorder=recorder)
            if state.terminated is not Termination.RUNNING:
                break
            if scripts_used >= policy.max_scripts_per_episode:
                state = replace(state, terminated=Termination.BUDGET_EXHAUSTED)
                break

        passed = check_pass(state, spec)
        session.send(
            EpisodeEnd(
                session_id=session.session_id,
                seq=outbound.next(),
                task_id=spec.id,
                passed=passed,
                final_reward=state.cumulative_reward,
                reason=state.terminated.value,
            )
        )
        return TrialRecord(
            agent_id=agent_id,
            population=population,
            task_id=spec.id,
            level=level_of_task(spec.id),
            trial_index=trial_index,
            passed=passed,
            final_reward=state.cumulative_reward,
            steps_used=state.step,
            scripts_used=scripts_used,
            transcript_ref=str(transcript_path) if transcript_path is not None else None,
            trace_hash=recorder.digest(),
            reason=state.terminated.value,
        )
    finally:
        if writer is not None:
            writer.close()


def _send_feedback(session, outbound: _Outbound, kind: str, message: str, retry_index: int) -> None:
    session.send(
        ParseFeedback(
            session_id=session.session_id,
            seq=outbound.next(),
            error_kind=kind,
            error_message=message,
            retry_index=retry_index,
        )
    )


def _attach_privileged(session, privileged) -> None:
    target = session
    while target is not None:
        attach = getattr(target, "attach_privileged", None)
        if attach is not None:
            attach(privileged)
            return
        target = getattr(target, "inner", None)


# --- suites -------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteConfig:
    suite_id: str
    tasks: tuple[str, ...]
    trials_per_task: int = 3
    seed: int = 0
    mode: str = "base"
    policy: SessionPolicy = DEFAULT_POLICY
    camera: CameraModel = DEFAULT_CAMERA
    agent_id: str = "agent"
    population: str = "baseline"


def derive_seed(suite_seed: int, task_id: str, trial_index: int) -> int:
    digest = hashlib.sha256(f"{suite_seed}:{task_id}:{trial_index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little", signed=False)


def pack_task_ids() -> list[str]:
    return sorted(tid for tid in load_task_pack() if tid != "tutorial")


def default_suite(**overrides) -> SuiteConfig:
    """The full bundled pack: 40 tasks, 3 trials each."""
    args = dict(suite_id="pack-all", tasks=tuple(pack_task_ids()), trials_per_task=3)
    args.update(overrides)
    return SuiteConfig(**args)


def levels_suite(levels, **overrides) -> SuiteConfig:
    wanted = set(levels)
    tasks = tuple(tid for tid in pack_task_ids() if level_of_task(tid) in wanted)
    name = "pack-l" + "-".join(str(v) for v in sorted(wanted))
    args = dict(suite_id=name, tasks=tasks, trials_per_task=3)
    args.update(overrides)
    return SuiteConfig(**args)


def load_suite(text: str) -> SuiteConfig:
    """Parse a JSON suite file (see docs/suite-format.md)."""
    data = json.loads(text)
    policy = SessionPolicy(**data.get("policy", {}))
    camera = CameraModel(**data.get("camera", {}))
    tasks = data.get("tasks")
    if tasks == "pack":
        tasks = pack_task_ids()
    elif isinstance(tasks, dict) and "levels" in tasks:
        wanted = set(tasks["levels"])
        tasks = [tid for tid in pack_task_ids() if level_of_task(tid) in wanted]
    if not isinstance(tasks, list) or not tasks:
        raise ValueError("suite file needs a non-empty 'tasks' entry")
    return SuiteConfig(
        suite_id=data.get("suite_id", "suite"),
        tasks=tuple(tasks),
        trials_per_task=int(data.get("trials_per_task", 3)),
        seed=int(data.get("seed", 0)),
        mode=data.get("mode", "base"),
        policy=policy,
        camera=camera,
        agent_id=data.get("agent_id", "agent"),
        population=data.get("population", "baseline"),
    )


def run_suite(
    config: SuiteConfig,
    agent_factory=None,
    session=None,
    out_dir: str | pathlib.Path | None = None,
) -> list[TrialRecord]:
    """Run every (task, trial) cell of a suite in deterministic order.

    Exactly one of agent_factory (fresh in-process agent per trial) or session
    (a persistent remote session) must be given. Discarded trials are
    relaunched up to policy.max_relaunches, then recorded as failed.
    """
    if (agent_factory is None) == (session is None):
        raise ValueError("pass exactly one of agent_factory or session")
    template = load_template(config.mode, config.camera)
    specs = load_task_pack()
    out_path = pathlib.Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        (out_path / "transcripts").mkdir(parents=True, exist_ok=True)

    outbound = _Outbound()
    if session is not None:
        session.send(_hello(session.session_id, config, outbound))

    records: list[TrialRecord] = []
    for task_id in config.tasks:
        spec = specs[task_id] if task_id in specs else load_arena(pathlib.Path(task_id).read_text("utf-8"))
        for trial in range(config.trials_per_task):
            seed = derive_seed(config.seed, task_id, trial)
            transcript = (
                out_path / "transcripts" / f"{task_id}_t{trial}.jsonl" if out_path is not None else None
            )
            attempts = 0
            while True:
                if agent_factory is not None:
                    agent = agent_factory()
                    trial_session = LocalAgentSession(
                        agent.respond, needs_privileged=getattr(agent, "needs_privileged", False)
                    )
                    trial_outbound = _Outbound()
                    trial_session.send(_hello(trial_session.session_id, config, trial_outbound))
                else:
                    trial_session = session
                    trial_outbound = outbound
                try:
                    record = run_episode(
                        spec,
                        trial_session,
                        template=template,
                        policy=config.policy,
                        camera=config.camera,
                        seed=seed,
                        agent_id=config.agent_id,
                        population=config.population,
                        trial_index=trial,
                        transcript_path=transcript,
                        outbound=trial_outbound,
                    )
                    break
                except TrialDiscarded as exc:
                    attempts += 1
                    logger.warning(
                        "trial discarded (%s), relaunch %d/%d",
                        exc,
                        attempts,
                        config.policy.max_relaunches,
                    )
                    if attempts > config.policy.max_relaunches:
                        record = TrialRecord(
                            agent_id=config.agent_id,
                            population=config.population,
                            task_id=task_id,
                            level=level_of_task(task_id),
                            trial_index=trial,
                            passed=False,
                            final_reward=None,
                            reason="discarded",
                        )
                        break
            records.append(record)

    if out_path is not None:
        from .stats import records_to_jsonl

        (out_path / "records.jsonl").write_text(records_to_jsonl(records), encoding="utf-8")
    return records


def _hello(session_id: str, config: SuiteConfig, outbound: _Outbound) -> SessionHello:
    return SessionHello(
        session_id=session_id,
        seq=outbound.next(),
        suite_id=config.suite_id,
        policy={
            "max_scripts_per_episode": config.policy.max_scripts_per_episode,
            "max_agent_failures": config.policy.max_agent_failures,
            "response_timeout": config.policy.response_timeout,
        },
    )


# --- bundled task pack -----------------------------------------------------------


_PACK_CACHE: dict[str, ArenaSpec] | None = None


def load_task_pack() -> dict[str, ArenaSpec]:
    """All bundled task files by id (40 levelled tasks plus the tutorial)."""
    global _PACK_CACHE
    if _PACK_CACHE is None:
        pack: dict[str, ArenaSpec] = {}
        root = importlib_resources.files("scriptarena") / "resources" / "taskpack"
        for entry in sorted(root.iterdir(), key=lambda e: e.name):
            if entry.name.endswith(".task"):
                spec = load_arena(entry.read_text("utf-8"))
                pack[spec.id] = spec
        _PACK_CACHE = pack
    return dict(_PACK_CACHE)


# --- external testbed import -------------------------------------------------------


_ITEM_NAME_MAP = {
    "GoodGoal": ObjectKind.GREEN_GOAL,
    "GoodGoalBounce": ObjectKind.GREEN_GOAL,
    "GoodGoalMulti": ObjectKind.YELLOW_GOAL,
    "GoodGoalMultiBounce": ObjectKind.YELLOW_GOAL,
    "BadGoal": ObjectKind.RED_GOAL,
    "BadGoalBounce": ObjectKind.RED_GOAL,
    "Wall": ObjectKind.WALL,
    "WallTransparent": ObjectKind.WALL,
    "Ramp": ObjectKind.RAMP,
    "Tunnel": ObjectKind.TUNNEL,
    "CylinderTunnel": ObjectKind.TUNNEL,
    "CylinderTunnelTransparent": ObjectKind.TUNNEL,
    "DeathZone": ObjectKind.DEATH_ZONE,
    "HotZone": ObjectKind.HOT_ZONE,
    "Cardbox1": ObjectKind.PUSHABLE_BLOCK,
    "Cardbox2": ObjectKind.PUSHABLE_BLOCK,
    "HeavyBox": ObjectKind.PUSHABLE_BLOCK,
    "LightBlock": ObjectKind.PUSHABLE_BLOCK,
}


def import_testbed_yaml(text: str, arena_id: str = "imported") -> ArenaSpec:
    """Best-effort import of an external testbed YAML arena into an ArenaSpec.

    The source format is y-up (ground plane x/z); positions and sizes map to
    our x/y ground plane with z elevation. Raises UnsupportedConstructError for
    item names outside the supported table or items without explicit positions.
    """
    data = yaml.load(text, Loader=_permissive_loader())
    if not isinstance(data, dict) or "arenas" not in data:
        raise UnsupportedConstructError("no 'arenas' mapping in yaml")
    arenas = data["arenas"]
    first = arenas[sorted(arenas)[0]] if isinstance(arenas, dict) else arenas[0]
    if not isinstance(first, dict):
        raise UnsupportedConstructError("arena entry is not a mapping")

    time_limit = int(first.get("t", first.get("timeLimit", 500)) or 500)
    pass_mark = float(first.get("pass_mark", first.get("passMark", 0.0)) or 0.0)
    agent_start = (20.0, 20.0, 0.0)
    objects: list[ObjectSpec] = []

    for item in first.get("items", []):
        name = item.get("name")
        positions = item.get("positions") or []
        rotations = item.get("rotations") or []
        sizes = item.get("sizes") or []
        if name == "Agent":
            if not positions:
                raise UnsupportedConstructError("agent without a position")
            p = _vec(positions[0])
            heading = float(rotations[0]) if rotations else 0.0
            agent_start = (p[0], p[2], heading)
            continue
        kind = _ITEM_NAME_MAP.get(name)
        if kind is None:
            raise UnsupportedConstructError(f"unsupported item name {name!r}")
        if not positions:
            raise UnsupportedConstructError(f"{name}: randomized positions are not importable")
        for i, pos in enumerate(positions):
            p = _vec(pos)
            s = _vec(sizes[i]) if i < len(sizes) else (1.0, 1.0, 1.0)
            rot = float(rotations[i]) if i < len(rotations) else 0.0
            objects.append(_imported_object(kind, name, p, s, rot))

    spec = ArenaSpec(
        id=arena_id,
        time_limit_steps=time_limit,
        pass_mark=pass_mark,
        agent_start=agent_start,
        objects=tuple(objects),
    )
    spec.validate()
    return spec


def _imported_object(kind: ObjectKind, name: str, p, s, rot: float) -> ObjectSpec:
    from .world import SPHERE_KINDS, ZONE_KINDS

    if kind in SPHERE_KINDS:
        diameter = s[0]
        return ObjectSpec(kind=kind, position=(p[0], p[2], p[1] + diameter / 2.0), size=(diameter,))
    if kind in ZONE_KINDS:
        return ObjectSpec(kind=kind, position=(p[0], p[2], 0.0), size=(s[0], s[2]), rotation=rot)
    transparent = "Transparent" in name and kind is ObjectKind.WALL
    return ObjectSpec(
        kind=kind,
        position=(p[0], p[2], p[1] + s[1] / 2.0),
        size=(s[0], s[2], s[1]),
        rotation=rot,
        transparent=transparent,
    )


def _vec(node) -> tuple[float, float, float]:
    if isinstance(node, dict):
        return float(node.get("x", 0.0)), float(node.get("y", 0.0)), float(node.get("z", 0.0))
    if isinstance(node, (list, tuple)) and len(node) == 3:
        return float(node[0]), float(node[1]), float(node[2])
    raise UnsupportedConstructError(f"cannot read vector from {node!r}")


def _permissive_loader():
    class _Loader(yaml.SafeLoader):
        pass

    def _any(loader, tag_suffix, node):
        if isinstance(node, yaml.MappingNode):
            return loader.construct_mapping(node)
        if isinstance(node, yaml.SequenceNode):
            return loader.construct_sequence(node)
        return loader.construct_scalar(node)

    _Loader.add_multi_constructor("!", _any)
    _Loader.add_multi_constructor("tag:", _any)
    return _Loader
