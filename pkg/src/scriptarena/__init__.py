"""scriptarena: a deterministic arena world for script-driven embodied agents.

Agents see first-person rendered frames, reply with short action scripts
(Think/Go/Turn), and collect reward from coloured goal spheres while a
per-step decay drains health. The package bundles the simulator, renderer,
script language, an ndjson wire protocol, baseline agents, a levelled task
pack, and a statistics pipeline for comparing agent populations.
"""

from .agents import GreedyOracle, MockLLM, RandomAgent, ReplayAgent, greedy_script, random_script
from .dsl import (
    Go,
    MotionConfig,
    MotorPlan,
    OutOfRangeError,
    ParseErrorKind,
    Script,
    ScriptParseError,
    Think,
    Turn,
    compile,
    parse,
    pretty,
    quantize_turn,
)
from .harness import (
    ConversationHistory,
    PromptPayload,
    PromptTemplate,
    SuiteConfig,
    TrialDiscarded,
    UnsupportedConstructError,
    build_icl_transcript,
    build_prompt,
    default_suite,
    derive_seed,
    import_testbed_yaml,
    levels_suite,
    load_suite,
    load_task_pack,
    load_template,
    run_episode,
    run_suite,
    tutorial_responses,
)
from .protocol import (
    Abort,
    ActionMsg,
    AgentClient,
    AgentTimeoutError,
    EpisodeEnd,
    FramingError,
    LocalAgentSession,
    ObservationMsg,
    ParseFeedback,
    ProtocolServer,
    RecordingSession,
    ReplayError,
    SessionClosedError,
    SessionHello,
    SessionPolicy,
    TranscriptWriter,
    WIRE_VERSION,
    encode_line,
    parse_line,
    read_transcript,
    stdio_session,
)
from .render import (
    CameraError,
    CameraModel,
    DEFAULT_CAMERA,
    DEFAULT_PALETTE,
    ImageObservation,
    decode_png,
    encode_png,
    project_bearing_to_column,
    render,
    render_topdown,
    resolve_palette,
)
from .stats import (
    LevelSummary,
    MixedPopulationError,
    SchemaError,
    TrialRecord,
    aggregate,
    emit_report,
    export_csv,
    ingest_external_csv,
    level_of_task,
    quantile_linear,
    records_from_jsonl,
    records_to_jsonl,
)
from .taskfile import TaskSyntaxError, dump_arena, load_arena
from .world import (
    AGENT_DIAMETER,
    AGENT_RADIUS,
    ArenaSpec,
    EpisodeState,
    Event,
    InvalidStateError,
    MotorFrame,
    ObjectKind,
    ObjectSpec,
    PhysicsConfig,
    STEP_LENGTH,
    StepOutcome,
    Termination,
    TraceRecorder,
    TURN_INCREMENT,
    ValidationError,
    check_pass,
    initial_state,
    run_frames,
    step,
    trace_hash,
)

__version__ = "0.1.0"

__all__ = [
    "AGENT_DIAMETER",
    "AGENT_RADIUS",
    "Abort",
    "ActionMsg",
    "AgentClient",
    "AgentTimeoutError",
    "ArenaSpec",
    "CameraError",
    "CameraModel",
    "ConversationHistory",
    "DEFAULT_CAMERA",
    "DEFAULT_PALETTE",
    "EpisodeEnd",
    "EpisodeState",
    "Event",
    "FramingError",
    "Go",
    "GreedyOracle",
    "ImageObservation",
    "InvalidStateError",
    "LevelSummary",
    "LocalAgentSession",
    "MixedPopulationError",
    "MockLLM",
    "MotionConfig",
    "MotorFrame",
    "MotorPlan",
    "ObjectKind",
    "ObjectSpec",
    "ObservationMsg",
    "OutOfRangeError",
    "ParseErrorKind",
    "ParseFeedback",
    "PhysicsConfig",
    "PromptPayload",
    "PromptTemplate",
    "ProtocolServer",
    "RandomAgent",
    "RecordingSession",
    "ReplayAgent",
    "ReplayError",
    "STEP_LENGTH",
    "SchemaError",
    "Script",
    "ScriptParseError",
    "SessionClosedError",
    "SessionHello",
    "SessionPolicy",
    "StepOutcome",
    "SuiteConfig",
    "TURN_INCREMENT",
    "TaskSyntaxError",
    "Termination",
    "Think",
    "TraceRecorder",
    "TranscriptWriter",
    "TrialDiscarded",
    "TrialRecord",
    "Turn",
    "UnsupportedConstructError",
    "ValidationError",
    "WIRE_VERSION",
    "aggregate",
    "build_icl_transcript",
    "build_prompt",
    "check_pass",
    "compile",
    "decode_png",
    "default_suite",
    "derive_seed",
    "dump_arena",
    "emit_report",
    "encode_line",
    "encode_png",
    "export_csv",
    "greedy_script",
    "import_testbed_yaml",
    "ingest_external_csv",
    "initial_state",
    "level_of_task",
    "levels_suite",
    "load_arena",
    "load_suite",
    "load_task_pack",
    "load_template",
    "parse",
    "parse_line",
    "pretty",
    "project_bearing_to_column",
    "quantile_linear",
    "quantize_turn",
    "random_script",
    "read_transcript",
    "records_from_jsonl",
    "records_to_jsonl",
    "render",
    "render_topdown",
    "resolve_palette",
    "run_episode",
    "run_frames",
    "run_suite",
    "stdio_session",
    "step",
    "trace_hash",
    "tutorial_responses",
]
