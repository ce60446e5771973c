"""Command line front end.

Subcommands:
    dsl check   parse a script and print its canonical form
    render      draw a task from the agent camera (or top-down)
    run         play a suite with a bundled baseline agent
    report      aggregate trial records into a table or data report
    serve       host episodes for remote agents (tcp, stdio, or human http)
    agent       connect a bundled baseline to a remote server
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import pathlib
import sys

from . import __version__, dsl
from .agents import GreedyOracle, RandomAgent
from .harness import (
    SuiteConfig,
    default_suite,
    levels_suite,
    load_suite,
    load_task_pack,
    run_suite,
)
from .protocol import AgentClient, ProtocolServer, stdio_session
from .render import CameraModel, encode_png, render, render_topdown
from .stats import aggregate, emit_report, ingest_external_csv, records_from_jsonl
from .taskfile import load_arena
from .world import initial_state, run_frames

RESULTS_DIR_ENV = "SCRIPTARENA_RESULTS_DIR"


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="scriptarena")
    parser.add_argument("--version", action="version", version=f"scriptarena {__version__}")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(required=True)

    p_dsl = sub.add_parser("dsl", help="script language utilities")
    dsl_sub = p_dsl.add_subparsers(required=True)
    p_check = dsl_sub.add_parser("check", help="parse a script and print the canonical form")
    p_check.add_argument("source", nargs="?", default="-", help="file path or - for stdin")
    p_check.set_defaults(func=_cmd_dsl_check)

    p_render = sub.add_parser("render", help="render a task observation to png")
    p_render.add_argument("--task", required=True, help="bundled task id or path to a .task file")
    p_render.add_argument("--out", required=True, help="output png path")
    p_render.add_argument("--topdown", action="store_true", help="debug top-down view")
    p_render.add_argument("--script", default=None, help="run this script before rendering")
    p_render.add_argument("--width", type=int, default=512)
    p_render.add_argument("--height", type=int, default=512)
    p_render.add_argument("--fov", type=float, default=60.0)
    p_render.set_defaults(func=_cmd_render)

    p_run = sub.add_parser("run", help="run a suite with a bundled baseline agent")
    p_run.add_argument("--suite", default="default", help="default, levels:1-3, or a suite json path")
    p_run.add_argument("--agent", default="random", choices=["random", "greedy"])
    p_run.add_argument("--mode", default="base", choices=["base", "icl"])
    p_run.add_argument("--trials", type=int, default=None, help="override trials per task")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default=None, help=f"results dir (default ${RESULTS_DIR_ENV} or ./results)")
    p_run.add_argument("--size", type=int, default=None, help="square frame edge for both camera axes")
    p_run.set_defaults(func=_cmd_run)

    p_report = sub.add_parser("report", help="aggregate records into a report")
    p_report.add_argument("--in", dest="inputs", action="append", required=True,
                          help="records.jsonl or external results .csv (repeatable)")
    p_report.add_argument("--format", default="table", choices=["table", "data"])
    p_report.add_argument("--out", default=None, help="write report here instead of stdout")
    p_report.set_defaults(func=_cmd_report)

    p_serve = sub.add_parser("serve", help="host episodes for remote agents")
    p_serve.add_argument("--bind", default=None, help="host:port for the ndjson tcp listener")
    p_serve.add_argument("--stdio", action="store_true", help="one session over stdin/stdout")
    p_serve.add_argument("--human", action="store_true", help="http bridge for the browser client")
    p_serve.add_argument("--http", default="127.0.0.1:0", help="host:port for --human (0 picks a port)")
    p_serve.add_argument("--static", default=None, help="static files dir for --human")
    p_serve.add_argument("--suite", default="default", help="default, levels:N-M, or a suite json path")
    p_serve.add_argument("--task", action="append", default=None, help="serve these task ids instead")
    p_serve.add_argument("--mode", default="base", choices=["base", "icl"])
    p_serve.add_argument("--trials", type=int, default=None)
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--out", default=None)
    p_serve.set_defaults(func=_cmd_serve)

    p_agent = sub.add_parser("agent", help="connect a bundled baseline to a remote server")
    p_agent.add_argument("--connect", required=True, help="host:port of a serving instance")
    p_agent.add_argument("--agent", default="random", choices=["random"])
    p_agent.add_argument("--seed", type=int, default=0)
    p_agent.set_defaults(func=_cmd_agent)

    return parser


def _cmd_dsl_check(args) -> int:
    if args.source == "-":
        text = sys.stdin.read()
    else:
        text = pathlib.Path(args.source).read_text("utf-8")
    try:
        script = dsl.parse(text)
    except dsl.ScriptParseError as exc:
        print(f"parse error [{exc.kind.value}] at offset {exc.offset}: {exc.reason}")
        return 1
    plan = dsl.compile(script)
    print(dsl.pretty(script))
    print(f"commands: {len(script.commands)}  motor frames: {len(plan.frames)}")
    return 0


def _load_task(ref: str):
    pack = load_task_pack()
    if ref in pack:
        return pack[ref]
    return load_arena(pathlib.Path(ref).read_text("utf-8"))


def _cmd_render(args) -> int:
    spec = _load_task(args.task)
    state = initial_state(spec)
    if args.script:
        plan = dsl.compile(dsl.parse(args.script))
        state, _ = run_frames(state, plan.frames, spec)
    if args.topdown:
        obs = render_topdown(state, spec, size_px=args.width)
    else:
        camera = CameraModel(width=args.width, height=args.height, horizontal_fov=args.fov)
        obs = render(state, spec, camera)
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(encode_png(obs))
    height, width = obs.pixels.shape[:2]
    print(f"wrote {out} ({width}x{height}, step {state.step})")
    return 0


def _suite_config(name: str, mode: str, seed: int, trials: int | None, agent_id: str,
                  size: int | None = None) -> SuiteConfig:
    overrides: dict = {"mode": mode, "seed": seed, "agent_id": agent_id}
    if trials is not None:
        overrides["trials_per_task"] = trials
    if size is not None:
        overrides["camera"] = CameraModel(width=size, height=size)
    if name == "default":
        return default_suite(**overrides)
    if name.startswith("levels:"):
        span = name.split(":", 1)[1]
        if "-" in span:
            lo, hi = span.split("-", 1)
            levels = range(int(lo), int(hi) + 1)
        else:
            levels = [int(span)]
        return levels_suite(levels, **overrides)
    config = load_suite(pathlib.Path(name).read_text("utf-8"))
    for key, value in overrides.items():
        config = SuiteConfig(**{**config.__dict__, key: value})
    return config


def _results_dir(explicit: str | None) -> pathlib.Path:
    if explicit:
        return pathlib.Path(explicit)
    return pathlib.Path(os.environ.get(RESULTS_DIR_ENV, "results"))


def _cmd_run(args) -> int:
    if args.agent == "greedy":
        agent_id = "greedy-oracle"
        factory = GreedyOracle
    else:
        agent_id = "random"
        counter = iter(range(10**9))
        factory = lambda: RandomAgent(seed=args.seed * 100003 + next(counter))  # noqa: E731
    config = _suite_config(args.suite, args.mode, args.seed, args.trials, agent_id, args.size)
    out_dir = _results_dir(args.out)
    records = run_suite(config, agent_factory=factory, out_dir=out_dir)
    passed = sum(1 for r in records if r.passed)
    print(f"{len(records)} trials, {passed} passed; records in {out_dir / 'records.jsonl'}")
    print(emit_report(aggregate(records)), end="")
    return 0


def _cmd_report(args) -> int:
    records = []
    for ref in args.inputs:
        path = pathlib.Path(ref)
        text = path.read_text("utf-8")
        if path.suffix.lower() == ".csv":
            records.extend(ingest_external_csv(text))
        else:
            records.extend(records_from_jsonl(text))
    report = emit_report(aggregate(records), format=args.format)
    if args.out:
        pathlib.Path(args.out).write_text(report, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(report, end="")
    return 0


def _cmd_serve(args) -> int:
    if sum([args.bind is not None, args.stdio, args.human]) != 1:
        raise ValueError("pick exactly one of --bind, --stdio, --human")
    out_dir = _results_dir(args.out)

    if args.human:
        from .humanplay import HumanPlayServer

        host, port = _split_host_port(args.http)
        tasks = tuple(args.task) if args.task else ("tutorial",)
        server = HumanPlayServer(
            host, port, default_tasks=tasks, mode=args.mode, static_dir=args.static, out_dir=out_dir
        )
        bound_host, bound_port = server.address
        print(f"listening on http://{bound_host}:{bound_port}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            server.shutdown()
        return 0

    if args.task:
        config = SuiteConfig(
            suite_id="custom",
            tasks=tuple(args.task),
            trials_per_task=args.trials or 1,
            seed=args.seed,
            mode=args.mode,
            agent_id="remote",
        )
    else:
        config = _suite_config(args.suite, args.mode, args.seed, args.trials, "remote")

    if args.stdio:
        session = stdio_session()
        try:
            run_suite(config, session=session, out_dir=out_dir / "stdio")
        finally:
            session.close()
        return 0

    host, port = _split_host_port(args.bind)

    def handler(session):
        run_suite(config, session=session, out_dir=out_dir / session.session_id)

    server = ProtocolServer(host, port, handler)
    bound_host, bound_port = server.address
    print(f"listening on {bound_host}:{bound_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def _cmd_agent(args) -> int:
    host, port = _split_host_port(args.connect)
    agent = RandomAgent(seed=args.seed)
    client = AgentClient(host, port)
    ends = client.run(agent.respond)
    for end in ends:
        verdict = "pass" if end.passed else "fail"
        print(f"{end.task_id}: {verdict} reward={end.final_reward:.6f} ({end.reason})")
    return 0


def _split_host_port(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not host or not port:
        raise ValueError(f"expected host:port, got {value!r}")
    return host, int(port)


if __name__ == "__main__":
    sys.exit(main())
