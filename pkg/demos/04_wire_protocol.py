"""One episode over the ndjson wire: TCP server, client, transcript on disk.

Run: python3 demos/04_wire_protocol.py
"""

import pathlib
import tempfile

from scriptarena import (
    ActionMsg,
    AgentClient,
    CameraModel,
    ProtocolServer,
    SuiteConfig,
    encode_line,
    parse_line,
    read_transcript,
    run_suite,
)

# --- every message is one sorted-key JSON line --------------------------------

msg = ActionMsg(session_id="s1", seq=1, raw_script_text="Go(10);")
line = encode_line(msg)
print("wire line:", line.decode("utf-8").rstrip())
assert parse_line(line) == msg

# --- serve a one-task suite over TCP -------------------------------------------

out = pathlib.Path(tempfile.mkdtemp(prefix="demo_wire_"))
config = SuiteConfig(
    suite_id="demo",
    tasks=("l01_task1",),
    trials_per_task=1,
    camera=CameraModel(width=64, height=64),
    agent_id="tcp-walker",
)

server = ProtocolServer(
    "127.0.0.1", 0,
    lambda session: run_suite(config, session=session, out_dir=out / session.session_id),
)
server.serve_in_thread()
host, port = server.address
print(f"harness listening on {host}:{port}")

# --- a ten-line client plays the episode ----------------------------------------

client = AgentClient(host, port)
ends = client.run(lambda observation: "Go(35);")
client.close()
server.shutdown()

assert len(ends) == 1 and ends[0].passed
print(f"episode end: task {ends[0].task_id} passed={ends[0].passed}"
      f" reward {ends[0].final_reward:+.4f} ({ends[0].reason})")

# --- the server kept a replayable transcript -------------------------------------

session_dir = next(out.iterdir())
rows = read_transcript(session_dir / "transcripts" / "l01_task1_t0.jsonl")
for direction, message in rows:
    print(f"  {direction:3} {message.type}")
assert [m.type for _, m in rows] == ["observation", "action", "episode_end"]

print("ok")
