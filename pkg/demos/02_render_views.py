"""First-person frames, the top-down debug view, and blackout windows.

Run: python3 demos/02_render_views.py [outdir]
"""

import pathlib
import sys

import numpy as np

from scriptarena import (
    CameraModel,
    MotorFrame,
    decode_png,
    encode_png,
    initial_state,
    load_task_pack,
    project_bearing_to_column,
    render,
    render_topdown,
    run_frames,
)

out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "demo_frames")
out.mkdir(parents=True, exist_ok=True)
pack = load_task_pack()

# --- a first-person frame from the platform task --------------------------------

spec = pack["l05_task2"]
state = initial_state(spec)
frame = render(state, spec, CameraModel(width=512, height=512))
(out / "l05_task2_pov.png").write_bytes(encode_png(frame))
print(f"first-person frame: {frame.pixels.shape}, blackout={frame.blackout}")
assert frame.pixels.shape == (512, 512, 3)
assert frame.pixels.std() > 0  # something visible

# --- png round-trip is lossless --------------------------------------------------

again = decode_png(encode_png(frame))
assert np.array_equal(again, frame.pixels)
print("png round-trip: lossless")

# --- blackout windows blank the view, not the world -----------------------------

spec = pack["l07_task1"]  # dark during steps [15, 45) and [80, 120)
state = initial_state(spec)
state, _ = run_frames(state, [MotorFrame()] * 20, spec)
dark = render(state, spec, CameraModel(width=64, height=64))
print(f"step {state.step} frame: blackout={dark.blackout}, max pixel {dark.pixels.max()}")
assert dark.blackout and dark.pixels.max() == 0
assert abs(state.cumulative_reward - (-20 / 500)) < 1e-12  # decay continued

# --- calibration: straight ahead lands on the center column ----------------------

cam = CameraModel(width=512, height=512)
center = project_bearing_to_column(0.0, cam)
right_edge = project_bearing_to_column(cam.horizontal_fov / 2, cam)
print(f"bearing 0 -> column {center}, +fov/2 -> column {right_edge}")
assert center == 256.0 and right_edge == 512.0

# --- top-down map for debugging task layouts -------------------------------------

top = render_topdown(initial_state(pack["l05_task2"]), pack["l05_task2"], size_px=256)
(out / "l05_task2_topdown.png").write_bytes(encode_png(top))
print(f"wrote {out}/l05_task2_pov.png and {out}/l05_task2_topdown.png")

print("ok")
