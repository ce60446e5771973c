"""The action-script language: parsing prose, canonical form, motor frames.

Run: python3 demos/03_action_scripts.py
"""

from scriptarena import ScriptParseError, compile, parse, pretty, quantize_turn

# --- commands are fished out of conversational replies ---------------------------

reply = (
    "Looking at the image, the green sphere is slightly left of center.\n"
    "I will rotate a little and approach it.\n"
    "Think('green is left of center'); Turn(-10); Go(12);"
)
script = parse(reply)
print("parsed:", pretty(script))
assert pretty(script) == "Think('green is left of center'); Turn(-10); Go(12);"

# --- turns snap toward zero on a 6 degree grid ------------------------------------

for asked in (-10, -6, 0, 7, 90, 359):
    print(f"quantize_turn({asked:4d}) = {quantize_turn(asked):4d}")
assert [quantize_turn(d) for d in (-10, -6, 0, 7, 90, 359)] == [-6, -6, 0, 6, 90, 354]

# --- compilation: one frame per unit step, one per 6 degree increment --------------

plan = compile(script)
print(f"{len(script.commands)} commands -> {len(plan.frames)} motor frames,"
      f" {len(plan.think_notes)} notes")
assert len(plan.frames) == 1 + 12  # Turn(-10) snaps to -6: one frame; Go(12): twelve
assert plan.think_notes[0][1] == "green is left of center"

# --- parse errors carry a kind and a character offset ------------------------------

bad = [
    "Jump(3);",                # no such command
    '"Go(5);"',                # whole reply wrapped in quotes
    "Go(5) Turn(6);",          # missing the semicolon
    "Go(99);",                 # argument outside [-35, 35]
]
for text in bad:
    try:
        parse(text)
    except ScriptParseError as exc:
        print(f"{text!r:24} -> {exc.kind.value} at offset {exc.offset}: {exc.reason}")
    else:
        raise AssertionError(f"{text!r} should not parse")

print("ok")
