import random

import pytest

from scriptarena import (
    Go,
    MotorFrame,
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
from scriptarena.dsl import GO_RANGE, TURN_RANGE


def commands(text):
    return parse(text).commands


def kind_of(text):
    with pytest.raises(ScriptParseError) as err:
        parse(text)
    return err.value.kind


# --- parsing -------------------------------------------------------------------


def test_plain_commands_parse():
    assert commands("Go(5);") == (Go(5),)
    assert commands("Turn(-90);") == (Turn(-90),)
    assert commands("Think('hello');") == (Think("hello"),)
    assert commands('Think("two words");') == (Think("two words"),)
    assert commands("Go(-3);") == (Go(-3),)  # backward steps are legal


def test_sequences_preserve_order():
    got = commands("Think('plan'); Turn(90); Go(7); Turn(-30); Go(2);")
    assert got == (Think("plan"), Turn(90), Go(7), Turn(-30), Go(2))


def test_commands_are_extracted_from_surrounding_prose():
    text = "I can see the goal ahead, so I will move.\nGo(9); and then Turn(30); to check."
    assert commands(text) == (Go(9), Turn(30))
    text = "First Think('the sphere is green'); then approach: Go(12);"
    assert commands(text) == (Think("the sphere is green"), Go(12))


def test_unknown_function_like_names_in_prose_are_ignored_when_real_commands_exist():
    assert commands("max(3) suggests Go(3);") == (Go(3),)


def test_whitespace_variants_parse():
    assert commands("Go( 5 ) ;") == (Go(5),)
    assert commands("Turn(+24);") == (Turn(24),)
    assert commands("Think( 'x' );") == (Think("x"),)


def test_error_kinds():
    assert kind_of("") is ParseErrorKind.EMPTY_SCRIPT
    assert kind_of("walk forward please") is ParseErrorKind.EMPTY_SCRIPT
    assert kind_of("Jump(3);") is ParseErrorKind.UNKNOWN_COMMAND
    assert kind_of("Go(3.5);") is ParseErrorKind.BAD_ARGUMENT
    assert kind_of("Go();") is ParseErrorKind.BAD_ARGUMENT
    assert kind_of("Go(0);") is ParseErrorKind.BAD_ARGUMENT
    assert kind_of(f"Go({GO_RANGE + 1});") is ParseErrorKind.BAD_ARGUMENT
    assert kind_of(f"Turn({TURN_RANGE + 1});") is ParseErrorKind.BAD_ARGUMENT
    assert kind_of("Think(unquoted);") is ParseErrorKind.BAD_ARGUMENT
    assert kind_of("Think('never closes);") is ParseErrorKind.UNTERMINATED_STRING
    assert kind_of("Go(5)") is ParseErrorKind.MISSING_SEMICOLON
    assert kind_of("\"Go(5);\"") is ParseErrorKind.WRAPPED_IN_QUOTES
    assert kind_of("'Turn(30); Go(2);'") is ParseErrorKind.WRAPPED_IN_QUOTES


def test_parse_error_carries_offset_and_reason():
    with pytest.raises(ScriptParseError) as err:
        parse("sure: Jump(3);")
    assert err.value.offset == len("sure: ")
    assert err.value.reason


def test_quotes_inside_think_text_do_not_trip_the_wrapper_check():
    got = commands("Think('the \"left\" door'); Go(2);")
    assert got == (Think('the "left" door'), Go(2))


# --- quantization ------------------------------------------------------------------


def test_quantize_examples():
    assert quantize_turn(45) == 42
    assert quantize_turn(-45) == -42
    assert quantize_turn(5) == 0
    assert quantize_turn(-5) == 0
    assert quantize_turn(6) == 6
    assert quantize_turn(360) == 360
    assert quantize_turn(-360) == -360


def test_quantize_properties_over_the_whole_range():
    for d in range(-TURN_RANGE, TURN_RANGE + 1):
        q = quantize_turn(d)
        assert q % 6 == 0
        assert abs(q) <= abs(d)
        if q != 0:
            assert (q > 0) == (d > 0)


def test_quantize_rejects_out_of_range():
    with pytest.raises(OutOfRangeError):
        quantize_turn(361)
    with pytest.raises(OutOfRangeError):
        quantize_turn(-400)


# --- compilation ---------------------------------------------------------------


def test_go_compiles_to_one_frame_per_step():
    plan = compile(parse("Go(5);"))
    assert plan.frames == tuple(MotorFrame(forward=1) for _ in range(5))
    plan = compile(parse("Go(-4);"))
    assert plan.frames == tuple(MotorFrame(forward=-1) for _ in range(4))
    assert plan.forward_steps == -4


def test_turn_compiles_to_six_degree_frames():
    plan = compile(parse("Turn(45);"))
    assert plan.frames == tuple(MotorFrame(rotate=6) for _ in range(7))
    assert plan.total_rotation == 42
    plan = compile(parse("Turn(-13);"))
    assert plan.frames == tuple(MotorFrame(rotate=-6) for _ in range(2))
    plan = compile(parse("Turn(5);"))
    assert plan.frames == ()


def test_think_contributes_notes_but_no_frames():
    plan = compile(parse("Think('a'); Go(2); Think('b');"))
    assert plan.think_notes == ((0, "a"), (2, "b"))
    assert len(plan.frames) == 2


def test_displacement_helper():
    plan = compile(parse("Go(35);"))
    assert plan.total_displacement() == pytest.approx(40.0)


# --- canonical form ------------------------------------------------------------


def test_pretty_produces_the_canonical_text():
    script = parse("  Go( 3 ) ; prose Turn(-24); Think('note');")
    assert pretty(script) == "Go(3); Turn(-24); Think('note');"


def test_pretty_picks_a_quote_that_avoids_collisions():
    assert pretty(parse('Think("it\'s here");')) == 'Think("it\'s here");'
    with pytest.raises(ValueError):
        pretty(Script(commands=(Think("a'b\"c"),), spans=()))


def random_script_text(rng):
    parts = []
    for _ in range(rng.randrange(1, 6)):
        choice = rng.randrange(3)
        if choice == 0:
            steps = rng.choice([s for s in range(-GO_RANGE, GO_RANGE + 1) if s != 0])
            parts.append(f"Go({steps});")
        elif choice == 1:
            parts.append(f"Turn({rng.randrange(-TURN_RANGE, TURN_RANGE + 1)});")
        else:
            text = "".join(rng.choice("abc xyz123,.") for _ in range(rng.randrange(0, 12)))
            parts.append(f"Think('{text}');")
    return " ".join(parts)


def test_round_trip_on_a_thousand_generated_scripts():
    rng = random.Random(20240817)
    for _ in range(1000):
        text = random_script_text(rng)
        script = parse(text)
        again = parse(pretty(script))
        assert again.commands == script.commands
        assert pretty(again) == pretty(script)
