"""Normalized goals and shortcuts shared by several test modules."""

from pathlib import Path

from flbot.normalizer import CHOOSE_BOT, CHOOSE_CONSTANT, CHOOSE_OTHER, NormalizedGoal
from flbot.shortcuts import Shortcut

GOALS = Path(__file__).resolve().parent.parent / "demos" / "goals"


def goal_text(name: str) -> str:
    return (GOALS / name).read_text()


def sc(main, prefix=()):
    return Shortcut.of(main, prefix)


def staged_goal() -> NormalizedGoal:
    """Flat {Y^r <= Z, U and Y <= Z^s}; start {Y^r <= A, U^r.s <= bot}."""
    guess = {v: CHOOSE_OTHER for v in ("U", "Y", "Z", "U^r", "Z^s")}
    guess["Y^r"] = CHOOSE_CONSTANT
    guess["U^r.s"] = CHOOSE_BOT
    return NormalizedGoal.build(
        [(["Y^r"], "Z"), (["U", "Y"], "Z^s")],
        guess,
        decompositions=[("Y", "r"), ("U", "r"), ("U^r", "s"), ("Z", "s")],
        constant="A",
        original_variables=["U", "Y", "Z"],
    )


STAGED_BOT_INI = sc(["U^r.s"])
STAGED_A_INI = sc(["Y^r"], ["U^r.s"])
STAGED_S1 = sc(["U^r", "Y^r"], ["U^r.s"])
STAGED_S2 = sc(["U", "Y", "Z^s"])
STAGED_S3 = sc(["Z"], ["Y^r", "U^r.s"])


def flat_pair_goal() -> NormalizedGoal:
    """Flat {Y and X <= X^r, X^r <= X}."""
    guess = {v: CHOOSE_OTHER for v in ("X", "Y", "X^r")}
    return NormalizedGoal.build([(["Y", "X"], "X^r"), (["X^r"], "X")], guess, decompositions=[("X", "r")])


def cyclic_goal() -> NormalizedGoal:
    """Flat {X^r <= Y, Y^r <= X}; start {X^r <= A}."""
    guess = {v: CHOOSE_OTHER for v in ("X", "Y", "Y^r")}
    guess["X^r"] = CHOOSE_CONSTANT
    return NormalizedGoal.build([(["X^r"], "Y"), (["Y^r"], "X")], guess,
                                decompositions=[("X", "r"), ("Y", "r")], constant="A",
                                original_variables=["X", "Y"])
