import pytest

from flbot.concepts import BOTTOM, parse_set, reduce
from flbot.errors import ResourceLimitError
from flbot.goals import parse_goal, verify_unifier
from flbot.oracle import OracleBounds, brute_force_unifiable, enumerate_images

from fixtures import goal_text


def images(roles, constants, depth, width):
    return set(enumerate_images(roles, constants, OracleBounds(depth, width)))


def test_constants_only():
    assert images([], ["A"], 0, 1) == {frozenset(), parse_set("A"), frozenset({BOTTOM})}


def test_roles_only():
    assert images(["r"], [], 1, 1) == {frozenset(), frozenset({BOTTOM}), parse_set("all r.bot")}


def test_reduced_pairs_only():
    got = images(["r"], ["A"], 1, 2)
    # pool: bot, A, all r.bot, all r.A; reduced sets of size <= 2
    assert len(got) == 1 + 4 + 2
    assert parse_set("A and all r.A") in got
    assert parse_set("A and all r.bot") in got
    assert all(reduce(s) == s for s in got)


def test_images_smallest_first():
    sizes = [len(s) for s in enumerate_images(["r", "s"], ["A"], OracleBounds(2, 2))]
    assert sizes == sorted(sizes)


def test_invalid_bounds():
    with pytest.raises(ValueError):
        OracleBounds(-1, 1)
    with pytest.raises(ValueError):
        OracleBounds(1, 0)


def test_two_constants_bottom():
    goal = parse_goal(goal_text("two_constants.goal"))
    result = brute_force_unifiable(goal, OracleBounds(0, 1))
    assert result.witness == {"X": frozenset({BOTTOM})}


def test_bottom_chain_none():
    goal = parse_goal(goal_text("bottom_chain.goal"))
    assert not brute_force_unifiable(goal, OracleBounds(3, 2), cap=None).found


def test_reflexive_goal_takes_top():
    result = brute_force_unifiable(parse_goal("vars: X\nX <= X\n"), OracleBounds(1, 1))
    assert result.witness == {"X": frozenset()}


def test_ground_goal():
    assert brute_force_unifiable(parse_goal("vars:\nbot <= A\n"), OracleBounds()).found
    assert not brute_force_unifiable(parse_goal("vars:\nA <= bot\n"), OracleBounds()).found


def test_cap():
    goal = parse_goal(goal_text("bottom_chain.goal"))
    with pytest.raises(ResourceLimitError):
        brute_force_unifiable(goal, OracleBounds(3, 2), cap=10)


def test_witness_verifies():
    goal = parse_goal(goal_text("cyclic.goal"))
    result = brute_force_unifiable(goal, OracleBounds(3, 2))
    assert result.found and verify_unifier(goal, result.witness)
