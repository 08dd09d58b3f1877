"""Run the bundled goals through the engine and show what each stage produces."""

import json
from pathlib import Path

from flbot.builder import check_decreasing_rule
from flbot.decide import decide_unification
from flbot.goals import parse_goal, parse_substitution, render_substitution, split_by_constant
from flbot.normalizer import DecompositionRegistry
from flbot.oracle import OracleBounds, brute_force_unifiable

GOALS = Path(__file__).parent / "goals"


def show(name):
    goal = parse_goal((GOALS / name).read_text())
    print(f"== {name}")
    print(goal.render())
    for sub in split_by_constant(goal):
        print(f"  subgoal: {'; '.join(s.render() for s in sub.subsumptions)}")
    result = decide_unification(goal)
    print("  verdict:", "UNIFIABLE" if result.unifiable else "NOT_UNIFIABLE")
    for rep in result.subgoals:
        size = len(rep.store) if rep.store is not None else 0
        print(f"  constant {rep.constant}: case={rep.case} branches={rep.branches} shortcuts={size}")
    if result.witness is not None:
        print("  witness:")
        print("    " + render_substitution(result.witness).rstrip().replace("\n", "\n    "))
    oracle = brute_force_unifiable(goal, OracleBounds(2, 2))
    print("  oracle:", "witness found" if oracle.found else "none within depth 2, width 2")
    print()


for name in ("two_constants.goal", "bottom_chain.goal", "cyclic.goal"):
    show(name)

# a substitution that satisfies the flattened goal but breaks the decreasing rule
registry = DecompositionRegistry.from_json(json.loads((GOALS / "bottom_chain_registry.json").read_text()))
bogus = parse_substitution((GOALS / "bottom_chain_bogus.sub").read_text())
print("bogus substitution obeys the decreasing rule:", check_decreasing_rule(bogus, registry))
