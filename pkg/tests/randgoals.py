"""Random small goals for cross-validation."""

import random

from flbot.goals import parse_goal

VARIABLES = ("X", "Y", "Z")
ROLES = ("r", "s")


def random_atom(rng, names, roles, depth):
    pick = rng.random()
    if depth > 0 and pick < 0.35:
        return f"all {rng.choice(roles)}.{random_atom(rng, names, roles, depth - 1)}"
    if pick < 0.45:
        return "bot" if rng.random() < 0.85 else "top"
    return rng.choice(names)


def random_concept(rng, names, roles, depth=2, width=2):
    return " and ".join(random_atom(rng, names, roles, depth) for _ in range(rng.randint(1, width)))


def random_goal_text(rng):
    variables = VARIABLES[: rng.randint(1, 3)]
    roles = ROLES[: rng.randint(1, 2)]
    names = list(variables) + (["A"] if rng.random() < 0.7 else [])
    lines = [f"vars: {', '.join(variables)}", f"roles: {', '.join(roles)}"]
    for _ in range(rng.randint(1, 3)):
        left = random_concept(rng, names, roles)
        right = random_concept(rng, names, roles)
        lines.append(f"{left} {'==' if rng.random() < 0.2 else '<='} {right}")
    return "\n".join(lines) + "\n"


def random_goals(seed, count):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        text = random_goal_text(rng)
        goal = parse_goal(text)
        if goal.subsumptions:
            out.append((text, goal))
    return out
