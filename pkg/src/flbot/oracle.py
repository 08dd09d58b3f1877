"""Bounded brute-force search for ground unifiers, independent of the engine."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable, Iterator, Optional

from .concepts import BOT_HEAD, Particle, constant, reduce, subsumes
from .errors import ResourceLimitError
from .goals import Goal, apply_substitution


@dataclass(frozen=True)
class OracleBounds:
    max_depth: int = 2
    max_width: int = 2

    def __post_init__(self) -> None:
        if self.max_depth < 0 or self.max_width < 1:
            raise ValueError("need max_depth >= 0 and max_width >= 1")


def _particles(roles: Iterable[str], constants: Iterable[str], depth: int) -> list[Particle]:
    roles = sorted(roles)
    heads = [BOT_HEAD] + [constant(c) for c in sorted(constants)]
    out = []
    for n in range(depth + 1):
        for path in product(roles, repeat=n):
            out.extend(Particle(path, h) for h in heads)
    return sorted(out)


def enumerate_images(roles: Iterable[str], constants: Iterable[str], bounds: OracleBounds) -> Iterator[frozenset]:
    """Every reduced particle set within the bounds, smallest first."""
    pool = _particles(roles, constants, bounds.max_depth)
    for k in range(bounds.max_width + 1):
        for combo in combinations(pool, k):
            s = frozenset(combo)
            if reduce(s) == s:
                yield s


@dataclass
class OracleResult:
    witness: Optional[dict]
    tried: int

    @property
    def found(self) -> bool:
        return self.witness is not None


def brute_force_unifiable(goal: Goal, bounds: OracleBounds, cap: Optional[int] = 5_000_000) -> OracleResult:
    """First assignment (in enumeration order) that unifies ``goal``.

    Subsumptions are checked as soon as all their variables are assigned, so
    the first hit is the same as in a plain product-order scan.
    """
    names = goal.occurring_variables()
    images = list(enumerate_images(goal.roles, goal.constants, bounds))
    order = {v: i for i, v in enumerate(names)}
    checks: dict[int, list] = {}
    for s in goal.subsumptions:
        vs = s.variables()
        last = max((order[v] for v in vs), default=-1)
        checks.setdefault(last, []).append(s)
    tried = 0

    def holds(sigma: dict, subs: list) -> bool:
        return all(subsumes(apply_substitution(sigma, s.lhs), apply_substitution(sigma, [s.rhs])) for s in subs)

    if not holds({}, checks.get(-1, [])):
        return OracleResult(None, 0)
    sigma: dict = {}

    def search(i: int) -> bool:
        nonlocal tried
        if i == len(names):
            return True
        for image in images:
            tried += 1
            if cap is not None and tried > cap:
                raise ResourceLimitError(f"oracle tried more than {cap} assignments")
            sigma[names[i]] = image
            if holds(sigma, checks.get(i, [])) and search(i + 1):
                return True
        del sigma[names[i]]
        return False

    if search(0):
        witness = {v: sigma.get(v, frozenset()) for v in sorted(goal.variables)}
        return OracleResult(witness, tried)
    return OracleResult(None, tried)
