"""Guessing, rule-based simplification and flattening of a single-constant goal.

Each branch fixes, for every variable, whether its image is top, bottom or
something else, and whether it contains the goal's constant at the top level.
Under those guesses the goal is simplified and flattened until only
pure-variable subsumptions remain.  Flattening introduces decomposition
variables ``X^r`` standing for the ``r``-successor part of ``X``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, NamedTuple, Optional, Union

from .concepts import (
    BOT_HEAD,
    TOP_HEAD,
    HeadKind,
    Particle,
    constant as constant_head,
    reduce,
    render,
    variable as variable_head,
)
from .errors import EngineDefect, ResourceLimitError
from .goals import Goal, GoalSubsumption


class GuessKind(Enum):
    TOP = "top"
    BOT = "bot"
    OTHER = "other"


class Choice(NamedTuple):
    kind: GuessKind
    a_flag: bool = False

    def label(self) -> str:
        if self.kind is GuessKind.OTHER:
            return "other+A" if self.a_flag else "other"
        return self.kind.value


CHOOSE_TOP = Choice(GuessKind.TOP)
CHOOSE_BOT = Choice(GuessKind.BOT)
CHOOSE_OTHER = Choice(GuessKind.OTHER)
CHOOSE_CONSTANT = Choice(GuessKind.OTHER, True)

# cheap verdicts first; the search is exhaustive so the order does not matter for correctness
BRANCH_ORDER = (CHOOSE_TOP, CHOOSE_OTHER, CHOOSE_CONSTANT, CHOOSE_BOT)

Guess = dict  # variable name -> Choice


def choice_from_label(label: str) -> Choice:
    for c in BRANCH_ORDER:
        if c.label() == label:
            return c
    raise ValueError(f"unknown guess label {label!r}")


class DecompositionRegistry:
    """Decomposition variables keyed by (base variable, role string)."""

    def __init__(self) -> None:
        self._by_key: dict[tuple[str, tuple[str, ...]], str] = {}
        self._key_of: dict[str, tuple[str, tuple[str, ...]]] = {}

    @staticmethod
    def name_for(base: str, path: tuple[str, ...]) -> str:
        return base if not path else f"{base}^{'.'.join(path)}"

    def copy(self) -> "DecompositionRegistry":
        other = DecompositionRegistry()
        other._by_key = dict(self._by_key)
        other._key_of = dict(self._key_of)
        return other

    def split(self, name: str) -> tuple[str, tuple[str, ...]]:
        return self._key_of.get(name, (name, ()))

    def child(self, name: str, role: str) -> Optional[str]:
        base, path = self.split(name)
        return self._by_key.get((base, path + (role,)))

    def ensure(self, name: str, role: str) -> tuple[str, bool]:
        """The ``role``-decomposition of ``name``, creating it if needed."""
        base, path = self.split(name)
        key = (base, path + (role,))
        existing = self._by_key.get(key)
        if existing is not None:
            return existing, False
        child = self.name_for(*key)
        self._by_key[key] = child
        self._key_of[child] = key
        return child, True

    def add(self, parent: str, role: str) -> str:
        return self.ensure(parent, role)[0]

    def is_decomposition(self, name: str) -> bool:
        return name in self._key_of

    def parent(self, name: str) -> Optional[str]:
        if name not in self._key_of:
            return None
        base, path = self._key_of[name]
        return self.name_for(base, path[:-1])

    def role(self, name: str) -> Optional[str]:
        if name not in self._key_of:
            return None
        return self._key_of[name][1][-1]

    def names(self) -> list[str]:
        return sorted(self._key_of)

    def triples(self) -> list[tuple[str, str, str]]:
        """``(parent, role, child)`` for every registered decomposition."""
        return sorted((self.parent(c), self.role(c), c) for c in self._key_of)

    def __len__(self) -> int:
        return len(self._key_of)

    def __contains__(self, name: str) -> bool:
        return name in self._key_of

    def max_path_length(self) -> int:
        return max((len(p) for _, p in self._key_of.values()), default=0)

    def to_json(self) -> list[dict]:
        return [{"name": c, "parent": p, "role": r} for p, r, c in self.triples()]

    @classmethod
    def from_json(cls, entries: Iterable[dict]) -> "DecompositionRegistry":
        reg = cls()
        pending = sorted(entries, key=lambda e: e["name"].count("."))
        for entry in pending:
            made = reg.add(entry["parent"], entry["role"])
            if made != entry["name"]:
                raise ValueError(f"registry entry {entry['name']!r} does not match {made!r}")
        return reg


class FlatSubsumption(NamedTuple):
    lhs: frozenset
    rhs: str

    def render(self) -> str:
        return f"{' and '.join(sorted(self.lhs))} <= {self.rhs}"


@dataclass
class NormalizedGoal:
    """Pure-variable subsumptions plus the guesses and decompositions behind them."""

    flat: frozenset
    guess: dict
    registry: DecompositionRegistry
    constant: Optional[str] = None
    original_variables: frozenset = frozenset()

    @classmethod
    def build(cls, flat: Iterable[tuple[Iterable[str], str]], guess: dict,
              decompositions: Iterable[tuple[str, str]] = (), constant: Optional[str] = None,
              original_variables: Iterable[str] = ()) -> "NormalizedGoal":
        registry = DecompositionRegistry()
        for parent, role in sorted(decompositions, key=lambda pr: pr[0].count(".") + pr[0].count("^")):
            registry.add(parent, role)
        flat_set = frozenset(FlatSubsumption(frozenset(lhs), rhs) for lhs, rhs in flat)
        return cls(flat_set, dict(guess), registry, constant, frozenset(original_variables))

    @property
    def variables(self) -> list[str]:
        return sorted(self.guess)

    @property
    def start_bottom(self) -> frozenset:
        return frozenset(v for v, c in self.guess.items() if c.kind is GuessKind.BOT)

    @property
    def start_constant(self) -> frozenset:
        return frozenset(v for v, c in self.guess.items() if c.a_flag)

    @property
    def increasing(self) -> list[tuple[str, str, str]]:
        return self.registry.triples()

    def universe(self) -> list[str]:
        """Variables that may hold particles (everything not guessed top)."""
        return sorted(v for v, c in self.guess.items() if c.kind is not GuessKind.TOP)

    def to_json(self) -> dict:
        start = [f"{v} <= bot" for v in sorted(self.start_bottom)]
        if self.constant is not None:
            start += [f"{v} <= {self.constant}" for v in sorted(self.start_constant)]
        return {
            "start": start,
            "increasing": [f"{p} <= all {r}.{c}" for p, r, c in self.increasing],
            "flat": sorted(f.render() for f in self.flat),
            "guess": {v: self.guess[v].label() for v in sorted(self.guess)},
        }


@dataclass(frozen=True)
class Failure:
    """A branch refuted by the rule-based simplification."""

    rule: int
    subsumption: str


@dataclass
class Solved:
    """Every subsumption was discharged; the trivial construction yields a witness."""

    goal: NormalizedGoal

    @property
    def substitution(self) -> dict:
        from .builder import build_trivial_unifier

        return build_trivial_unifier(self.goal)


Outcome = Union[NormalizedGoal, Failure, Solved]

Sub = tuple  # (lhs frozenset of Particle, rhs Particle)


def _render_sub(sub: Sub) -> str:
    return f"{render(sub[0])} <= {sub[1].render()}"


def _substitute_particle(p: Particle, guess: dict) -> Particle:
    if p.is_variable:
        c = guess.get(p.head.name)
        if c is not None and c.kind is GuessKind.TOP:
            return Particle(p.path, TOP_HEAD)
        if c is not None and c.kind is GuessKind.BOT:
            return Particle(p.path, BOT_HEAD)
    return p


def substitute_guesses(subs: Iterable[Sub], guess: dict) -> list[Sub]:
    """Replace top- and bottom-guessed variables textually."""
    out = []
    for lhs, rhs in subs:
        new_lhs = frozenset(_substitute_particle(p, guess) for p in lhs)
        out.append((new_lhs, _substitute_particle(rhs, guess)))
    return out


class _Verdict(Enum):
    SOLVED = "solved"


def _a_flag(guess: dict, name: str) -> bool:
    c = guess.get(name)
    return c is not None and c.a_flag


def _simplify_one(lhs: frozenset, rhs: Particle, guess: dict):
    """Apply the first applicable rule; returns SOLVED, a Failure, a new pair, or None."""
    bare_lhs_vars = [p.head.name for p in lhs if p.is_bare and p.is_variable]
    bare_const_left = any(p.is_bare and p.is_constant for p in lhs)

    if any(p.is_bare and p.is_bottom for p in lhs):
        return _Verdict.SOLVED  # rule 1
    if rhs.is_bare and rhs.is_bottom:
        return Failure(2, _render_sub((lhs, rhs)))
    if rhs.is_top:
        return _Verdict.SOLVED  # rule 3
    if all(p.is_top for p in lhs) and rhs.is_bare and rhs.is_variable:
        return Failure(4, _render_sub((lhs, rhs)))
    if any(p.is_top for p in lhs):
        return frozenset(p for p in lhs if not p.is_top), rhs  # rule 5
    if rhs in lhs:
        return _Verdict.SOLVED  # rule 6
    if rhs.is_bare and rhs.is_constant:
        if any(_a_flag(guess, v) for v in bare_lhs_vars):
            return _Verdict.SOLVED  # rule 7
        return Failure(8, _render_sub((lhs, rhs)))
    if rhs.is_bare and rhs.is_variable:
        if bare_const_left and not _a_flag(guess, rhs.head.name):
            return frozenset(p for p in lhs if not (p.is_bare and p.is_constant)), rhs  # rule 9
        if _a_flag(guess, rhs.head.name) and not bare_const_left \
                and not any(_a_flag(guess, v) for v in bare_lhs_vars):
            return Failure(10, _render_sub((lhs, rhs)))
    return None


def apply_implicit_solver(subs: Iterable[Sub], guess: dict) -> Union[list, Failure, _Verdict]:
    """Simplify every subsumption to a fixpoint.

    Returns the remaining unsolved subsumptions, a :class:`Failure`, or
    ``SOLVED`` when nothing is left.
    """
    remaining = []
    for lhs, rhs in subs:
        while True:
            step = _simplify_one(lhs, rhs, guess)
            if step is None:
                remaining.append((lhs, rhs))
                break
            if step is _Verdict.SOLVED:
                break
            if isinstance(step, Failure):
                return step
            lhs, rhs = step
    if not remaining:
        return _Verdict.SOLVED
    return remaining


SOLVED = _Verdict.SOLVED


def is_flat(sub: Sub) -> bool:
    lhs, rhs = sub
    if not (rhs.is_bare and rhs.is_variable):
        return False
    return all(p.is_bare and p.is_variable for p in lhs)


def _strip_role(p: Particle, role: str, registry: DecompositionRegistry, fresh: list) -> Optional[Particle]:
    if p.is_bare and p.is_variable:
        child, created = registry.ensure(p.head.name, role)
        if created:
            fresh.append(child)
        return Particle((), variable_head(child))
    if p.path and p.path[0] == role:
        return Particle(p.path[1:], p.head)
    return None


def _strip_lhs(lhs: frozenset, role: str, registry, fresh: list) -> frozenset:
    out = []
    for p in sorted(lhs):
        q = _strip_role(p, role, registry, fresh)
        if q is not None:
            out.append(q)
    return reduce(out)


def flatten_step(subs: list, guess: dict, registry: DecompositionRegistry, roles: Iterable[str],
                 constant: Optional[str]) -> tuple[list, list]:
    """Flatten the first non-flat subsumption.

    Returns the new subsumption list and the decomposition variables created
    (each still needs a guess).  ``registry`` is updated in place.
    """
    for index, sub in enumerate(subs):
        if not is_flat(sub):
            break
    else:
        return list(subs), []
    lhs, rhs = sub
    fresh: list[str] = []
    if rhs.path:
        role = rhs.path[0]
        replacement = [(_strip_lhs(lhs, role, registry, fresh), Particle(rhs.path[1:], rhs.head))]
    elif rhs.is_variable:
        replacement = []
        for role in sorted(roles):
            child, created = registry.ensure(rhs.head.name, role)
            stripped = _strip_lhs(lhs, role, registry, fresh)
            if created:
                fresh.append(child)
            replacement.append((stripped, Particle((), variable_head(child))))
        if _a_flag(guess, rhs.head.name):
            if constant is None:
                raise EngineDefect("constant flag set on a goal without constants")
            kept = frozenset(p for p in lhs if p.is_bare and (p.is_constant or p.is_variable))
            replacement.append((kept, Particle((), constant_head(constant))))
    else:
        raise EngineDefect(f"cannot flatten {_render_sub(sub)}")
    seen = set()
    ordered_fresh = [v for v in fresh if not (v in seen or seen.add(v))]
    return list(subs[:index]) + replacement + list(subs[index + 1:]), ordered_fresh


def goal_roles(goal: Goal) -> frozenset:
    roles = set()
    for s in goal.subsumptions:
        for p in (*s.lhs, s.rhs):
            roles.update(p.path)
    return frozenset(roles)


def _size(goal: Goal) -> int:
    return sum(sum(p.depth + 1 for p in s.lhs) + s.rhs.depth + 1 for s in goal.subsumptions)


class _Run:
    """Mutable normalization state of one branch."""

    def __init__(self, goal: Goal):
        if len(goal.constants) > 1:
            raise ValueError("normalization needs a goal with at most one constant")
        self.goal = goal
        self.constant = next(iter(goal.constants)) if goal.constants else None
        self.roles = goal_roles(goal)
        self.subs: list = [(s.lhs, s.rhs) for s in goal.subsumptions if not s.solved]
        self.guess: dict = {}
        self.registry = DecompositionRegistry()
        self.pending: list[str] = goal.occurring_variables()
        self.steps = 0
        size = _size(goal)
        self.step_bound = 10_000 + 200 * size ** 3

    def copy(self) -> "_Run":
        other = object.__new__(_Run)
        other.goal = self.goal
        other.constant = self.constant
        other.roles = self.roles
        other.subs = list(self.subs)
        other.guess = dict(self.guess)
        other.registry = self.registry.copy()
        other.pending = list(self.pending)
        other.steps = self.steps
        other.step_bound = self.step_bound
        return other

    def choices(self) -> tuple:
        if self.constant is None:
            return tuple(c for c in BRANCH_ORDER if not c.a_flag)
        return BRANCH_ORDER

    def assign(self, name: str, choice: Choice) -> None:
        if choice.a_flag and self.constant is None:
            raise ValueError("constant flag guessed for a goal without constants")
        self.guess[name] = choice
        self.pending.remove(name)

    def _result(self, flat: Iterable[Sub]) -> NormalizedGoal:
        flat_set = frozenset(
            FlatSubsumption(frozenset(p.head.name for p in lhs), rhs.head.name) for lhs, rhs in flat
        )
        return NormalizedGoal(flat_set, dict(self.guess), self.registry, self.constant,
                              frozenset(self.goal.variables))

    def _blocked(self, sub: Sub) -> bool:
        return any(p.is_variable and p.head.name not in self.guess for p in (*sub[0], sub[1]))

    def next_pending(self) -> str:
        """An unguessed variable from the blocked subsumption closest to being decided."""
        best = None
        for index, (lhs, rhs) in enumerate(self.subs):
            waiting = sorted({p.head.name for p in (*lhs, rhs) if p.is_variable and p.head.name in self.pending})
            if waiting and (best is None or (len(waiting), index) < best[0]):
                best = ((len(waiting), index), waiting[0])
        return self.pending[0] if best is None else best[1]

    def advance(self) -> Optional[Outcome]:
        """Run until a guess is needed (``None``) or the branch is decided.

        Subsumptions whose variables are all guessed are worked off first,
        so failures surface before new guesses multiply the branches.
        """
        while True:
            blocked = [sub for sub in self.subs if self._blocked(sub)]
            ready = substitute_guesses([sub for sub in self.subs if not self._blocked(sub)], self.guess)
            simplified = apply_implicit_solver(ready, self.guess)
            if isinstance(simplified, Failure):
                return simplified
            ready = [] if simplified is SOLVED else simplified
            self.subs = ready + blocked
            if all(is_flat(sub) for sub in ready):
                if self.pending:
                    return None
                if not self.subs:
                    return Solved(self._result([]))
                return self._result(self.subs)
            self.steps += 1
            if self.steps > self.step_bound:
                raise EngineDefect("normalization exceeded its step bound",
                                   {"goal": self.goal.render()})
            ready, fresh = flatten_step(ready, self.guess, self.registry, self.roles, self.constant)
            self.subs = ready + blocked
            self.pending.extend(fresh)


def normalize_goal(goal: Goal, guess: dict) -> Outcome:
    """Normalize under a complete guess (including any decomposition variables it creates)."""
    run = _Run(goal)
    while True:
        outcome = run.advance()
        if outcome is not None:
            return outcome
        name = run.next_pending()
        if name not in guess:
            raise KeyError(f"no guess given for {name}")
        run.assign(name, guess[name])


@dataclass
class Branch:
    guess: dict
    outcome: Outcome = field(repr=False)


def explore(goal: Goal, max_branches: Optional[int] = None) -> Iterator[Branch]:
    """Depth-first search over all guesses, extending a branch whenever new variables appear."""
    stack = [_Run(goal)]
    produced = 0
    while stack:
        run = stack.pop()
        outcome = run.advance()
        if outcome is None:
            name = run.next_pending()
            children = []
            for choice in run.choices():
                child = run.copy()
                child.assign(name, choice)
                children.append(child)
            stack.extend(reversed(children))
            continue
        produced += 1
        if max_branches is not None and produced > max_branches:
            raise ResourceLimitError(f"more than {max_branches} branches")
        yield Branch(dict(run.guess), outcome)


def branch_iterator(goal: Goal, max_branches: Optional[int] = None) -> Iterator[dict]:
    for branch in explore(goal, max_branches):
        yield branch.guess
