"""Unification goals, ground substitutions, and checking a substitution against a goal."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .concepts import (
    Alphabet,
    HeadKind,
    ParseError,
    Particle,
    normalize,
    parse_concept,
    reduce,
    render,
    subsumes,
)

Substitution = Mapping[str, frozenset]


@dataclass(frozen=True)
class GoalSubsumption:
    lhs: frozenset
    rhs: Particle
    solved: bool = False

    def variables(self) -> set[str]:
        names = {p.head.name for p in self.lhs if p.is_variable}
        if self.rhs.is_variable:
            names.add(self.rhs.head.name)
        return names

    def render(self) -> str:
        return f"{render(self.lhs)} <= {self.rhs.render()}"


@dataclass(frozen=True)
class Goal:
    subsumptions: tuple[GoalSubsumption, ...]
    variables: frozenset = frozenset()
    constants: frozenset = frozenset()
    roles: frozenset = frozenset()

    @classmethod
    def build(cls, subsumptions: Iterable[GoalSubsumption], variables: Iterable[str] = (),
              roles: Iterable[str] = ()) -> "Goal":
        """Make a goal, deriving constants and extra roles from the subsumptions."""
        subs = tuple(subsumptions)
        names: set[str] = set()
        found_roles: set[str] = set(roles)
        found_vars: set[str] = set(variables)
        for s in subs:
            for p in (*s.lhs, s.rhs):
                found_roles.update(p.path)
                if p.is_constant:
                    names.add(p.head.name)
                elif p.is_variable:
                    found_vars.add(p.head.name)
        return cls(subs, frozenset(found_vars), frozenset(names), frozenset(found_roles))

    def occurring_variables(self) -> list[str]:
        names: set[str] = set()
        for s in self.subsumptions:
            names |= s.variables()
        return sorted(names)

    def render(self) -> str:
        lines = [f"vars: {', '.join(sorted(self.variables))}"]
        if self.roles:
            lines.append(f"roles: {', '.join(sorted(self.roles))}")
        lines.extend(s.render() for s in self.subsumptions)
        return "\n".join(lines) + "\n"


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _name_list(text: str, lineno: int) -> list[str]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    for n in names:
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", n):
            raise ParseError(f"bad identifier {n!r}", line=lineno)
    return names


def _expand(lhs: frozenset, rhs: frozenset) -> list[GoalSubsumption]:
    return [GoalSubsumption(lhs, p) for p in sorted(rhs)]


def parse_goal(text: str) -> Goal:
    variables: list[str] | None = None
    roles: list[str] = []
    pending: list[tuple[int, str, str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        head = line.split(":", 1)[0].strip()
        if head in ("vars", "roles") and ":" in line and ":=" not in line:
            names = _name_list(line.split(":", 1)[1], lineno)
            if head == "vars":
                if variables is not None:
                    raise ParseError("duplicate vars: line", line=lineno)
                variables = names
            else:
                roles.extend(names)
            continue
        m = re.fullmatch(r"(.*?)(<=|==)(.*)", line)
        if m is None:
            raise ParseError("expected '<=' or '=='", line=lineno)
        pending.append((lineno, m.group(1), m.group(2), m.group(3)))
    if variables is None:
        raise ParseError("missing 'vars:' line", line=1)
    alphabet = Alphabet(variables=frozenset(variables))
    subs: list[GoalSubsumption] = []
    for lineno, left, op, right in pending:
        sides = []
        for side in (left, right):
            try:
                sides.append(normalize(parse_concept(side, alphabet)))
            except ParseError as err:
                raise ParseError(str(err), line=lineno) from err
        subs.extend(_expand(sides[0], sides[1]))
        if op == "==":
            subs.extend(_expand(sides[1], sides[0]))
    return Goal.build(subs, variables, roles)


# --- substitutions ---------------------------------------------------------

_SUBST_LINE = re.compile(r"([A-Za-z][A-Za-z0-9_]*(?:\^[A-Za-z0-9_.]+)?)\s*:=(.*)")


def parse_substitution(text: str) -> dict[str, frozenset]:
    sigma: dict[str, frozenset] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = _SUBST_LINE.fullmatch(line)
        if m is None:
            raise ParseError("expected 'X := <concept>'", line=lineno)
        name = m.group(1)
        if name in sigma:
            raise ParseError(f"variable {name} assigned twice", line=lineno)
        try:
            sigma[name] = normalize(parse_concept(m.group(2)))
        except ParseError as err:
            raise ParseError(str(err), line=lineno) from err
    return sigma


def render_substitution(sigma: Substitution, variables: Iterable[str] | None = None) -> str:
    names = sorted(sigma) if variables is None else sorted(variables)
    return "".join(f"{name} := {render(sigma.get(name, frozenset()))}\n" for name in names)


def _check_ground(sigma: Substitution) -> None:
    for name, image in sigma.items():
        if any(p.is_variable for p in image):
            raise ValueError(f"image of {name} is not ground")


def apply_substitution(sigma: Substitution, s: Iterable[Particle]) -> frozenset:
    out: list[Particle] = []
    for p in s:
        if p.is_variable:
            for q in sigma.get(p.head.name, ()):
                if q.is_variable:
                    raise ValueError(f"image of {p.head.name} is not ground")
                out.append(Particle(p.path + q.path, q.head))
        else:
            out.append(p)
    return reduce(out)


def verify_unifier(goal: Goal, sigma: Substitution) -> bool:
    _check_ground(sigma)
    return all(
        subsumes(apply_substitution(sigma, s.lhs), apply_substitution(sigma, [s.rhs]))
        for s in goal.subsumptions
    )


def failing_subsumptions(goal: Goal, sigma: Substitution) -> list[GoalSubsumption]:
    return [
        s for s in goal.subsumptions
        if not subsumes(apply_substitution(sigma, s.lhs), apply_substitution(sigma, [s.rhs]))
    ]


def merge_substitutions(sigmas: Iterable[Substitution]) -> dict[str, frozenset]:
    merged: dict[str, set] = {}
    for sigma in sigmas:
        for name, image in sigma.items():
            merged.setdefault(name, set()).update(image)
    return {name: reduce(image) for name, image in merged.items()}


def split_by_constant(goal: Goal) -> list[Goal]:
    """One subgoal per constant, with every other constant replaced by top."""
    if len(goal.constants) <= 1:
        return [goal]
    subgoals = []
    for keep in sorted(goal.constants):
        def erase(p: Particle) -> bool:
            return p.head.kind is HeadKind.CONST and p.head.name != keep

        subs = []
        for s in goal.subsumptions:
            if erase(s.rhs):
                continue
            subs.append(GoalSubsumption(reduce(p for p in s.lhs if not erase(p)), s.rhs))
        sub = Goal.build(subs, goal.variables, goal.roles)
        subgoals.append(sub)
    return subgoals

