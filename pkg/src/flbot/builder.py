"""Building ground witnesses for normalized goals."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

from .concepts import BOTTOM, Particle, is_prefix, constant as constant_head, reduce, render, subsumes, wrap
from .errors import EngineDefect
from .normalizer import DecompositionRegistry, GuessKind, NormalizedGoal
from .shortcuts import GoalView, Shortcut, ShortcutStore, prune


def build_trivial_unifier(ng: NormalizedGoal) -> dict[str, frozenset]:
    """Witness for a normalized goal with no flat subsumptions."""
    if ng.flat:
        raise ValueError("the trivial construction needs an empty set of flat subsumptions")
    images: dict[str, set] = {}
    for name, choice in ng.guess.items():
        if choice.kind is GuessKind.BOT:
            images[name] = {BOTTOM}
        elif choice.a_flag:
            images[name] = {Particle((), constant_head(ng.constant))}
        else:
            images[name] = set()
    triples = ng.registry.triples()
    for _ in range(len(ng.registry) + 1):
        changed = False
        for parent, role, child in triples:
            if ng.guess.get(parent, None) is None or ng.guess[parent].kind is not GuessKind.OTHER:
                continue
            extra = wrap((role,), images.get(child, ())) - images[parent]
            if extra:
                images[parent] |= extra
                changed = True
        if not changed:
            return {name: reduce(image) for name, image in images.items()}
    raise EngineDefect("trivial construction did not stabilize")


def check_decreasing_rule(sigma, registry: DecompositionRegistry) -> bool:
    """Every ``all r.P`` held by ``X`` has ``P`` held by ``X^r``."""
    return not decreasing_violations(sigma, registry)


def decreasing_violations(sigma, registry: DecompositionRegistry) -> list[tuple[str, str]]:
    problems = []
    for parent, role, child in registry.triples():
        below = sigma.get(child, frozenset())
        for p in sigma.get(parent, ()):
            if p.path[:1] != (role,):
                continue
            tail = Particle(p.path[1:], p.head)
            if tail in below:
                continue
            # accept a member equivalent to the tail
            if any(subsumes({m}, {tail}) and subsumes({tail}, {m}) for m in below):
                continue
            problems.append((parent, p.render()))
    return problems


def normalized_violations(ng: NormalizedGoal, sigma) -> list[str]:
    """Everything a witness for the normalized goal must satisfy, as a list of failures."""
    image = lambda v: sigma.get(v, frozenset())  # noqa: E731
    problems = []
    for v, choice in sorted(ng.guess.items()):
        if choice.kind is GuessKind.TOP and image(v):
            problems.append(f"{v} guessed top but holds {render(image(v))}")
        if choice.kind is GuessKind.BOT and not subsumes(image(v), {BOTTOM}):
            problems.append(f"start {v} <= bot")
        if choice.a_flag and not subsumes(image(v), {Particle((), constant_head(ng.constant))}):
            problems.append(f"start {v} <= {ng.constant}")
    for f in sorted(ng.flat, key=lambda f: f.render()):
        left = reduce(p for y in f.lhs for p in image(y))
        if not subsumes(left, image(f.rhs)):
            problems.append(f"flat {f.render()}")
    for parent, role, child in ng.increasing:
        if not subsumes(image(parent), wrap((role,), image(child))):
            problems.append(f"increasing {parent} <= all {role}.{child}")
    for parent, p in decreasing_violations(sigma, ng.registry):
        problems.append(f"decreasing rule at {parent} for {p}")
    return problems


@dataclass
class CreationState:
    created: dict = field(default_factory=dict)  # Shortcut -> set of Particle
    active: deque = field(default_factory=deque)  # (Particle, Shortcut)
    log: list = field(default_factory=list)
    prefix_witness: dict = field(default_factory=dict)  # (Shortcut, Particle) -> (Shortcut, Particle)
    held: dict = field(default_factory=dict)  # variable -> particles it holds so far


class _Builder:
    def __init__(self, ng: NormalizedGoal, store: ShortcutStore, on_step: Optional[Callable] = None):
        self.ng = ng
        self.view = GoalView(ng)
        self.store = store
        self.state = CreationState()
        self.on_step = on_step
        self.deferred: list = []
        self.steps = 0
        self.limit = 64 * (len(store) + 2) ** 2 + 1000

    def fail(self, message: str) -> EngineDefect:
        return EngineDefect(message, {
            "normalized_goal": self.ng.to_json(),
            "store": self.store.to_json(),
            "created": [
                {"shortcut": s.to_json(), "particles": sorted(p.render() for p in ps)}
                for s, ps in sorted(self.state.created.items(), key=lambda kv: kv[0].sort_key())
            ],
        })

    def trivially_prefixed(self, s: Shortcut, p: Particle) -> bool:
        # bottom variables hold the bare bottom, a prefix of every other particle
        return s.prefix <= self.view.bottom and not (p.is_bottom and p.is_bare)

    def create(self, s: Shortcut, p: Particle, origin: Optional[tuple] = None) -> None:
        """Record ``p`` in ``s`` and settle its prefix obligation.

        ``origin`` is ``(shortcut, particle, role)`` when ``p`` arises by
        wrapping that particle under ``role``.
        """
        if s not in self.store:
            raise self.fail(f"creation outside the store at {s.label()}")
        bucket = self.state.created.setdefault(s, set())
        if p in bucket:
            return
        bucket.add(p)
        for v in s.main:
            self.state.held.setdefault(v, set()).add(p)
        entry = {"step": len(self.state.log), "shortcut": s.to_json(), "particle": p.render()}
        self.state.log.append(entry)
        if self.on_step is not None:
            self.on_step(entry)
        if s.prefix and not self.trivially_prefixed(s, p):
            found = self.discharge(s, p, origin)
            if found is None:
                self.deferred.append((s, p, origin))
            elif found != (s, p):
                self.state.prefix_witness[(s, p)] = found
        self.state.active.append((p, s))

    def existing_prefix(self, s: Shortcut, p: Particle) -> Optional[tuple]:
        best = None
        for t in self.store.supports(s):
            for q in self.state.created.get(t, ()):
                if is_prefix(q, p) and (best is None or q.depth > best[1].depth):
                    best = (t, q)
        return best

    def held_prefixes(self, s: Shortcut, p: Particle) -> bool:
        """Every prefix variable already holds some bottom prefix of ``p``."""
        return all(
            v in self.view.bottom or any(is_prefix(q, p) for q in self.state.held.get(v, ()))
            for v in s.prefix
        )

    def discharge(self, s: Shortcut, p: Particle, origin: Optional[tuple]) -> Optional[tuple]:
        found = self.existing_prefix(s, p)
        if found is not None:
            return found
        if self.held_prefixes(s, p):
            return s, p
        if origin is not None:
            parent_s, parent_p, role = origin
            # mirror the prefix carried by the wrapped particle
            inherited = self.state.prefix_witness.get((parent_s, parent_p))
            if inherited is not None:
                carrier, q = inherited
                for t in self.store.resolvers(carrier, role):
                    if t in self.store.supports(s):
                        self.create(t, q.under(role), (carrier, q, role))
                        return t, q.under(role)
        role = p.path[0] if p.path else None
        if role is None:
            return None
        # wrap a bottom particle already created one level up
        for t in self.store.supports(s):
            for u in sorted(self.state.created, key=lambda u: (self.store.stage[u], u.sort_key())):
                if t not in self.store.resolvers(u, role):
                    continue
                for q in sorted(self.state.created.get(u, ()), key=lambda q: -q.depth):
                    if q.is_bottom and is_prefix(q.under(role), p):
                        self.create(t, q.under(role), (u, q, role))
                        return t, q.under(role)
        # otherwise a fresh all role.bot in a support whose variables lack role-children
        owners = self.view.has_child.get(role, frozenset())
        fresh = Particle((role,), BOTTOM.head)
        if not is_prefix(fresh, p):
            return None
        for t in self.store.supports(s):
            if t.main & owners or not t.prefix <= self.view.bottom:
                continue
            self.create(t, fresh, None)
            return t, fresh
        return None

    def drain(self) -> None:
        view, store = self.view, self.store
        while self.state.active:
            self.steps += 1
            if self.steps > self.limit:
                raise self.fail("construction did not terminate")
            p, s = self.state.active.popleft()
            for role in view.decomposition_roles(s.main):
                resolvers = store.resolvers(s, role)
                if not resolvers:
                    raise self.fail(f"no resolver for {s.label()} on {role}")
                self.create(resolvers[0], p.under(role), (s, p, role))

    def run(self) -> dict[str, frozenset]:
        store, view = self.store, self.view
        if view.bottom:
            ini = store.bottom_initial()
            if ini is None:
                raise self.fail("bottom initial shortcut missing")
            self.create(ini, BOTTOM)
        if view.with_constant:
            candidates = store.constant_initials()
            if not candidates:
                raise self.fail("constant initial shortcut missing")
            self.create(candidates[0], Particle((), constant_head(self.ng.constant)))
        self.drain()
        while self.deferred:
            waiting, self.deferred = self.deferred, []
            progress = False
            for s, p, origin in waiting:
                found = self.discharge(s, p, origin)
                if found is None:
                    self.deferred.append((s, p, origin))
                    continue
                if found != (s, p):
                    self.state.prefix_witness[(s, p)] = found
                progress = True
            self.drain()
            if not progress:
                s, p, _ = self.deferred[0]
                raise self.fail(f"no prefix available for {p.render()} at {s.label()}")
        images: dict[str, set] = {v: set() for v in self.ng.guess}
        for s, particles in self.state.created.items():
            for v in s.main:
                images[v].update(particles)
        return {v: reduce(ps) for v, ps in images.items()}


@dataclass
class Construction:
    substitution: dict
    store: ShortcutStore
    log: list


def construct_unifier(ng: NormalizedGoal, store: ShortcutStore,
                      on_step: Optional[Callable] = None) -> Construction:
    """Build a verified witness for ``ng`` from a successful shortcut computation."""
    pruned, _ = prune(store, ng)
    usable = pruned
    needs_bottom = bool(ng.start_bottom)
    if (needs_bottom and pruned.bottom_initial() is None) or (ng.start_constant and not pruned.constant_initials()):
        usable = store
    builder = _Builder(ng, usable, on_step)
    sigma = builder.run()
    problems = normalized_violations(ng, sigma)
    if problems:
        raise builder.fail("constructed substitution fails: " + "; ".join(problems))
    return Construction(sigma, usable, builder.state.log)


def restrict(sigma, names: Iterable[str]) -> dict[str, frozenset]:
    return {v: sigma.get(v, frozenset()) for v in sorted(names)}
