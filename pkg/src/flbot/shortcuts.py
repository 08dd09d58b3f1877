"""Shortcuts over a normalized goal and the decision procedure built on them.

A shortcut ``(main, prefix)`` describes where one particle lives: every
variable in ``main`` holds it, every variable in ``prefix`` holds a bottom
prefix of it.  Resolve edges say how a particle held at decomposition
variables ``X^r`` is wrapped as ``all r.(...)`` at their parents; depend edges
say which shortcut carries the prefixes.

Internally variable sets are bitmasks over the variables that may hold
particles; the public :class:`Shortcut` uses frozensets of names.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

from .normalizer import FlatSubsumption, NormalizedGoal


class Shortcut(NamedTuple):
    main: frozenset
    prefix: frozenset = frozenset()

    @classmethod
    def of(cls, main: Iterable[str], prefix: Iterable[str] = ()) -> "Shortcut":
        return cls(frozenset(main), frozenset(prefix))

    def sort_key(self) -> tuple:
        return (sorted(self.main), sorted(self.prefix))

    def label(self) -> str:
        return f"({{{', '.join(sorted(self.main))}}}, {{{', '.join(sorted(self.prefix))}}})"

    def to_json(self) -> dict:
        return {"main": sorted(self.main), "prefix": sorted(self.prefix)}


def canonical(shortcuts: Iterable[Shortcut]) -> list[Shortcut]:
    return sorted(shortcuts, key=Shortcut.sort_key)


class GoalView:
    """Bitmask encodings of a normalized goal used by the shortcut calculus."""

    def __init__(self, ng: NormalizedGoal):
        self.goal = ng
        self.names = ng.universe()
        self.bit = {v: 1 << i for i, v in enumerate(self.names)}
        self.universe = frozenset(self.names)
        self.universe_mask = (1 << len(self.names)) - 1
        self.bottom = ng.start_bottom
        self.with_constant = ng.start_constant
        self.bottom_mask = self.mask(self.bottom)
        self.flat = sorted(ng.flat, key=lambda f: (f.rhs, sorted(f.lhs)))
        reg = ng.registry
        self.parent = {v: reg.parent(v) for v in self.names if reg.is_decomposition(v)}
        self.role = {v: reg.role(v) for v in self.parent}
        triples = reg.triples()
        self.roles = sorted({r for _p, r, _c in triples})
        # variables whose r-decomposition is defined, whatever its guess
        self.has_child = {r: frozenset(p for p, rr, _c in triples if rr == r) for r in self.roles}
        self.owner_mask = {r: self.mask(self.has_child[r] & self.universe) for r in self.roles}
        self.child_mask = {r: self.mask(v for v in self.parent if self.role[v] == r) for r in self.roles}
        self.decomposition_mask = self.mask(self.parent)
        self.parent_bit = {self.bit[v]: self.bit.get(self.parent[v], 0) for v in self.parent}

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for v in names:
            m |= self.bit.get(v, 0)
        return m

    def names_of(self, m: int) -> frozenset:
        return frozenset(v for v in self.names if m & self.bit[v])

    def shortcut(self, m: int, p: int) -> Shortcut:
        return Shortcut(self.names_of(m), self.names_of(p))

    def masks(self, s: Shortcut) -> tuple[int, int]:
        return self.mask(s.main), self.mask(s.prefix)

    def lift(self, m: int, role: str) -> int:
        """Parents of the ``role``-decomposition variables in ``m``."""
        out = 0
        rest = m & self.child_mask[role]
        while rest:
            low = rest & -rest
            out |= self.parent_bit[low]
            rest ^= low
        return out

    def needed_roles(self, m: int) -> list[str]:
        return [r for r in self.roles if m & self.child_mask[r]]

    def decomposition_roles(self, names: Iterable[str]) -> list[str]:
        return self.needed_roles(self.mask(names))

    def resolver_key(self, m: int, p: int, role: str) -> tuple[int, int]:
        """What any resolver for ``role`` must look like on variables with ``role``-children."""
        return self.lift(m, role), self.lift(p, role)

    def key_of(self, m: int, p: int, role: str) -> tuple[int, int]:
        owners = self.owner_mask[role]
        return m & owners, p & owners


def _view(ng) -> GoalView:
    return ng if isinstance(ng, GoalView) else GoalView(ng)


def satisfies_flat(s: Shortcut, f: FlatSubsumption) -> bool:
    if f.rhs in s.main and not any(y in s.main or y in s.prefix for y in f.lhs):
        return False
    if f.rhs in s.prefix and not any(y in s.prefix for y in f.lhs):
        return False
    return True


def _bottom_ok(view: GoalView, m: int, p: int) -> bool:
    if m & view.bottom_mask:
        return not (m & ~view.bottom_mask) and not p
    return True


def is_shortcut(s: Shortcut, ng) -> bool:
    view = _view(ng)
    if not s.main or s.main & s.prefix:
        return False
    if not (s.main | s.prefix) <= view.universe:
        return False
    if not _bottom_ok(view, *view.masks(s)):
        return False
    return all(satisfies_flat(s, f) for f in view.flat)


def _resolves_masks(view: GoalView, m1: int, p1: int, m2: int, p2: int, role: str) -> bool:
    if role not in view.child_mask or not m1 & view.child_mask[role]:
        return False
    if view.key_of(m2, p2, role) != view.resolver_key(m1, p1, role):
        return False
    if not m1 & ~view.bottom_mask and p2 & ~view.bottom_mask:
        return False
    return True


def resolves(s1: Shortcut, s2: Shortcut, role: str, ng) -> bool:
    """Whether ``s1`` is resolved by ``s2`` with respect to ``role``."""
    view = _view(ng)
    return _resolves_masks(view, *view.masks(s1), *view.masks(s2), role)


def depends_on(s1: Shortcut, s2: Shortcut) -> bool:
    return s1.prefix == s2.main | s2.prefix


def height_zero(s: Shortcut, ng) -> bool:
    view = _view(ng)
    return not view.mask(s.main) & view.decomposition_mask


class ShortcutStore:
    """Computed shortcuts with their stages; edges are answered from key indexes."""

    def __init__(self, view: Optional[GoalView] = None):
        self.view = view
        self.shortcuts: set = set()
        self.stage: dict = {}
        self._masks: dict = {}
        self._by_key: dict = {}  # role -> resolver key -> shortcuts, in admission order
        self._by_cover: dict = {}  # main | prefix -> shortcuts
        self.ini_bottom = view.bottom if view is not None else frozenset()
        self.ini_constant = view.with_constant if view is not None else frozenset()

    def _add(self, s: Shortcut, m: int, p: int, stage: int) -> None:
        self.shortcuts.add(s)
        self.stage[s] = stage
        self._masks[s] = (m, p)
        for r in self.view.roles:
            self._by_key.setdefault(r, {}).setdefault(self.view.key_of(m, p, r), []).append(s)
        self._by_cover.setdefault(s.main | s.prefix, []).append(s)

    def __contains__(self, s) -> bool:
        return s in self.shortcuts

    def __len__(self) -> int:
        return len(self.shortcuts)

    def __iter__(self):
        return iter(self.ordered())

    def ordered(self) -> list[Shortcut]:
        return sorted(self.shortcuts, key=lambda s: (self.stage[s], s.sort_key()))

    def restricted(self, keep: Iterable[Shortcut]) -> "ShortcutStore":
        other = object.__new__(ShortcutStore)
        other.__dict__.update({k: v for k, v in self.__dict__.items() if k not in ("resolve", "depend")})
        other.shortcuts = set(keep) & self.shortcuts
        return other

    def needed_roles(self, s: Shortcut) -> list[str]:
        return self.view.needed_roles(self._masks[s][0])

    def resolvers(self, s: Shortcut, role: str) -> list[Shortcut]:
        """Stored shortcuts of strictly smaller stage resolving ``s`` for ``role``."""
        view = self.view
        m, p = self._masks[s]
        if role not in view.child_mask or not m & view.child_mask[role]:
            return []
        bottom_main = not m & ~view.bottom_mask
        level = self.stage[s]
        found = [
            t for t in self._by_key.get(role, {}).get(view.resolver_key(m, p, role), ())
            if t in self.shortcuts and self.stage[t] < level
            and not (bottom_main and self._masks[t][1] & ~view.bottom_mask)
        ]
        return sorted(found, key=lambda t: (self.stage[t], t.sort_key()))

    def supports(self, s: Shortcut) -> list[Shortcut]:
        if not s.prefix:
            return []
        found = [t for t in self._by_cover.get(s.prefix, ()) if t in self.shortcuts]
        return sorted(found, key=lambda t: (self.stage[t], t.sort_key()))

    @cached_property
    def resolve(self) -> frozenset:
        return frozenset(
            (s, r, t) for s in self.shortcuts for r in self.needed_roles(s) for t in self.resolvers(s, r)
        )

    @cached_property
    def depend(self) -> frozenset:
        return frozenset((s, t) for s in self.shortcuts for t in self.supports(s))

    def bottom_initial(self) -> Optional[Shortcut]:
        if not self.ini_bottom:
            return None
        s = Shortcut(self.ini_bottom, frozenset())
        return s if s in self.shortcuts else None

    def constant_initials(self) -> list[Shortcut]:
        if not self.ini_constant:
            return []
        found = [s for s in self._by_cover_main(self.ini_constant) if s.prefix <= self.ini_bottom]
        return sorted(found, key=lambda t: (len(t.prefix), self.stage[t], t.sort_key()))

    def _by_cover_main(self, main: frozenset) -> list[Shortcut]:
        return [s for s in self.shortcuts if s.main == main]

    def to_json(self) -> dict:
        order = self.ordered()
        index = {s: i for i, s in enumerate(order)}
        return {
            "shortcuts": [dict(s.to_json(), stage=self.stage[s]) for s in order],
            "resolve": sorted([index[a], r, index[b]] for a, r, b in self.resolve),
            "depend": sorted([index[a], index[b]] for a, b in self.depend),
        }

    def to_dot(self) -> str:
        order = self.ordered()
        index = {s: i for i, s in enumerate(order)}
        lines = ["digraph shortcuts {"]
        for s in order:
            lines.append(f'  n{index[s]} [label="{s.label()}\\nstage {self.stage[s]}"];')
        for a, r, b in sorted(self.resolve, key=lambda e: (index[e[0]], e[1], index[e[2]])):
            lines.append(f'  n{index[a]} -> n{index[b]} [label="{r}"];')
        for a, b in sorted(self.depend, key=lambda e: (index[e[0]], index[e[1]])):
            lines.append(f"  n{index[a]} -> n{index[b]} [style=dotted];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _enumerate_masks(view: GoalView) -> list[tuple[int, int]]:
    n = len(view.names)
    position = {v: i for i, v in enumerate(view.names)}
    checks: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for f in view.flat:
        last = max(position[v] for v in (*f.lhs, f.rhs))
        checks[last].append((view.bit[f.rhs], view.mask(f.lhs)))
    bottom = view.bottom_mask
    found: list[tuple[int, int]] = []

    def place(i: int, m: int, p: int) -> None:
        if i == n:
            if m and _bottom_ok(view, m, p):
                found.append((m, p))
            return
        b = 1 << i
        for m2, p2 in ((m, p), (m | b, p), (m, p | b)):
            if m2 & bottom and (m2 & ~bottom or p2):
                continue
            for rhs, lhs in checks[i]:
                if m2 & rhs and not lhs & (m2 | p2):
                    break
                if p2 & rhs and not lhs & p2:
                    break
            else:
                place(i + 1, m2, p2)

    place(0, 0, 0)
    return found


def enumerate_shortcuts(ng) -> list[Shortcut]:
    """Every pair passing the shortcut conditions, in canonical order."""
    view = _view(ng)
    return canonical(view.shortcut(m, p) for m, p in _enumerate_masks(view))


def _initials_possible(view: GoalView, pairs: list[tuple[int, int]]) -> bool:
    """Whether the enumerated pairs include candidates for both initial shortcuts."""
    bottom = view.bottom_mask
    if bottom and (bottom, 0) not in pairs:
        return False
    if view.with_constant:
        wanted = view.mask(view.with_constant)
        return any(m == wanted and not p & ~bottom for m, p in pairs)
    return True


def all_shortcuts(ng, pairs: Optional[list] = None) -> ShortcutStore:
    view = _view(ng)
    store = ShortcutStore(view)
    index: dict[str, dict[tuple, list]] = {r: {} for r in view.roles}  # admitted so far, as masks
    waiting = []
    admitted_any = False
    if pairs is None:
        pairs = _enumerate_masks(view)
    for m, p in sorted(pairs):
        needs = view.needed_roles(m)
        if not needs:
            store._add(view.shortcut(m, p), m, p, 0)
            for r in view.roles:
                index[r].setdefault(view.key_of(m, p, r), []).append(p)
            admitted_any = True
        else:
            bottom_main = not m & ~view.bottom_mask
            waiting.append((m, p, [(r, view.resolver_key(m, p, r)) for r in needs], bottom_main))
    if not admitted_any:
        return ShortcutStore(view)
    stage = 0
    while waiting:
        stage += 1
        admitted = []
        still = []
        for item in waiting:
            m, p, keys, bottom_main = item
            for r, key in keys:
                prefixes = index[r].get(key)
                if not prefixes:
                    break
                if bottom_main and all(q & ~view.bottom_mask for q in prefixes):
                    break
            else:
                admitted.append((m, p))
                continue
            still.append(item)
        if not admitted:
            break
        for m, p in admitted:
            store._add(view.shortcut(m, p), m, p, stage)
            for r in view.roles:
                index[r].setdefault(view.key_of(m, p, r), []).append(p)
        waiting = still
    return store


def check_existence(store: ShortcutStore) -> ShortcutStore:
    return store.restricted(s for s in store.shortcuts if not s.prefix or store.supports(s))


def check_validity(store: ShortcutStore, ng=None) -> ShortcutStore:
    resolvable = {
        s for s in store.shortcuts if all(store.resolvers(s, r) for r in store.needed_roles(s))
    }
    # reachability of height 0; resolvers always have a smaller stage
    reach: set = set()
    for s in store.ordered():
        roles = store.needed_roles(s)
        if not roles or any(t in reach for r in roles for t in store.resolvers(s, r)):
            reach.add(s)
    return store.restricted(resolvable & reach)


def prune(store: ShortcutStore, ng=None) -> tuple[ShortcutStore, int]:
    """Alternate the two sweeps until nothing changes; returns the store and the pass count."""
    passes = 0
    while True:
        passes += 1
        smaller = check_validity(check_existence(store))
        if len(smaller) == len(store):
            return smaller, passes
        store = smaller


@dataclass
class MainResult:
    success: bool
    store: ShortcutStore
    case: str
    passes: int = 0


def main_decision(ng: NormalizedGoal) -> MainResult:
    view = GoalView(ng)
    case = "FL0" if not view.bottom else ("pure" if not view.with_constant else "full")
    if view.bottom and not is_shortcut(Shortcut(view.bottom, frozenset()), view):
        # the bottom initial shortcut can never be computed
        return MainResult(False, ShortcutStore(view), case)
    pairs = _enumerate_masks(view)
    if not _initials_possible(view, set(pairs)):
        return MainResult(False, ShortcutStore(view), case)
    store = all_shortcuts(view, pairs)
    if case == "FL0":
        return MainResult(bool(store.constant_initials()), store, case)

    def initials_present(st: ShortcutStore) -> bool:
        if st.bottom_initial() is None:
            return False
        return case == "pure" or bool(st.constant_initials())

    if not initials_present(store):
        return MainResult(False, store, case)
    pruned, passes = prune(store)
    return MainResult(initials_present(pruned), pruned, case, passes)
