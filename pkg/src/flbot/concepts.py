"""Concepts as sets of particles: parsing, normal form, reduction and subsumption.

A particle ``all v.A`` is stored as a role-string tuple plus a head.  A concept
in normal form is a ``frozenset`` of particles; the empty set stands for top.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, NamedTuple, Optional, Union


class ParseError(ValueError):
    """Malformed concept, goal or substitution text."""

    def __init__(self, message: str, position: Optional[int] = None, line: Optional[int] = None):
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"column {position + 1}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class UndeclaredIdentifier(ParseError):
    pass


class HeadKind(IntEnum):
    TOP = 0
    BOT = 1
    CONST = 2
    VAR = 3


class Head(NamedTuple):
    kind: HeadKind
    name: str = ""

    def render(self) -> str:
        if self.kind is HeadKind.TOP:
            return "top"
        if self.kind is HeadKind.BOT:
            return "bot"
        return self.name


TOP_HEAD = Head(HeadKind.TOP)
BOT_HEAD = Head(HeadKind.BOT)


def constant(name: str) -> Head:
    return Head(HeadKind.CONST, name)


def variable(name: str) -> Head:
    return Head(HeadKind.VAR, name)


class Particle(NamedTuple):
    """``all path.head``; tuple order gives the canonical (path, kind, name) ordering."""

    path: tuple[str, ...]
    head: Head

    @property
    def depth(self) -> int:
        return len(self.path)

    @property
    def is_bottom(self) -> bool:
        return self.head.kind is HeadKind.BOT

    @property
    def is_top(self) -> bool:
        return self.head.kind is HeadKind.TOP

    @property
    def is_constant(self) -> bool:
        return self.head.kind is HeadKind.CONST

    @property
    def is_variable(self) -> bool:
        return self.head.kind is HeadKind.VAR

    @property
    def is_bare(self) -> bool:
        return not self.path

    def under(self, *roles: str) -> "Particle":
        """The particle wrapped in value restrictions over ``roles``."""
        return Particle(tuple(roles) + self.path, self.head)

    def render(self) -> str:
        return "".join(f"all {r}." for r in self.path) + self.head.render()


BOTTOM = Particle((), BOT_HEAD)

ParticleSet = frozenset  # frozenset[Particle]; empty means top


def particle(text: str, variables: Iterable[str] = ()) -> Particle:
    """Parse a single particle such as ``"all r.all s.A"``."""
    parts = normalize(parse_concept(text, Alphabet(variables=frozenset(variables))), keep_variables=True)
    if len(parts) != 1:
        raise ValueError(f"{text!r} is not a single particle")
    return next(iter(parts))


# --- abstract syntax -------------------------------------------------------


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class Name:
    name: str
    is_variable: bool = False


@dataclass(frozen=True)
class And:
    items: tuple["ConceptAst", ...]


@dataclass(frozen=True)
class All:
    role: str
    child: "ConceptAst"


ConceptAst = Union[Top, Bot, Name, And, All]


@dataclass(frozen=True)
class Alphabet:
    """Identifiers a parser may accept.

    ``constants`` or ``roles`` left as ``None`` are open: any identifier that is
    not a variable is taken to be a constant, and any role is accepted.
    """

    variables: frozenset = frozenset()
    constants: Optional[frozenset] = None
    roles: Optional[frozenset] = None


_KEYWORDS = {"top", "bot", "all", "and"}
_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<punct>[().])|(?P<bad>\S))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos and not m.group(0):
            break
        if m.group("bad") is not None:
            raise ParseError(f"unexpected character {m.group('bad')!r}", m.start("bad"))
        if m.group("ident") is not None:
            word = m.group("ident")
            kind = word if word in _KEYWORDS else "ident"
            tokens.append((kind, word, m.start("ident")))
        elif m.group("punct") is not None:
            tokens.append((m.group("punct"), m.group("punct"), m.start("punct")))
        else:
            break
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.tokens = _tokenize(text)
        self.i = 0
        self.alphabet = alphabet

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self, kind: str) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != kind:
            found = "end of input" if tok[0] == "end" else repr(tok[1])
            raise ParseError(f"expected {kind}, found {found}", tok[2])
        self.i += 1
        return tok

    def concept(self) -> ConceptAst:
        items = [self.atom()]
        while self.peek()[0] == "and":
            self.i += 1
            items.append(self.atom())
        return items[0] if len(items) == 1 else And(tuple(items))

    def atom(self) -> ConceptAst:
        kind, word, pos = self.peek()
        if kind == "top":
            self.i += 1
            return Top()
        if kind == "bot":
            self.i += 1
            return Bot()
        if kind == "ident":
            self.i += 1
            return self.name(word, pos)
        if kind == "all":
            self.i += 1
            _, role, rpos = self.take("ident")
            roles = self.alphabet.roles
            if roles is not None and role not in roles:
                raise UndeclaredIdentifier(f"undeclared role {role!r}", rpos)
            self.take(".")
            return All(role, self.atom())
        if kind == "(":
            self.i += 1
            inner = self.concept()
            self.take(")")
            return inner
        found = "end of input" if kind == "end" else repr(word)
        raise ParseError(f"expected a concept, found {found}", pos)

    def name(self, word: str, pos: int) -> Name:
        if word in self.alphabet.variables:
            return Name(word, is_variable=True)
        constants = self.alphabet.constants
        if constants is not None and word not in constants:
            raise UndeclaredIdentifier(f"undeclared concept name {word!r}", pos)
        return Name(word)


def parse_concept(text: str, alphabet: Alphabet = Alphabet()) -> ConceptAst:
    parser = _Parser(text, alphabet)
    ast = parser.concept()
    parser.take("end")
    return ast


# --- normal form -----------------------------------------------------------


def _particles(ast: ConceptAst, path: tuple[str, ...], out: set) -> None:
    if isinstance(ast, Top):
        out.add(Particle(path, TOP_HEAD))
    elif isinstance(ast, Bot):
        out.add(Particle(path, BOT_HEAD))
    elif isinstance(ast, Name):
        out.add(Particle(path, variable(ast.name) if ast.is_variable else constant(ast.name)))
    elif isinstance(ast, And):
        for item in ast.items:
            _particles(item, path, out)
    elif isinstance(ast, All):
        _particles(ast.child, path + (ast.role,), out)
    else:
        raise TypeError(f"not a concept: {ast!r}")


def normalize(ast: ConceptAst, keep_variables: bool = True) -> frozenset:
    """Reduced particle-set form of a concept."""
    out: set = set()
    _particles(ast, (), out)
    if not keep_variables and any(p.is_variable for p in out):
        raise ValueError("concept contains variables")
    return reduce(out)


def reduce(particles: Iterable[Particle]) -> frozenset:
    """Drop top particles and everything lying under a bottom particle."""
    kept = [p for p in particles if not p.is_top]
    bottoms = {p.path for p in kept if p.is_bottom}
    if not bottoms:
        return frozenset(kept)
    if () in bottoms:
        return frozenset([BOTTOM])
    result = []
    for p in kept:
        # a proper ancestor path (or the same path for non-bottom heads) absorbs p
        limit = len(p.path) if p.is_bottom else len(p.path) + 1
        if any(p.path[:k] in bottoms for k in range(limit)):
            continue
        result.append(p)
    return frozenset(result)


def is_prefix(p: Particle, q: Particle) -> bool:
    """Whether bottom particle ``p`` is a prefix of ``q``."""
    if not p.is_bottom:
        return False
    n = len(p.path)
    if q.path[:n] != p.path:
        return False
    if q.is_bottom:
        return len(q.path) > n
    return q.is_constant


def _has_bottom_at_or_above(c: frozenset, path: tuple[str, ...]) -> bool:
    return any(Particle(path[:k], BOT_HEAD) in c for k in range(len(path) + 1))


def subsumes(c: Iterable[Particle], d: Iterable[Particle]) -> bool:
    """Decide ``c`` ⊑ ``d`` for ground particle sets."""
    c = frozenset(c)
    for p in c:
        if p.is_variable:
            raise ValueError("subsumes requires ground concepts")
    for q in d:
        if q.is_variable:
            raise ValueError("subsumes requires ground concepts")
        if q.is_top or q in c:
            continue
        if (q.is_constant or q.is_bottom) and _has_bottom_at_or_above(c, q.path):
            continue
        return False
    return True


def equivalent(c: Iterable[Particle], d: Iterable[Particle]) -> bool:
    c, d = frozenset(c), frozenset(d)
    return subsumes(c, d) and subsumes(d, c)


def conjoin(*sets: Iterable[Particle]) -> frozenset:
    out: set = set()
    for s in sets:
        out.update(s)
    return reduce(out)


def wrap(role_path: Iterable[str], s: Iterable[Particle]) -> frozenset:
    """``all role_path.(s)`` as a particle set."""
    prefix = tuple(role_path)
    return frozenset(Particle(prefix + p.path, p.head) for p in s)


def sorted_particles(s: Iterable[Particle]) -> list[Particle]:
    return sorted(s)


def render(s: Iterable[Particle]) -> str:
    items = sorted(s)
    if not items:
        return "top"
    return " and ".join(p.render() for p in items)


def parse_set(text: str, variables: Iterable[str] = ()) -> frozenset:
    """Parse and normalize a concept in one go."""
    return normalize(parse_concept(text, Alphabet(variables=frozenset(variables))))


def max_depth(s: Iterable[Particle]) -> int:
    return max((p.depth for p in s), default=0)
