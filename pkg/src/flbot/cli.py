"""Command-line front end: ``check``, ``unify``, ``verify`` and ``oracle``.

Exit codes: 0 positive verdict, 1 negative verdict, 2 bad input or usage,
3 resource cap hit, 4 internal defect.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .builder import decreasing_violations
from .concepts import normalize, parse_concept, render, subsumes
from .decide import decide_unification
from .errors import EngineDefect, ParseError, ResourceLimitError
from .goals import failing_subsumptions, parse_goal, parse_substitution, render_substitution, verify_unifier
from .normalizer import DecompositionRegistry
from .oracle import OracleBounds, brute_force_unifiable

EXIT_YES, EXIT_NO, EXIT_USAGE, EXIT_LIMIT, EXIT_DEFECT = 0, 1, 2, 3, 4
SCHEMA = 1


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as err:
        raise UsageError(f"cannot read {path}: {err.strerror or err}") from err


def _write(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as err:
        raise UsageError(f"cannot write {path}: {err.strerror or err}") from err


def _witness_json(sigma) -> dict:
    return {v: render(sigma[v]) for v in sorted(sigma)}


def _emit_json(result: bool, witness=None, diagnostics=None) -> None:
    out: dict = {"schema": SCHEMA, "result": result}
    if witness is not None:
        out["witness"] = _witness_json(witness)
    if diagnostics is not None:
        out["diagnostics"] = diagnostics
    sys.stdout.write(json.dumps(out, sort_keys=True) + "\n")


def _subsumption_line(text: str) -> str:
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            return line
    raise UsageError("no subsumption given")


def cmd_check(args) -> int:
    source = args.subsumption
    text = _read(source) if source == "-" or Path(source).is_file() else source
    line = _subsumption_line(text)
    if "<=" not in line:
        raise UsageError("expected '<concept> <= <concept>'")
    left, right = line.split("<=", 1)
    lhs = normalize(parse_concept(left))
    rhs = normalize(parse_concept(right))
    if any(p.is_variable for p in lhs | rhs):
        raise UsageError("check only accepts ground concepts")
    verdict = subsumes(lhs, rhs)
    if args.json:
        _emit_json(verdict, diagnostics={"lhs": render(lhs), "rhs": render(rhs)})
    else:
        print("SUBSUMED" if verdict else "NOT_SUBSUMED")
    return EXIT_YES if verdict else EXIT_NO


def _dump_targets(path: str, tag: Optional[str]) -> list[tuple[Path, str]]:
    p = Path(path)
    if tag is not None:
        p = p.with_name(f"{p.stem}-{tag}{p.suffix}")
    if p.suffix == ".dot":
        return [(p, "dot")]
    if p.suffix == ".json":
        return [(p, "json")]
    return [(p.with_name(p.name + ".dot"), "dot"), (p.with_name(p.name + ".json"), "json")]


def cmd_unify(args) -> int:
    goal = parse_goal(_read(args.goal))
    trace_lines: list[str] = []
    on_step = None
    if args.trace_construction:
        def on_step(entry: dict) -> None:
            trace_lines.append(json.dumps(entry, sort_keys=True))
    result = decide_unification(goal, max_branches=args.max_branches, on_step=on_step)
    if args.trace_construction:
        _write(args.trace_construction, "".join(line + "\n" for line in trace_lines))
    if args.dump_shortcuts:
        stores = [(rep.constant, rep.store) for rep in result.subgoals if rep.store is not None]
        for constant, store in stores:
            tag = (constant or "none") if len(stores) > 1 else None
            for target, kind in _dump_targets(args.dump_shortcuts, tag):
                body = store.to_dot() if kind == "dot" else json.dumps(store.to_json(), sort_keys=True) + "\n"
                _write(str(target), body)
    if result.unifiable and result.witness is None:
        defects = [str(d) for rep in result.subgoals for d in rep.defects]
        raise EngineDefect("unifiable but no witness could be built", {"defects": defects})
    if args.emit and result.witness is not None:
        _write(args.emit, render_substitution(result.witness))
    if args.json:
        _emit_json(result.unifiable, result.witness, result.diagnostics())
    else:
        stream = sys.stderr if args.emit == "-" else sys.stdout
        print("UNIFIABLE" if result.unifiable else "NOT_UNIFIABLE", file=stream)
    return EXIT_YES if result.unifiable else EXIT_NO


def cmd_verify(args) -> int:
    goal = parse_goal(_read(args.goal))
    sigma = parse_substitution(_read(args.substitution))
    if any(p.is_variable for image in sigma.values() for p in image):
        raise UsageError("substitution images must be ground")
    problems = [f"fails: {s.render()}" for s in failing_subsumptions(goal, sigma)]
    if args.registry:
        try:
            registry = DecompositionRegistry.from_json(json.loads(_read(args.registry)))
        except (ValueError, KeyError, TypeError) as err:
            raise UsageError(f"bad registry file: {err}") from err
        problems += [f"decreasing rule: {parent} holds {p}" for parent, p in decreasing_violations(sigma, registry)]
    verdict = not problems and verify_unifier(goal, sigma)
    if args.json:
        _emit_json(verdict, diagnostics={"problems": problems})
    else:
        print("VALID" if verdict else "INVALID")
        for line in problems:
            print("  " + line)
    return EXIT_YES if verdict else EXIT_NO


def cmd_oracle(args) -> int:
    goal = parse_goal(_read(args.goal))
    try:
        bounds = OracleBounds(args.depth, args.width)
    except ValueError as err:
        raise UsageError(str(err)) from err
    result = brute_force_unifiable(goal, bounds, cap=args.cap)
    diagnostics = {"tried": result.tried, "depth": bounds.max_depth, "width": bounds.max_width}
    if args.json:
        _emit_json(result.found, result.witness, diagnostics)
    elif result.found:
        print("WITNESS")
        sys.stdout.write(render_substitution(result.witness))
    else:
        # a bounded search never refutes
        print("NONE_WITHIN_BOUNDS")
    return EXIT_YES if result.found else EXIT_NO


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flbot", description="Unification of concept patterns with value restrictions and bottom.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    check = sub.add_parser("check", help="decide one ground subsumption")
    check.add_argument("subsumption", help="'<concept> <= <concept>', or a file holding that line")
    check.add_argument("--json", action="store_true")
    check.set_defaults(func=cmd_check)

    unify = sub.add_parser("unify", help="decide unifiability of a goal file")
    unify.add_argument("goal")
    unify.add_argument("--emit", nargs="?", const="-", metavar="PATH",
                       help="write the witness as a substitution file (stdout when no path)")
    unify.add_argument("--json", action="store_true")
    unify.add_argument("--dump-shortcuts", metavar="PATH", help="write the shortcut store as DOT and/or JSON")
    unify.add_argument("--trace-construction", metavar="PATH", help="write the construction log as JSON lines")
    unify.add_argument("--max-branches", type=int, default=None)
    unify.set_defaults(func=cmd_unify)

    verify = sub.add_parser("verify", help="check a substitution against a goal")
    verify.add_argument("goal")
    verify.add_argument("substitution")
    verify.add_argument("--registry", metavar="PATH", help="decomposition registry JSON for the decreasing rule")
    verify.add_argument("--json", action="store_true")
    verify.set_defaults(func=cmd_verify)

    oracle = sub.add_parser("oracle", help="bounded brute-force search for a unifier")
    oracle.add_argument("goal")
    oracle.add_argument("--depth", type=int, default=2)
    oracle.add_argument("--width", type=int, default=2)
    oracle.add_argument("--cap", type=int, default=5_000_000, help="maximum assignments tried")
    oracle.add_argument("--json", action="store_true")
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (UsageError, ParseError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimitError as err:
        print(f"resource limit: {err}", file=sys.stderr)
        return EXIT_LIMIT
    except EngineDefect as err:
        print(f"internal defect: {err}", file=sys.stderr)
        return EXIT_DEFECT


if __name__ == "__main__":
    sys.exit(main())
