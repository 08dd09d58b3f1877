"""Deciding unifiability of a goal and producing a verified witness."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from .builder import construct_unifier, restrict
from .errors import EngineDefect
from .goals import Goal, merge_substitutions, split_by_constant, verify_unifier
from .normalizer import Failure, NormalizedGoal, Solved, explore
from .shortcuts import ShortcutStore, main_decision


@dataclass
class SubgoalReport:
    constant: Optional[str]
    unifiable: bool
    branches: int = 0
    case: Optional[str] = None
    guess: Optional[dict] = None
    normalized: Optional[NormalizedGoal] = None
    store: Optional[ShortcutStore] = None
    witness: Optional[dict] = None
    full_substitution: Optional[dict] = None  # including decomposition variables
    construction_log: list = field(default_factory=list)
    defects: list = field(default_factory=list)


@dataclass
class UnificationResult:
    unifiable: bool
    witness: Optional[dict]
    subgoals: list

    def diagnostics(self) -> dict:
        out = {"subgoals": []}
        for rep in self.subgoals:
            entry = {
                "constant": rep.constant,
                "unifiable": rep.unifiable,
                "branches": rep.branches,
            }
            if rep.case is not None:
                entry["case"] = rep.case
            if rep.guess is not None:
                entry["guess"] = {v: c.label() for v, c in sorted(rep.guess.items())}
            if rep.defects:
                entry["defects"] = [str(d) for d in rep.defects]
            out["subgoals"].append(entry)
        return out


def _solve_subgoal(goal: Goal, max_branches: Optional[int],
                   on_step: Optional[Callable]) -> SubgoalReport:
    constant = next(iter(goal.constants)) if goal.constants else None
    report = SubgoalReport(constant, False)
    for branch in explore(goal, max_branches):
        report.branches += 1
        outcome = branch.outcome
        if isinstance(outcome, Failure):
            continue
        if isinstance(outcome, Solved):
            sigma, case, log, store = outcome.substitution, "trivial", [], None
        elif isinstance(outcome, NormalizedGoal):
            if not outcome.start_bottom and not outcome.start_constant:
                sigma, case, log, store = {}, "all-top", [], None
            else:
                decision = main_decision(outcome)
                report.store = decision.store
                if not decision.success:
                    continue
                case = decision.case
                try:
                    built = construct_unifier(outcome, decision.store, on_step)
                except EngineDefect as defect:
                    # the verdict stands; keep looking for a branch we can build
                    report.unifiable = True
                    report.case = case
                    report.defects.append(defect)
                    continue
                sigma, log, store = built.substitution, built.log, built.store
        else:
            raise TypeError(f"unexpected outcome {outcome!r}")
        witness = restrict(sigma, goal.variables)
        if not verify_unifier(goal, witness):
            report.unifiable = True
            report.defects.append(EngineDefect("witness fails the original subgoal",
                                               {"guess": {v: c.label() for v, c in branch.guess.items()}}))
            continue
        report.unifiable = True
        report.case = case
        report.guess = branch.guess
        report.normalized = outcome.goal if isinstance(outcome, Solved) else outcome
        report.store = store if store is not None else report.store
        report.witness = witness
        report.full_substitution = sigma
        report.construction_log = log
        report.defects = []
        return report
    return report


def decide_unification(goal: Goal, max_branches: Optional[int] = None,
                       on_step: Optional[Callable] = None) -> UnificationResult:
    reports = []
    for sub in split_by_constant(goal):
        report = _solve_subgoal(sub, max_branches, on_step)
        reports.append(report)
        if not report.unifiable:
            return UnificationResult(False, None, reports)
    if any(r.witness is None for r in reports):
        return UnificationResult(True, None, reports)
    witness = merge_substitutions(r.witness for r in reports)
    witness = restrict(witness, goal.variables)
    if not verify_unifier(goal, witness):
        raise EngineDefect("merged witness fails the goal")
    return UnificationResult(True, witness, reports)
