"""Unification of concept patterns with value restrictions, top and bottom."""

from .builder import build_trivial_unifier, check_decreasing_rule, construct_unifier
from .concepts import (
    BOTTOM,
    Alphabet,
    Particle,
    is_prefix,
    normalize,
    parse_concept,
    parse_set,
    reduce,
    render,
    subsumes,
)
from .decide import UnificationResult, decide_unification
from .errors import EngineDefect, ParseError, ResourceLimitError, UndeclaredIdentifier
from .goals import (
    Goal,
    GoalSubsumption,
    apply_substitution,
    merge_substitutions,
    parse_goal,
    parse_substitution,
    render_substitution,
    split_by_constant,
    verify_unifier,
)
from .normalizer import NormalizedGoal, branch_iterator, normalize_goal
from .oracle import OracleBounds, brute_force_unifiable, enumerate_images
from .shortcuts import Shortcut, all_shortcuts, main_decision

__version__ = "0.1.0"
