"""Exact linear programming: rational phase-1 simplex and distance-distribution bounds."""

from .bound import (
    DnkTable,
    LpSequence,
    LpVerdict,
    dnk_bound,
    krawtchouk,
    lemma2_bound,
    lp_feasible,
    search_upper_bound,
)
from .simplex import Constraint, Phase1Result, SimplexError, phase1

__all__ = [
    "Constraint",
    "DnkTable",
    "LpSequence",
    "LpVerdict",
    "Phase1Result",
    "SimplexError",
    "dnk_bound",
    "krawtchouk",
    "lemma2_bound",
    "lp_feasible",
    "phase1",
    "search_upper_bound",
]
