"""Typedness: a 0..1000 penalty over the leaf types of a program's annotations.

Lower is better. A missing annotation counts as one ``any`` leaf.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from tau.lang import ast as A
from tau.lang.sites import find_annotation_sites
from tau.typesys.texpr import ANY, NULL, UNDEFINED, UNKNOWN, FunctionTop, TypeExpr, leaves

MISSING = None

LEAF_SCORES = {UNKNOWN: 1.0, ANY: 0.5, UNDEFINED: 0.2, NULL: 0.2}


def score_leaf(t: Optional[TypeExpr]) -> float:
    if t is MISSING:
        return 0.5
    if isinstance(t, FunctionTop):
        return 0.5
    return LEAF_SCORES.get(t, 0.0)


@dataclass(frozen=True)
class TypednessReport:
    leaf_count: int
    penalty_sum: float
    score: float

    def to_dict(self, rounded: bool = True) -> dict:
        d = asdict(self)
        if rounded:
            d["score"] = round(self.score, 1)
        return d


def score_types(annotations: Iterable[Optional[TypeExpr]]) -> TypednessReport:
    """Score a sequence of site annotations (``None`` for a missing one)."""
    count = 0
    total = 0.0
    for t in annotations:
        for leaf in [MISSING] if t is MISSING else leaves(t):
            count += 1
            total += score_leaf(leaf)
    score = 1000.0 * total / count if count else 0.0
    return TypednessReport(count, total, score)


def score_program(program: A.Program, skip_kinds: tuple[str, ...] = ()) -> TypednessReport:
    """``skip_kinds`` sites are scored as missing whatever they hold."""
    sites = find_annotation_sites(program)
    return score_types(MISSING if s.site_kind in skip_kinds else s.type for s in sites)
