"""Choosing which combinations of child candidates to expand."""

from __future__ import annotations

import heapq
import itertools
import math
from typing import Optional, Sequence

import numpy as np

from tau.search.config import SearchConfig


def poisson_log_weights(n: int, lam: float) -> np.ndarray:
    """``log(e^-lam lam^k / k!)`` for ``k = 0 .. n-1``."""
    k = np.arange(n, dtype=float)
    lgam = np.array([math.lgamma(x + 1.0) for x in range(n)])
    return -lam + k * math.log(lam) - lgam


def sample_ranks(n: int, k: int, lam: float, rng: np.random.Generator) -> list[int]:
    """``k`` distinct ranks out of ``n``, drawn without replacement with
    probability proportional to the Poisson weight of the rank.

    Uses the Gumbel top-k trick, which is equivalent to drawing one rank at a
    time and renormalizing. Returned in ascending rank order.
    """
    if k >= n:
        return list(range(n))
    keys = poisson_log_weights(n, lam) + rng.gumbel(size=n)
    top = np.argpartition(-keys, k - 1)[:k]
    return sorted(int(i) for i in top)


def _score(c) -> float:
    t = getattr(c, "typedness", None)
    if t is not None:
        return t.score
    return float(getattr(c, "score", c))


def ranked_combinations(scores: Sequence[Sequence[float]], limit: int) -> list[tuple[int, ...]]:
    """The ``limit`` combinations with lowest summed score, in ascending order.

    Ties break on the index tuple so the order is total.
    """
    orders = [sorted(range(len(s)), key=lambda i, s=s: (s[i], i)) for s in scores]
    sorted_scores = [[s[i] for i in o] for s, o in zip(scores, orders)]

    def real(pos):
        return tuple(o[p] for o, p in zip(orders, pos))

    start = (0,) * len(scores)
    heap = [(sum(s[0] for s in sorted_scores), real(start), start)]
    seen = {start}
    out = []
    while heap and len(out) < limit:
        total, idx, pos = heapq.heappop(heap)
        out.append(idx)
        for j in range(len(pos)):
            if pos[j] + 1 < len(sorted_scores[j]):
                nxt = pos[:j] + (pos[j] + 1,) + pos[j + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    t = total - sorted_scores[j][pos[j]] + sorted_scores[j][pos[j] + 1]
                    heapq.heappush(heap, (t, real(nxt), nxt))
    return out


TAIL = 200


def combine_children(children: Sequence[Sequence], cfg: SearchConfig,
                     rng: Optional[np.random.Generator] = None) -> list[tuple[int, ...]]:
    """Index tuples into the child candidate lists.

    All combinations when there are at most ``stop_at``; otherwise
    ``stop_at`` distinct ones sampled by Poisson weight of their rank in the
    typedness order. Ranks more than ``TAIL`` past ``stop_at`` are not
    enumerated: any such rank is at least ``TAIL`` ranks behind some rank
    still available, so its relative weight is below ``lam**TAIL / TAIL!``.
    """
    sizes = [len(c) for c in children]
    if any(s == 0 for s in sizes):
        raise ValueError("every child needs at least one candidate")
    total = math.prod(sizes)
    if total <= cfg.stop_at:
        return list(itertools.product(*(range(s) for s in sizes)))
    rng = rng if rng is not None else np.random.default_rng(cfg.seed)
    scores = [[_score(c) for c in child] for child in children]
    ranked = ranked_combinations(scores, min(total, cfg.stop_at + TAIL))
    return [ranked[r] for r in sample_ranks(len(ranked), cfg.stop_at, cfg.lam, rng)]
