"""Set-style sequence matching: exact token overlap and minimum-cost
one-to-one assignment.

These are the two rungs below full transport in the matching hierarchy:
hard matching counts exactly shared tokens, and the assignment solver
pairs tokens one-to-one to minimize summed embedding costs.  On uniform
square instances the optimal assignment cost divided by n equals the
exact transport distance (the optimum of the transport LP sits at a
permutation vertex), which the test suite exploits as a cross-check.

Neither operation is differentiable, so they serve as oracles and
reporting tools rather than training losses.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import CostMatrix

__all__ = ["MatchResult", "hard_match", "hungarian"]

#: Absolute tolerance used to recognize assignments of equal total cost
#: during lexicographic tie resolution.
_OPT_TOL = 1e-9


@dataclass(frozen=True)
class MatchResult:
    """A one-to-one assignment and its total cost.

    ``assignment`` holds (row, column) pairs in ascending row order; row
    indices and column indices are each unique.  ``total_cost`` is the
    sum of the cost matrix over the assigned pairs, accumulated in row
    order.
    """

    assignment: tuple[tuple[int, int], ...]
    total_cost: float

    def __post_init__(self):
        rows = [i for i, _ in self.assignment]
        cols = [j for _, j in self.assignment]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise ValueError("assignment indices must be unique per side")
        if not np.isfinite(self.total_cost):
            raise ValueError("total_cost must be finite")


def hard_match(a: Iterable, b: Iterable) -> int:
    """Multiset intersection size of two token sequences.

    Counts each distinct token min(count_a, count_b) times, i.e. the
    number of exactly shared tokens.
    """
    return sum((Counter(a) & Counter(b)).values())


def _square_values(C) -> np.ndarray:
    values = C.values if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError(
            f"assignment needs a square cost matrix, got shape {values.shape}; "
            "pad rectangular instances before calling"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("cost matrix contains non-finite entries")
    return values


def _lsa_cost(values: np.ndarray) -> float:
    if values.size == 0:
        return 0.0
    r, c = linear_sum_assignment(values)
    return float(values[r, c].sum())


def hungarian(C) -> MatchResult:
    """Minimum-cost perfect matching on a square cost matrix.

    Solves the full assignment problem (every row matched to exactly one
    column) and resolves ties to the lexicographically smallest optimal
    assignment so that identical inputs always produce identical output.
    Rectangular instances must be padded by the caller with a large
    sentinel cost (10x the maximum entry works well).

    Parameters
    ----------
    C : CostMatrix or square 2-D array

    Returns
    -------
    MatchResult with the assignment in ascending row order and the total
    cost summed in that same order.
    """
    values = _square_values(C)
    n = values.shape[0]
    optimum = _lsa_cost(values)
    tol = _OPT_TOL * max(1.0, abs(optimum))

    # Fix rows one at a time, always taking the smallest column that can
    # still complete to an optimal assignment; this yields the
    # lexicographically smallest optimum at the price of O(n^2) re-solves.
    available = list(range(n))
    chosen: list[int] = []
    prefix = 0.0
    for i in range(n):
        if len(available) == 1:
            j = available[0]
        else:
            j = -1
            rest_rows = np.arange(i + 1, n)
            for cand in available:
                rest_cols = [c for c in available if c != cand]
                remainder = _lsa_cost(values[np.ix_(rest_rows, rest_cols)])
                if abs(prefix + values[i, cand] + remainder - optimum) <= tol:
                    j = cand
                    break
            if j < 0:  # numerically impossible unless tol is violated
                raise RuntimeError("lexicographic refinement lost the optimum")
        chosen.append(j)
        available.remove(j)
        prefix += values[i, j]

    total = 0.0
    for i, j in enumerate(chosen):
        total += values[i, j]
    assignment = tuple((i, j) for i, j in enumerate(chosen))
    return MatchResult(assignment=assignment, total_cost=float(total))
