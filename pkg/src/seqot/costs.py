"""Pointwise transport costs and cost-matrix assembly.

Three cost families are supported between embedded tokens: cosine
distance 1 - x.y/(|x||y|), squared Euclidean distance, and plain
Euclidean distance.  Cosine is the usual choice for word embeddings;
squared Euclidean is what makes the transport distance a squared
2-Wasserstein distance.

Zero-norm vectors have no direction, so their cosine cost against
anything is defined as the mid-range fallback 1.0 and a
:class:`ZeroNormWarning` is emitted; downstream solvers therefore never
see NaN.
"""

from __future__ import annotations

import warnings

import numpy as np

from .core import CostKind, CostMatrix

__all__ = [
    "CostKind",
    "ZeroNormWarning",
    "cosine_cost",
    "euclidean_cost",
    "squared_euclidean_cost",
    "build_cost_matrix",
]

#: Fallback cosine cost for zero-norm inputs (maximal ignorance, mid-range).
ZERO_NORM_COSINE_COST = 1.0


class ZeroNormWarning(UserWarning):
    """A zero-norm vector was met where a direction was needed."""


def _pair(x, y, op: str) -> tuple[np.ndarray, np.ndarray]:
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if xv.ndim != 1 or yv.ndim != 1:
        raise ValueError(f"{op} expects 1-D vectors")
    if xv.shape != yv.shape:
        raise ValueError(f"{op}: dimension mismatch {xv.shape[0]} vs {yv.shape[0]}")
    if not (np.all(np.isfinite(xv)) and np.all(np.isfinite(yv))):
        raise ValueError(f"{op}: non-finite input")
    return xv, yv


def cosine_cost(x, y) -> float:
    """Cosine distance 1 - x.y / (|x| |y|), clamped to [0, 2].

    Zero-norm inputs yield the fallback cost 1.0 with a
    :class:`ZeroNormWarning` instead of NaN.
    """
    xv, yv = _pair(x, y, "cosine_cost")
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    if nx == 0.0 or ny == 0.0:
        warnings.warn("zero-norm vector in cosine cost; using fallback cost 1.0",
                      ZeroNormWarning, stacklevel=2)
        return ZERO_NORM_COSINE_COST
    c = 1.0 - float(np.dot(xv, yv)) / (nx * ny)
    return min(max(c, 0.0), 2.0)


def squared_euclidean_cost(x, y) -> float:
    """Squared Euclidean distance sum_k (x_k - y_k)^2."""
    xv, yv = _pair(x, y, "squared_euclidean_cost")
    d = xv - yv
    return float(np.dot(d, d))


def euclidean_cost(x, y) -> float:
    """Euclidean distance |x - y|."""
    return float(np.sqrt(squared_euclidean_cost(x, y)))


def _as_point_matrix(S, name: str) -> np.ndarray:
    arr = np.asarray(S, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D (count, dim) array")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def build_cost_matrix(S, S2, kind: CostKind) -> CostMatrix:
    """Assemble the (n, m) matrix of pairwise costs between two point sets.

    Parameters
    ----------
    S : (n, d) array
        Row i is the i-th point of the first set.
    S2 : (m, d) array
        Row j is the j-th point of the second set.
    kind : CostKind
        Which pointwise cost to evaluate.

    Returns
    -------
    CostMatrix with entry (i, j) = cost(S[i], S2[j]).
    """
    X = _as_point_matrix(S, "S")
    Y = _as_point_matrix(S2, "S2")
    if X.shape[1] != Y.shape[1]:
        raise ValueError(
            f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}"
        )
    if not isinstance(kind, CostKind):
        raise TypeError(f"kind must be a CostKind, got {kind!r}")

    if kind is CostKind.COSINE:
        nx = np.linalg.norm(X, axis=1)
        ny = np.linalg.norm(Y, axis=1)
        zero_x = nx == 0.0
        zero_y = ny == 0.0
        if np.any(zero_x) or np.any(zero_y):
            warnings.warn(
                "zero-norm rows in cosine cost matrix; using fallback cost 1.0",
                ZeroNormWarning, stacklevel=2)
        safe_nx = np.where(zero_x, 1.0, nx)
        safe_ny = np.where(zero_y, 1.0, ny)
        C = 1.0 - (X @ Y.T) / np.outer(safe_nx, safe_ny)
        C[zero_x, :] = ZERO_NORM_COSINE_COST
        C[:, zero_y] = ZERO_NORM_COSINE_COST
        C = np.clip(C, 0.0, 2.0)
    else:
        # |x-y|^2 = |x|^2 + |y|^2 - 2 x.y, clamped against rounding below 0
        sq = (
            np.sum(X * X, axis=1)[:, None]
            + np.sum(Y * Y, axis=1)[None, :]
            - 2.0 * (X @ Y.T)
        )
        np.maximum(sq, 0.0, out=sq)
        C = sq if kind is CostKind.SQUARED_EUCLIDEAN else np.sqrt(sq)

    return CostMatrix(values=C, cost_kind=kind)
