"""Shared domain types for discrete optimal transport at sentence scale.

Instances here are small (supports of at most a few hundred points), so
every type stores dense float64 arrays and validates eagerly.  All types
are immutable after construction: arrays are copied in and marked
read-only, which makes them safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "CostKind",
    "SolverStatus",
    "DiscreteDistribution",
    "CostMatrix",
    "TransportPlan",
    "SolverConfig",
    "SolverReport",
    "SolverFailure",
    "validate_distribution",
    "uniform_weights",
    "as_simplex",
]

#: Weight vectors whose sum deviates from 1 by more than this are rejected;
#: smaller deviations are repaired by renormalization.
WEIGHT_SUM_TOL = 1e-6

#: Quality bound that renormalized weights must meet.
SIMPLEX_TOL = 1e-9

#: Feasibility band (inf-norm) for transport-plan marginals.
MARGINAL_TOL = 1e-6

#: Plan entries below -NEGATIVE_MASS_TOL are rejected; entries in
#: [-NEGATIVE_MASS_TOL, 0) are clamped to 0 on construction.
NEGATIVE_MASS_TOL = 1e-12


class CostKind(Enum):
    """Pointwise transport-cost families understood by the cost builders."""

    COSINE = "cosine"
    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "squared_euclidean"


class SolverStatus(Enum):
    """Outcome of a transport solve.

    ``OK``: the iteration stagnated and the final plan satisfies both
    marginal constraints within ``MARGINAL_TOL``.  ``MAX_ITERS``: the
    iteration budget ran out but the final plan is still feasible (its
    distance is exposed; it may be suboptimal).  ``NUMERICAL_FAILURE``:
    the solver hit non-finite values, underflowed kernels, or exited with
    an infeasible iterate; distance and plan are withheld so no NaN/Inf
    or meaningless value ever escapes.
    """

    OK = "ok"
    MAX_ITERS = "max_iters"
    NUMERICAL_FAILURE = "numerical_failure"


class SolverFailure(RuntimeError):
    """Raised when a computation needs a plan but the solver reported
    ``NUMERICAL_FAILURE``."""


def _as_float_array(x, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    return arr


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


def as_simplex(weights, name: str = "weights") -> np.ndarray:
    """Validate and renormalize a probability weight vector.

    Entries must be finite and nonnegative and sum to 1 within
    ``WEIGHT_SUM_TOL``; the returned copy is renormalized to sum to 1
    within ``SIMPLEX_TOL``.

    Raises:
        ValueError: on negative entries, non-finite entries, empty input,
            or a weight sum outside the acceptance band.
    """
    w = _as_float_array(weights, name, 1)
    if w.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(w)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(w < 0.0):
        raise ValueError(f"{name} contains negative entries")
    total = float(w.sum())
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValueError(
            f"{name} must sum to 1 within {WEIGHT_SUM_TOL:g}; got {total!r}"
        )
    return w / total


def uniform_weights(n: int) -> np.ndarray:
    """Uniform weight vector (1/n, ..., 1/n) of length ``n`` >= 1."""
    if n < 1:
        raise ValueError(f"need at least one point, got n={n}")
    return np.full(n, 1.0 / n)


@dataclass(frozen=True)
class DiscreteDistribution:
    """A weighted point cloud: support points plus simplex weights.

    Attributes:
        points: (n, d) array of support points, all coordinates finite.
        weights: (n,) simplex vector; renormalized on construction when
            the raw sum is within ``WEIGHT_SUM_TOL`` of 1.
    """

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = _as_float_array(self.points, "points", 2)
        if pts.shape[0] < 1:
            raise ValueError("distribution needs at least one support point")
        if pts.shape[1] < 1:
            raise ValueError("support points need dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain non-finite coordinates")
        w = as_simplex(self.weights, "weights")
        if w.shape[0] != pts.shape[0]:
            raise ValueError(
                f"point count {pts.shape[0]} != weight count {w.shape[0]}"
            )
        object.__setattr__(self, "points", _freeze(pts))
        object.__setattr__(self, "weights", _freeze(w))

    @property
    def size(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]


def validate_distribution(points, weights) -> DiscreteDistribution:
    """Build a validated :class:`DiscreteDistribution`.

    Weights that sum to 1 within ``WEIGHT_SUM_TOL`` are renormalized;
    anything worse is rejected, as are negative weights, dimension
    mismatches, and empty supports.
    """
    return DiscreteDistribution(points=points, weights=weights)


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise transport costs with provenance of the cost function.

    Entries must be finite and nonnegative; cosine costs must addition-
    ally lie in [0, 2].  Builders clamp rounding excursions before
    construction, so violations here indicate a real input problem.
    """

    values: np.ndarray
    cost_kind: CostKind

    def __post_init__(self):
        vals = _as_float_array(self.values, "values", 2)
        if vals.shape[0] < 1 or vals.shape[1] < 1:
            raise ValueError("cost matrix must be nonempty")
        if not np.all(np.isfinite(vals)):
            raise ValueError("cost matrix contains non-finite entries")
        if np.any(vals < 0.0):
            raise ValueError("cost matrix contains negative entries")
        if not isinstance(self.cost_kind, CostKind):
            raise TypeError(f"cost_kind must be a CostKind, got {self.cost_kind!r}")
        if self.cost_kind is CostKind.COSINE and np.any(vals > 2.0):
            raise ValueError("cosine costs must lie in [0, 2]")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class TransportPlan:
    """A coupling matrix together with the marginals it is meant to hit.

    Storing the intended marginals makes feasibility checkable without
    re-deriving context: row sums must match ``row_marginal`` and column
    sums ``col_marginal`` within ``MARGINAL_TOL`` (inf-norm).  Entries in
    [-1e-12, 0) are clamped to zero; anything more negative is rejected.
    """

    matrix: np.ndarray
    row_marginal: np.ndarray
    col_marginal: np.ndarray

    def __post_init__(self):
        mat = _as_float_array(self.matrix, "matrix", 2)
        row = _as_float_array(self.row_marginal, "row_marginal", 1)
        col = _as_float_array(self.col_marginal, "col_marginal", 1)
        if mat.shape != (row.shape[0], col.shape[0]):
            raise ValueError(
                f"plan shape {mat.shape} incompatible with marginals "
                f"({row.shape[0]}, {col.shape[0]})"
            )
        if not np.all(np.isfinite(mat)):
            raise ValueError("plan contains non-finite entries")
        if np.any(mat < -NEGATIVE_MASS_TOL):
            raise ValueError(
                f"plan contains entries below -{NEGATIVE_MASS_TOL:g}"
            )
        mat = np.maximum(mat, 0.0)
        row_err = float(np.abs(mat.sum(axis=1) - row).max())
        col_err = float(np.abs(mat.sum(axis=0) - col).max())
        if max(row_err, col_err) > MARGINAL_TOL:
            raise ValueError(
                f"plan marginals infeasible: residual {max(row_err, col_err):.3e} "
                f"> {MARGINAL_TOL:g}"
            )
        object.__setattr__(self, "matrix", _freeze(mat))
        object.__setattr__(self, "row_marginal", _freeze(row))
        object.__setattr__(self, "col_marginal", _freeze(col))

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters shared by the transport solvers.

    Attributes:
        beta: proximal weight of the IPOT kernel exp(-C/beta); 1/beta is
            the generalized stepsize.  Default 0.5.
        outer_iters: iteration budget for the outer loop.
        inner_k: inner scaling passes per outer iteration (1 in practice).
        epsilon: Sinkhorn regularization strength.  The entropic objective
            is <T, C> - (1/epsilon) H(T), so the scaling kernel is
            exp(-epsilon * C) and *larger* epsilon means *weaker*
            regularization.  Note this is inverted relative to the
            convention in much of the OT literature.
        tolerance: stop when the Frobenius norm of the plan change falls
            below this.
    """

    beta: float = 0.5
    outer_iters: int = 2000
    inner_k: int = 1
    epsilon: float = 10.0
    tolerance: float = 1e-9

    def __post_init__(self):
        if not (self.beta > 0.0 and np.isfinite(self.beta)):
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if not (self.epsilon > 0.0 and np.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not (self.tolerance > 0.0 and np.isfinite(self.tolerance)):
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.outer_iters < 1:
            raise ValueError(f"outer_iters must be >= 1, got {self.outer_iters}")
        if self.inner_k < 1:
            raise ValueError(f"inner_k must be >= 1, got {self.inner_k}")


@dataclass(frozen=True)
class SolverReport:
    """What a transport solve produced.

    ``distance`` is the Frobenius dot product of the returned plan with
    the input cost matrix.  On ``NUMERICAL_FAILURE`` both ``distance``
    and ``plan`` are withheld (None) so that no NaN/Inf leaks out.
    """

    status: SolverStatus
    distance: float | None
    plan: TransportPlan | None
    iterations_used: int
    converged: bool
    marginal_residual: float

    def __post_init__(self):
        if self.status is SolverStatus.NUMERICAL_FAILURE:
            if self.distance is not None or self.plan is not None:
                raise ValueError("failed solves must withhold distance and plan")
        else:
            if self.distance is None or self.plan is None:
                raise ValueError(f"status {self.status} requires distance and plan")
            if not np.isfinite(self.distance):
                raise ValueError("exposed distance must be finite")
            if self.distance < 0.0:
                raise ValueError("transport cost of a nonnegative cost matrix "
                                 "cannot be negative")

    @property
    def failed(self) -> bool:
        return self.status is SolverStatus.NUMERICAL_FAILURE
