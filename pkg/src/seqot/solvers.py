"""Discrete optimal-transport solvers.

Three routes to a transport plan:

* :func:`ipot_solve` -- proximal point iteration with a generalized-KL
  proximity term on the kernel exp(-C/beta).  Converges to the exact
  (unregularized) optimum; this is the production solver.
* :func:`sinkhorn_solve` -- entropic regularization <T,C> - (1/eps) H(T),
  solved by log-domain scaling on the kernel exp(-eps*C).  Kept as a
  comparison baseline; it is noticeably sensitive to eps.
* :func:`exact_solve_uniform` -- permutation enumeration for small
  uniform square instances, used as a test oracle.

Both iterative solvers are pure functions of (C, u, v, cfg): no
randomness, bit-identical reports for identical inputs, safe to call
concurrently.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .core import (
    MARGINAL_TOL,
    CostMatrix,
    SolverConfig,
    SolverReport,
    SolverStatus,
    TransportPlan,
    as_simplex,
)

__all__ = [
    "ipot_solve",
    "sinkhorn_solve",
    "exact_solve_uniform",
    "plan_residual",
    "ORACLE_MAX_SIZE",
]

#: Largest instance the enumeration oracle accepts (n! blow-up beyond).
ORACLE_MAX_SIZE = 8

#: Scaling denominators below this trigger an explicit numerical failure
#: instead of letting Inf propagate.
_DENOM_FLOOR = 1e-300


def _marginal_residual(T: np.ndarray, u: np.ndarray, v: np.ndarray) -> float:
    row = np.abs(T.sum(axis=1) - u).max()
    col = np.abs(T.sum(axis=0) - v).max()
    return float(max(row, col))


def _check_inputs(C: CostMatrix, u, v) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not isinstance(C, CostMatrix):
        raise TypeError(f"C must be a CostMatrix, got {type(C).__name__}")
    uu = as_simplex(u, "u")
    vv = as_simplex(v, "v")
    n, m = C.shape
    if uu.shape[0] != n or vv.shape[0] != m:
        raise ValueError(
            f"marginal lengths ({uu.shape[0]}, {vv.shape[0]}) do not match "
            f"cost shape {C.shape}"
        )
    return C.values, uu, vv


def _failure(iters: int) -> SolverReport:
    return SolverReport(
        status=SolverStatus.NUMERICAL_FAILURE,
        distance=None,
        plan=None,
        iterations_used=iters,
        converged=False,
        marginal_residual=float("inf"),
    )


def _finish(
    T: np.ndarray,
    cost: np.ndarray,
    u: np.ndarray,
    v: np.ndarray,
    iters: int,
    converged: bool,
) -> SolverReport:
    if not np.all(np.isfinite(T)):
        return _failure(iters)
    residual = _marginal_residual(T, u, v)
    # An iterate outside the feasibility band is not a coupling; exposing
    # its <T, C> would quietly report a wrong distance, so fail loudly.
    if residual > MARGINAL_TOL:
        return _failure(iters)
    plan = TransportPlan(matrix=T, row_marginal=u, col_marginal=v)
    distance = float(np.sum(plan.matrix * cost))
    return SolverReport(
        status=SolverStatus.OK if converged else SolverStatus.MAX_ITERS,
        distance=distance,
        plan=plan,
        iterations_used=iters,
        converged=converged,
        marginal_residual=residual,
    )


@dataclass(frozen=True)
class _IpotState:
    """Final iterate of the proximal loop plus its scaling vectors."""

    T: np.ndarray | None
    delta: np.ndarray | None
    sigma: np.ndarray | None
    iterations: int
    converged: bool


def _ipot_iterate(
    cost: np.ndarray, u: np.ndarray, v: np.ndarray, cfg: SolverConfig
) -> _IpotState:
    n, m = cost.shape
    A = np.exp(-cost / cfg.beta)
    # beta so small that the kernel underflows leaves some point unreachable
    if np.any((A.sum(axis=1) == 0.0) & (u > 0)) or np.any(
        (A.sum(axis=0) == 0.0) & (v > 0)
    ):
        return _IpotState(None, None, None, 0, False)

    sigma = v.copy()
    delta = np.ones(n)
    T = np.ones((n, m))
    iters = 0
    converged = False
    for t in range(cfg.outer_iters):
        Q = A * T
        for _ in range(cfg.inner_k):
            qs = Q @ sigma
            if np.any((qs < _DENOM_FLOOR) & (u > 0)):
                return _IpotState(None, None, None, t + 1, False)
            delta = np.where(u > 0, u / np.maximum(qs, _DENOM_FLOOR), 0.0)
            qtd = Q.T @ delta
            if np.any((qtd < _DENOM_FLOOR) & (v > 0)):
                return _IpotState(None, None, None, t + 1, False)
            sigma = np.where(v > 0, v / np.maximum(qtd, _DENOM_FLOOR), 0.0)
        T_next = delta[:, None] * Q * sigma[None, :]
        if not np.all(np.isfinite(T_next)):
            return _IpotState(None, None, None, t + 1, False)
        diff = float(np.linalg.norm(T_next - T))
        T = T_next
        iters = t + 1
        if diff <= cfg.tolerance:
            converged = True
            break
    return _IpotState(T, delta, sigma, iters, converged)


def ipot_solve(
    C: CostMatrix, u, v, cfg: SolverConfig = SolverConfig()
) -> SolverReport:
    """Solve the transport problem min_{T in Pi(u, v)} <T, C> by inexact
    proximal point iteration.

    Each outer step forms Q = exp(-C/beta) * T(t) (Hadamard product) and
    runs ``cfg.inner_k`` scaling passes delta = u / (Q sigma), sigma =
    v / (Q^T delta) -- the uniform 1/n, 1/m factors of the classic
    statement generalized to arbitrary simplex marginals -- then sets
    T(t+1) = diag(delta) Q diag(sigma).  Iteration stops early once the
    Frobenius norm of the plan change falls below ``cfg.tolerance``.

    Parameters
    ----------
    C : CostMatrix, shape (n, m)
    u, v : simplex vectors of lengths n and m
    cfg : SolverConfig
        ``beta=0.5`` and ``inner_k=1`` are the recommended defaults.

    Returns
    -------
    SolverReport with distance <T, C>, the plan, iteration count,
    whether the early stop fired, and the marginal residual.
    """
    cost, uu, vv = _check_inputs(C, u, v)
    state = _ipot_iterate(cost, uu, vv, cfg)
    if state.T is None:
        return _failure(state.iterations)
    return _finish(state.T, cost, uu, vv, state.iterations, state.converged)


def ipot_dual_potentials(
    C: CostMatrix, u, v, cfg: SolverConfig = SolverConfig()
) -> tuple[SolverReport, np.ndarray | None, np.ndarray | None]:
    """IPOT solve that also recovers approximate Kantorovich potentials.

    At stagnation the iterate satisfies T = diag(delta) (A*T) diag(sigma),
    so f = beta*log(delta), g = beta*log(sigma) obey f_i + g_j = C_ij on
    the support of the optimal plan and f_i + g_j <= C_ij elsewhere: they
    are the dual potentials of the transport LP.  The g vector is the
    envelope derivative of the optimal value with respect to the column
    marginal v (up to an additive constant).

    Requires strictly positive marginals; potentials are withheld (None)
    when the solve fails.
    """
    cost, uu, vv = _check_inputs(C, u, v)
    if np.any(uu <= 0.0) or np.any(vv <= 0.0):
        raise ValueError("dual potentials need strictly positive marginals")
    state = _ipot_iterate(cost, uu, vv, cfg)
    if state.T is None:
        return _failure(state.iterations), None, None
    report = _finish(state.T, cost, uu, vv, state.iterations, state.converged)
    if report.failed:
        return report, None, None
    f = cfg.beta * np.log(state.delta)
    g = cfg.beta * np.log(state.sigma)
    return report, f, g


def sinkhorn_solve(
    C: CostMatrix, u, v, cfg: SolverConfig = SolverConfig()
) -> SolverReport:
    """Solve the entropy-regularized problem min <T,C> - (1/eps) H(T)
    by log-domain Sinkhorn scaling on the kernel exp(-eps*C).

    With the regularizer weighted by 1/eps, *larger* eps means weaker
    regularization and a sharper plan.  The reported distance is the
    unregularized transport cost <T, C> of the returned plan, which
    approaches the exact optimum from above as eps grows -- until
    slow convergence or underflow makes the solve fail explicitly.

    Returns
    -------
    SolverReport; on over/underflow beyond log-domain rescue or an exit
    iterate outside the feasibility band the status is
    ``NUMERICAL_FAILURE`` and no value is exposed (never NaN/Inf).
    """
    cost, uu, vv = _check_inputs(C, u, v)
    n, m = cost.shape
    log_kernel = -cfg.epsilon * cost
    with np.errstate(divide="ignore"):
        log_u = np.log(uu)
        log_v = np.log(vv)

    f = np.zeros(n)
    g = np.zeros(m)
    T = np.full((n, m), 1.0 / (n * m))
    iters = 0
    converged = False
    for t in range(cfg.outer_iters):
        with np.errstate(invalid="ignore"):
            f = log_u - logsumexp(log_kernel + g[None, :], axis=1)
            g = log_v - logsumexp(log_kernel + f[:, None], axis=0)
            log_T = f[:, None] + log_kernel + g[None, :]
        if np.any(np.isnan(log_T)) or np.any(log_T == np.inf):
            return _failure(t + 1)
        T_next = np.exp(log_T)
        diff = float(np.linalg.norm(T_next - T))
        T = T_next
        iters = t + 1
        if diff <= cfg.tolerance:
            converged = True
            break
    return _finish(T, cost, uu, vv, iters, converged)


def exact_solve_uniform(C: CostMatrix) -> tuple[float, tuple[int, ...]]:
    """Exact transport oracle for uniform marginals on a square instance.

    With uniform weights on both sides the optimum of the transport LP is
    attained at a permutation matrix (a vertex of the Birkhoff polytope),
    so the distance is (1/n) min_pi sum_i C[i, pi(i)], found here by
    exhaustive enumeration.  Ties resolve to the lexicographically
    smallest permutation.  Test-scale only: n <= 8.

    Returns
    -------
    (distance, permutation) where permutation[i] is the column assigned
    to row i.
    """
    if not isinstance(C, CostMatrix):
        raise TypeError(f"C must be a CostMatrix, got {type(C).__name__}")
    n, m = C.shape
    if n != m:
        raise ValueError(f"exact oracle needs a square instance, got {C.shape}")
    if n > ORACLE_MAX_SIZE:
        raise ValueError(
            f"exact oracle is test-scale only (n <= {ORACLE_MAX_SIZE}), got n={n}"
        )
    values = C.values
    best_total = np.inf
    best_perm: tuple[int, ...] | None = None
    # itertools yields permutations in lexicographic order; strict '<'
    # therefore keeps the lexicographically smallest optimum.
    for perm in itertools.permutations(range(n)):
        total = 0.0
        for i, j in enumerate(perm):
            total += values[i, j]
        if total < best_total:
            best_total = total
            best_perm = perm
    assert best_perm is not None
    return float(best_total / n), best_perm


def plan_residual(plan: TransportPlan) -> float:
    """Inf-norm feasibility residual of a plan against its stored marginals."""
    return _marginal_residual(plan.matrix, plan.row_marginal, plan.col_marginal)
