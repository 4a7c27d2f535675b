"""Desk-scale discretized Wasserstein gradient flow on a fixed support.

A softmax-parameterized discrete distribution nu = softmax(theta) is
driven toward a fixed target p_d on the same support by gradient descent
on the proximal surrogate

    L(theta) = KL(nu || p_d) + (1 / 2h) * W2^2(p_d, nu),

one descent update per JKO step.  The squared 2-Wasserstein term is the
transport distance under squared Euclidean cost, computed by the IPOT
solver; its gradient with respect to nu is the column-side dual
potential (envelope theorem for the LP: the marginal enters the
constraint set, so the derivative of the optimal value is the dual
variable).  The additive constant ambiguity of the dual vanishes under
the softmax Jacobian.

Each step runs a backtracking line search (halving the stepsize up to 20
times), so the surrogate never increases; in particular nu = p_d is a
fixed point.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import CostKind, SolverConfig, SolverFailure, as_simplex
from .costs import build_cost_matrix
from .solvers import ipot_dual_potentials, ipot_solve

__all__ = [
    "FlowState",
    "FlowRecord",
    "kl_divergence",
    "w2_squared",
    "jko_step",
    "run_flow",
    "trajectory_lines",
    "MAX_BACKTRACKS",
]

#: Stepsize halvings attempted before a step is declared stuck.
MAX_BACKTRACKS = 20


@dataclass(frozen=True)
class FlowState:
    """A softmax-parameterized distribution flowing toward a target.

    Attributes:
        support: (k, d) fixed atom locations shared by model and target.
        theta: (k,) logits; the model distribution is softmax(theta).
        target: (k,) simplex vector on the same support.
        h: proximal step scale; the transport term is weighted 1/(2h).
        eta: initial stepsize of each descent update.
    """

    support: np.ndarray
    theta: np.ndarray
    target: np.ndarray
    h: float = 0.5
    eta: float = 0.1

    def __post_init__(self):
        sup = np.asarray(self.support, dtype=np.float64)
        th = np.asarray(self.theta, dtype=np.float64)
        if sup.ndim != 2 or sup.shape[0] < 1 or sup.shape[1] < 1:
            raise ValueError("support must be a nonempty (k, d) matrix")
        if not np.all(np.isfinite(sup)):
            raise ValueError("support contains non-finite entries")
        if th.ndim != 1 or th.shape[0] != sup.shape[0]:
            raise ValueError("theta must be a length-k vector matching the support")
        if not np.all(np.isfinite(th)):
            raise ValueError("theta contains non-finite entries")
        tgt = as_simplex(self.target, "target")
        if tgt.shape[0] != sup.shape[0]:
            raise ValueError("target length must match the support size")
        if not (np.isfinite(self.h) and self.h > 0.0):
            raise ValueError(f"h must be positive, got {self.h!r}")
        if not (np.isfinite(self.eta) and self.eta > 0.0):
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        for name, arr in (("support", sup), ("theta", th), ("target", tgt)):
            frozen = np.array(arr, copy=True)
            frozen.setflags(write=False)
            object.__setattr__(self, name, frozen)

    @property
    def size(self) -> int:
        return self.support.shape[0]

    @property
    def nu(self) -> np.ndarray:
        """Current model weights softmax(theta)."""
        e = np.exp(self.theta - self.theta.max())
        return e / e.sum()


@dataclass(frozen=True)
class FlowRecord:
    """One logged trajectory row."""

    step: int
    kl: float
    w2: float
    tv: float


def kl_divergence(q, p) -> float:
    """KL divergence sum_i q_i (log q_i - log p_i) with 0 log 0 = 0.

    Requires absolute continuity: q may only place mass where p does.
    """
    qv = np.asarray(q, dtype=np.float64)
    pv = np.asarray(p, dtype=np.float64)
    if qv.shape != pv.shape or qv.ndim != 1:
        raise ValueError("q and p must be 1-D vectors of equal length")
    if np.any((qv > 0.0) & (pv == 0.0)):
        raise ValueError("absolute continuity violated: q puts mass where p has none")
    mask = qv > 0.0
    return float(np.sum(qv[mask] * (np.log(qv[mask]) - np.log(pv[mask]))))


def _support_cost(support: np.ndarray, kind: CostKind):
    return build_cost_matrix(support, support, kind)


def w2_squared(
    nu, pd, support, cfg: SolverConfig = SolverConfig()
) -> float:
    """Squared 2-Wasserstein distance between weight vectors on a shared
    support, i.e. the transport distance under squared Euclidean cost.

    Raises :class:`SolverFailure` if the solve fails.
    """
    sup = np.asarray(support, dtype=np.float64)
    C = _support_cost(sup, CostKind.SQUARED_EUCLIDEAN)
    report = ipot_solve(C, as_simplex(pd, "pd"), as_simplex(nu, "nu"), cfg)
    if report.failed:
        raise SolverFailure("transport solve failed in w2_squared")
    return report.distance


def _surrogate_parts(
    state: FlowState, kind: CostKind, cfg: SolverConfig
) -> tuple[float, float, np.ndarray]:
    """(kl, w2, dual) of the current state; dual is d w2 / d nu."""
    nu = state.nu
    kl = kl_divergence(nu, state.target)
    C = _support_cost(state.support, kind)
    report, _, g = ipot_dual_potentials(C, state.target, nu, cfg)
    if report.failed or g is None:
        raise SolverFailure("transport solve failed inside a flow step")
    return kl, report.distance, g


def _loss_value(theta: np.ndarray, state: FlowState, kind: CostKind,
                cfg: SolverConfig) -> float:
    probe = replace(state, theta=theta)
    nu = probe.nu
    kl = kl_divergence(nu, state.target)
    return kl + w2_squared(nu, state.target, state.support, cfg) / (2.0 * state.h)


def jko_step(
    state: FlowState,
    kind: CostKind = CostKind.SQUARED_EUCLIDEAN,
    cfg: SolverConfig = SolverConfig(),
) -> FlowState:
    """One descent update of theta on KL(nu||target) + W2^2/(2h).

    The gradient chains the analytic KL term (log nu - log target + 1)
    and the transport dual through the softmax Jacobian
    diag(nu) - nu nu^T.  A backtracking line search halves the stepsize
    up to ``MAX_BACKTRACKS`` times until the surrogate does not increase;
    if every trial fails the state is returned unchanged (a stationary
    point).
    """
    nu = state.nu
    if np.any(state.target == 0.0):
        # softmax weights are strictly positive, so a zero target atom
        # breaks absolute continuity before any gradient exists
        kl_divergence(nu, state.target)
    kl, w2, g = _surrogate_parts(state, kind, cfg)
    grad_nu = (np.log(nu) - np.log(state.target) + 1.0) + g / (2.0 * state.h)
    grad_theta = nu * (grad_nu - float(np.dot(grad_nu, nu)))
    if not np.all(np.isfinite(grad_theta)):
        raise SolverFailure("non-finite flow gradient")

    loss_before = kl + w2 / (2.0 * state.h)
    eta = state.eta
    for _ in range(MAX_BACKTRACKS + 1):
        theta_new = state.theta - eta * grad_theta
        if _loss_value(theta_new, state, kind, cfg) <= loss_before:
            return replace(state, theta=theta_new)
        eta *= 0.5
    return state


def run_flow(
    state: FlowState,
    max_steps: int,
    stop_tv: float,
    kind: CostKind = CostKind.SQUARED_EUCLIDEAN,
    cfg: SolverConfig = SolverConfig(),
) -> tuple[FlowState, list[FlowRecord]]:
    """Iterate JKO steps until the total-variation distance to the target
    drops to ``stop_tv`` or ``max_steps`` is hit.

    Each logged record holds the state *before* the step it numbers, so a
    start already at the target logs one row and stops.  Returns the
    final state and the trajectory.
    """
    if max_steps < 1:
        raise ValueError(f"max_steps must be >= 1, got {max_steps}")
    if not (np.isfinite(stop_tv) and stop_tv >= 0.0):
        raise ValueError(f"stop_tv must be a nonnegative real, got {stop_tv!r}")
    trajectory: list[FlowRecord] = []
    for step in range(1, max_steps + 1):
        nu = state.nu
        kl = kl_divergence(nu, state.target)
        w2 = w2_squared(nu, state.target, state.support, cfg)
        tv = 0.5 * float(np.abs(nu - state.target).sum())
        trajectory.append(FlowRecord(step=step, kl=kl, w2=w2, tv=tv))
        if tv <= stop_tv or step == max_steps:
            break
        state = jko_step(state, kind, cfg)
    return state, trajectory


def trajectory_lines(trajectory: list[FlowRecord]) -> list[str]:
    """Render a trajectory as line-delimited tab-separated records."""
    lines = ["step\tkl\tw2\ttv"]
    for rec in trajectory:
        lines.append(f"{rec.step}\t{rec.kl:.10g}\t{rec.w2:.10g}\t{rec.tv:.10g}")
    return lines
