"""Sequence-level optimal transport toolkit.

Discrete OT solvers (IPOT proximal iteration, log-domain Sinkhorn, an
exact enumeration oracle), the hard / assignment / transport matching
hierarchy, embedding-based sequence losses with analytic envelope
gradients, a combined training objective, BLEU scoring, corpus scoring
utilities, and a desk-scale discretized Wasserstein gradient-flow demo.
"""

from .bleu import bleu_n, corpus_bleu
from .core import (
    CostKind,
    CostMatrix,
    DiscreteDistribution,
    SolverConfig,
    SolverFailure,
    SolverReport,
    SolverStatus,
    TransportPlan,
    uniform_weights,
    validate_distribution,
)
from .costs import (
    ZeroNormWarning,
    build_cost_matrix,
    cosine_cost,
    euclidean_cost,
    squared_euclidean_cost,
)
from .embedding import (
    BeliefVector,
    EmbeddedSequence,
    EmbeddingTable,
    LossWeights,
    combined_loss,
    copy_ot_loss,
    embed_belief,
    embed_tokens,
    gumbel_softmax,
    ot_grad_embeddings,
    ot_grad_logits,
    seq_ot_loss,
    soft_argmax,
)
from .flow import FlowRecord, FlowState, jko_step, kl_divergence, run_flow, w2_squared
from .matching import MatchResult, hard_match, hungarian
from .scoring import (
    CorpusSummary,
    ScoreOptions,
    ScoreRecord,
    gamma_sweep,
    load_embeddings,
    score_corpus,
    score_pair,
    tokenize,
)
from .solvers import exact_solve_uniform, ipot_solve, plan_residual, sinkhorn_solve

__version__ = "0.1.0"

__all__ = [
    "BeliefVector",
    "CorpusSummary",
    "CostKind",
    "CostMatrix",
    "DiscreteDistribution",
    "EmbeddedSequence",
    "EmbeddingTable",
    "FlowRecord",
    "FlowState",
    "LossWeights",
    "MatchResult",
    "ScoreOptions",
    "ScoreRecord",
    "SolverConfig",
    "SolverFailure",
    "SolverReport",
    "SolverStatus",
    "TransportPlan",
    "ZeroNormWarning",
    "bleu_n",
    "build_cost_matrix",
    "combined_loss",
    "copy_ot_loss",
    "corpus_bleu",
    "cosine_cost",
    "embed_belief",
    "embed_tokens",
    "euclidean_cost",
    "exact_solve_uniform",
    "gamma_sweep",
    "gumbel_softmax",
    "hard_match",
    "hungarian",
    "ipot_solve",
    "jko_step",
    "kl_divergence",
    "load_embeddings",
    "ot_grad_embeddings",
    "ot_grad_logits",
    "plan_residual",
    "run_flow",
    "score_corpus",
    "score_pair",
    "seq_ot_loss",
    "sinkhorn_solve",
    "soft_argmax",
    "squared_euclidean_cost",
    "tokenize",
    "uniform_weights",
    "validate_distribution",
    "w2_squared",
]
