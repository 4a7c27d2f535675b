"""Corpus scoring: embed sentence pairs, score them with transport
distance, exact-overlap, and BLEU, and emit line-delimited records.

File formats
------------
Embeddings: UTF-8 text, one token followed by d whitespace-separated
floats per line; an optional first line of exactly two integers ("V d")
is treated as a header.  Corpus files: UTF-8, one pre-tokenized sentence
per line, aligned line-by-line across hypothesis/reference/source.

Record stream: a header line ``seqot-records v1`` followed by one
tab-separated line per pair with fields pair_id, ot_seq, ot_copy,
bleu1..bleu4, hard_match, len_hyp, len_ref, len_src, status.  Absent
optional fields are written as "-".  The stream is deterministic given
files and configuration, byte-identical across runs and thread counts.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bleu import bleu_n, corpus_bleu
from .core import CostKind, SolverConfig, SolverStatus, TransportPlan, uniform_weights
from .costs import build_cost_matrix
from .embedding import (
    DEFAULT_TAU,
    EmbeddedSequence,
    EmbeddingTable,
    LossWeights,
    combined_loss,
    embed_tokens,
)
from .matching import hard_match
from .solvers import ipot_solve, sinkhorn_solve

__all__ = [
    "RECORD_HEADER",
    "DEFAULT_GAMMA_GRID",
    "ScoreOptions",
    "ScoreRecord",
    "CorpusSummary",
    "load_embeddings",
    "tokenize",
    "score_pair",
    "score_corpus",
    "gamma_sweep",
]

RECORD_HEADER = "seqot-records v1"

SOLVERS = ("ipot", "sinkhorn")

#: Grid swept over the sequence-loss weight; 0.1 is the recommended value.
DEFAULT_GAMMA_GRID = (0.0, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0)

#: Record status for pairs where transport is undefined (an empty side).
STATUS_DEGENERATE = "degenerate"


@dataclass(frozen=True)
class ScoreOptions:
    """Everything configurable about pair scoring.

    ``tau``, ``weights`` and ``seed`` do not affect score records (token
    scoring embeds ground-truth tokens); they are carried so that one
    options object drives the whole toolkit, including belief encodings
    and sweeps.
    """

    cost_kind: CostKind = CostKind.COSINE
    solver: str = "ipot"
    config: SolverConfig = field(default_factory=SolverConfig)
    oov_policy: str | None = None
    tau: float = DEFAULT_TAU
    weights: LossWeights = field(default_factory=LossWeights)
    threads: int = 1
    dump_plans: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")


@dataclass(frozen=True)
class ScoreRecord:
    """Per-pair scores.

    ``ot_seq``/``ot_copy`` are transport distances (None when the solver
    failed, the pair was degenerate, or no source was given); ``bleu``
    maps n to the cumulative BLEU-n score for n = 1..4; ``hard_match``
    counts exactly shared tokens.
    """

    pair_id: int
    ot_seq: float | None
    ot_copy: float | None
    bleu: dict[int, float]
    hard_match: int
    len_hyp: int
    len_ref: int
    len_src: int | None
    status: str

    def __post_init__(self):
        for n, score in self.bleu.items():
            if not 0.0 <= score <= 1.0:
                raise ValueError(f"bleu{n} out of [0, 1]: {score!r}")
        if self.status == SolverStatus.OK.value:
            for name, val in (("ot_seq", self.ot_seq), ("ot_copy", self.ot_copy)):
                if val is not None and not (np.isfinite(val) and val >= 0.0):
                    raise ValueError(f"{name} must be >= 0 when status is ok")

    def to_line(self) -> str:
        def fmt(x) -> str:
            return "-" if x is None else format(x, ".10g")

        fields = [
            str(self.pair_id),
            fmt(self.ot_seq),
            fmt(self.ot_copy),
            *(format(self.bleu[n], ".10g") for n in (1, 2, 3, 4)),
            str(self.hard_match),
            str(self.len_hyp),
            str(self.len_ref),
            "-" if self.len_src is None else str(self.len_src),
            self.status,
        ]
        return "\t".join(fields)


@dataclass(frozen=True)
class CorpusSummary:
    """Aggregates over one scored corpus."""

    pairs: int
    mean_ot_seq: float | None
    mean_ot_copy: float | None
    corpus_bleu: float
    solver_failures: int

    def to_line(self) -> str:
        def fmt(x) -> str:
            return "-" if x is None else format(x, ".10g")

        return (
            f"summary\tpairs={self.pairs}"
            f"\tmean_ot_seq={fmt(self.mean_ot_seq)}"
            f"\tmean_ot_copy={fmt(self.mean_ot_copy)}"
            f"\tcorpus_bleu={format(self.corpus_bleu, '.10g')}"
            f"\tsolver_failures={self.solver_failures}"
        )


def tokenize(line: str) -> list[str]:
    """Split on runs of whitespace; an empty result is allowed."""
    return line.split()


def load_embeddings(path) -> EmbeddingTable:
    """Load a text embedding table (token + d floats per line).

    A first line consisting of exactly two integers is auto-detected as a
    "V d" header and checked against the body.  Errors name the offending
    line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw_lines = fh.read().splitlines()

    lines = [(no, line) for no, line in enumerate(raw_lines, start=1) if line.strip()]
    if not lines:
        raise ValueError(f"{path}: empty embedding file")

    header: tuple[int, int] | None = None
    first_fields = lines[0][1].split()
    if len(first_fields) == 2:
        try:
            header = (int(first_fields[0]), int(first_fields[1]))
            lines = lines[1:]
        except ValueError:
            header = None
    if not lines:
        raise ValueError(f"{path}: header but no embedding rows")

    tokens: list[str] = []
    seen: set[str] = set()
    rows: list[list[float]] = []
    dim: int | None = None
    for no, line in lines:
        fields = line.split()
        if len(fields) < 2:
            raise ValueError(f"{path}:{no}: expected a token and floats")
        token = fields[0]
        if token in seen:
            raise ValueError(f"{path}:{no}: duplicate token {token!r}")
        try:
            vec = [float(x) for x in fields[1:]]
        except ValueError as exc:
            raise ValueError(f"{path}:{no}: unparseable float ({exc})") from None
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise ValueError(
                f"{path}:{no}: dimension {len(vec)} != expected {dim}"
            )
        seen.add(token)
        tokens.append(token)
        rows.append(vec)

    if header is not None:
        v_decl, d_decl = header
        if v_decl != len(tokens):
            raise ValueError(
                f"{path}: header declares {v_decl} rows, file has {len(tokens)}"
            )
        if d_decl != dim:
            raise ValueError(
                f"{path}: header declares dimension {d_decl}, rows have {dim}"
            )
    return EmbeddingTable(tokens=tuple(tokens), vectors=np.array(rows))


def _solve(gen: EmbeddedSequence, ref: EmbeddedSequence, options: ScoreOptions):
    C = build_cost_matrix(gen.matrix, ref.matrix, options.cost_kind)
    solve = ipot_solve if options.solver == "ipot" else sinkhorn_solve
    return solve(
        C, uniform_weights(gen.length), uniform_weights(ref.length), options.config
    )


def _embed_or_none(tokens, table, policy) -> EmbeddedSequence | None:
    if not tokens:
        return None
    try:
        return embed_tokens(tokens, table, policy)
    except ValueError:
        return None  # empty after OOV handling


def _score_pair_full(
    pair_id: int,
    hyp: list[str],
    ref: list[str],
    src: list[str] | None,
    table: EmbeddingTable,
    options: ScoreOptions,
) -> tuple[ScoreRecord, TransportPlan | None, TransportPlan | None]:
    bleu = {n: bleu_n(hyp, [ref], n) for n in (1, 2, 3, 4)}
    hard = hard_match(hyp, ref)
    lengths = (len(hyp), len(ref), None if src is None else len(src))

    hyp_emb = _embed_or_none(hyp, table, options.oov_policy)
    ref_emb = _embed_or_none(ref, table, options.oov_policy)
    src_emb = None if src is None else _embed_or_none(src, table, options.oov_policy)

    status = STATUS_DEGENERATE
    ot_seq = ot_copy = None
    seq_plan = copy_plan = None
    if hyp_emb is not None and ref_emb is not None:
        report = _solve(hyp_emb, ref_emb, options)
        status = report.status.value
        if not report.failed:
            ot_seq = report.distance
            seq_plan = report.plan
        if src is not None and src_emb is not None and not report.failed:
            copy_report = _solve(hyp_emb, src_emb, options)
            if copy_report.failed:
                status = SolverStatus.NUMERICAL_FAILURE.value
                ot_seq = None
                seq_plan = None
            else:
                ot_copy = copy_report.distance
                copy_plan = copy_report.plan
                if copy_report.status is not SolverStatus.OK:
                    status = copy_report.status.value

    record = ScoreRecord(
        pair_id=pair_id,
        ot_seq=ot_seq,
        ot_copy=ot_copy,
        bleu=bleu,
        hard_match=hard,
        len_hyp=lengths[0],
        len_ref=lengths[1],
        len_src=lengths[2],
        status=status,
    )
    return record, seq_plan, copy_plan


def score_pair(
    hyp: list[str],
    ref: list[str],
    src: list[str] | None,
    table: EmbeddingTable,
    options: ScoreOptions = ScoreOptions(),
    pair_id: int = 0,
) -> ScoreRecord:
    """Score one hypothesis/reference (and optional source) token triple.

    Computes the transport distance between embedded sequences (plus the
    copy leg when a source is given), the exact-overlap count, and
    cumulative BLEU-1..4.  If either side embeds to nothing the record
    status is "degenerate" and transport values are omitted; solver
    failures likewise carry their status with values withheld.
    """
    record, _, _ = _score_pair_full(pair_id, hyp, ref, src, table, options)
    return record


def _read_corpus(path) -> list[list[str]]:
    with open(path, "r", encoding="utf-8") as fh:
        return [tokenize(line) for line in fh.read().splitlines()]


def score_corpus(
    hyp_path,
    ref_path,
    src_path,
    embed_path,
    options: ScoreOptions = ScoreOptions(),
) -> tuple[list[ScoreRecord], CorpusSummary, list[tuple[int, str, TransportPlan]]]:
    """Score aligned corpus files pair by pair.

    Pairs may be scored concurrently (``options.threads``); the record
    list always preserves input order, so output is byte-identical
    regardless of thread count.  Returns the ordered records, the
    summary, and (when ``options.dump_plans``) the transport plans as
    (pair_id, leg, plan) tuples.
    """
    hyps = _read_corpus(hyp_path)
    refs = _read_corpus(ref_path)
    srcs = _read_corpus(src_path) if src_path is not None else None
    if len(hyps) != len(refs):
        raise ValueError(
            f"line-count mismatch: {hyp_path} has {len(hyps)} lines, "
            f"{ref_path} has {len(refs)}"
        )
    if srcs is not None and len(srcs) != len(hyps):
        raise ValueError(
            f"line-count mismatch: {src_path} has {len(srcs)} lines, "
            f"{hyp_path} has {len(hyps)}"
        )
    table = load_embeddings(embed_path)

    def work(i: int):
        src = None if srcs is None else srcs[i]
        return _score_pair_full(i, hyps[i], refs[i], src, table, options)

    indices = range(len(hyps))
    if options.threads > 1:
        with ThreadPoolExecutor(max_workers=options.threads) as pool:
            results = list(pool.map(work, indices))
    else:
        results = [work(i) for i in indices]

    records = [rec for rec, _, _ in results]
    plans: list[tuple[int, str, TransportPlan]] = []
    if options.dump_plans:
        for rec, seq_plan, copy_plan in results:
            if seq_plan is not None:
                plans.append((rec.pair_id, "seq", seq_plan))
            if copy_plan is not None:
                plans.append((rec.pair_id, "copy", copy_plan))

    seq_vals = [r.ot_seq for r in records if r.ot_seq is not None]
    copy_vals = [r.ot_copy for r in records if r.ot_copy is not None]
    failures = sum(
        1 for r in records if r.status == SolverStatus.NUMERICAL_FAILURE.value
    )
    summary = CorpusSummary(
        pairs=len(records),
        mean_ot_seq=float(np.mean(seq_vals)) if seq_vals else None,
        mean_ot_copy=float(np.mean(copy_vals)) if copy_vals else None,
        corpus_bleu=corpus_bleu(hyps, [[r] for r in refs]),
        solver_failures=failures,
    )
    return records, summary, plans


def gamma_sweep(
    seq_losses,
    mle_losses,
    gammas=DEFAULT_GAMMA_GRID,
) -> list[tuple[float, float]]:
    """Mean combined loss for each candidate sequence-loss weight.

    For each gamma, averages combined_loss(mle_i, seq_i, 0, gamma) over
    the paired loss lists.  Returns (gamma, mean) rows for external
    plotting.
    """
    seq = [float(x) for x in seq_losses]
    mle = [float(x) for x in mle_losses]
    if not seq or not mle:
        raise ValueError("loss lists must be nonempty")
    if len(seq) != len(mle):
        raise ValueError(
            f"loss lists must have equal length: {len(seq)} vs {len(mle)}"
        )
    rows = []
    for gamma in gammas:
        w = LossWeights(gamma_seq=float(gamma), gamma_copy=0.0)
        total = sum(combined_loss(m, s, 0.0, w) for m, s in zip(mle, seq))
        rows.append((float(gamma), total / len(seq)))
    return rows
