"""Command-line front end.

Subcommands:
    score   score hypothesis/reference (and optional source) corpora
    sweep   mean combined loss over a grid of sequence-loss weights
    flow    run the discrete gradient-flow demo and print its trajectory

Configuration values may come from a key=value file selected with
--config or the SEQOT_CONFIG environment variable; command-line flags
override file values.  Exit codes: 0 success, 1 input error, 2 solver
failures present in a scoring run.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .core import CostKind, SolverConfig
from .flow import FlowState, run_flow, trajectory_lines
from .scoring import (
    DEFAULT_GAMMA_GRID,
    RECORD_HEADER,
    ScoreOptions,
    gamma_sweep,
    score_corpus,
)

CONFIG_ENV_VAR = "SEQOT_CONFIG"

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_SOLVER_FAILURES = 2

_OPTION_TYPES = {
    "cost": str,
    "solver": str,
    "beta": float,
    "inner_k": int,
    "epsilon": float,
    "outer_iters": int,
    "tolerance": float,
    "tau": float,
    "gamma_seq": float,
    "gamma_copy": float,
    "oov": str,
    "dump_plans": lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
    "seed": int,
    "threads": int,
}

_DEFAULTS = {
    "cost": "cosine",
    "solver": "ipot",
    "beta": 0.5,
    "inner_k": 1,
    "epsilon": 10.0,
    "outer_iters": 2000,
    "tolerance": 1e-9,
    "tau": 0.9,
    "gamma_seq": 0.1,
    "gamma_copy": 0.0,
    "oov": "auto",
    "dump_plans": False,
    "seed": 0,
    "threads": 1,
}


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{no}: expected key=value")
            key, _, val = line.partition("=")
            key = key.strip().lower().replace("-", "_")
            if key not in _OPTION_TYPES:
                raise ValueError(f"{path}:{no}: unknown option {key!r}")
            try:
                values[key] = _OPTION_TYPES[key](val.strip())
            except ValueError:
                raise ValueError(f"{path}:{no}: bad value for {key!r}") from None
    return values


def _resolve_options(args) -> dict:
    merged = dict(_DEFAULTS)
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        merged.update(_read_config_file(config_path))
    for key in _OPTION_TYPES:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            merged[key] = flag_val
    return merged


def _score_options(merged: dict) -> ScoreOptions:
    from .embedding import LossWeights

    cfg = SolverConfig(
        beta=merged["beta"],
        outer_iters=merged["outer_iters"],
        inner_k=merged["inner_k"],
        epsilon=merged["epsilon"],
        tolerance=merged["tolerance"],
    )
    oov = None if merged["oov"] == "auto" else merged["oov"]
    return ScoreOptions(
        cost_kind=CostKind(merged["cost"]),
        solver=merged["solver"],
        config=cfg,
        oov_policy=oov,
        tau=merged["tau"],
        weights=LossWeights(
            gamma_seq=merged["gamma_seq"], gamma_copy=merged["gamma_copy"]
        ),
        threads=merged["threads"],
        dump_plans=merged["dump_plans"],
        seed=merged["seed"],
    )


def _add_option_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--cost", choices=[k.value for k in CostKind])
    parser.add_argument("--solver", choices=["ipot", "sinkhorn"])
    parser.add_argument("--beta", type=float)
    parser.add_argument("--inner-k", dest="inner_k", type=int)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--outer-iters", dest="outer_iters", type=int)
    parser.add_argument("--tolerance", type=float)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--gamma-seq", dest="gamma_seq", type=float)
    parser.add_argument("--gamma-copy", dest="gamma_copy", type=float)
    parser.add_argument("--oov", choices=["auto", "skip", "unk", "error"])
    parser.add_argument("--dump-plans", dest="dump_plans",
                        action="store_const", const=True)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)


def _cmd_score(args, out, err) -> int:
    merged = _resolve_options(args)
    options = _score_options(merged)
    records, summary, plans = score_corpus(
        args.hyp, args.ref, args.src, args.embeddings, options
    )
    out.write(RECORD_HEADER + "\n")
    for rec in records:
        out.write(rec.to_line() + "\n")
    for pair_id, leg, plan in plans:
        mat = plan.matrix
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                if mat[i, j] != 0.0:
                    out.write(
                        f"plan\t{pair_id}\t{leg}\t{i}\t{j}\t{mat[i, j]:.10g}\n"
                    )
    err.write(summary.to_line() + "\n")
    return EXIT_SOLVER_FAILURES if summary.solver_failures else EXIT_OK


def _read_floats(path) -> list[float]:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValueError(f"{path}:{no}: unparseable float {line!r}") from None
    return values


def _cmd_sweep(args, out, err) -> int:
    seq = _read_floats(args.seq_losses)
    mle = _read_floats(args.mle_losses)
    gammas = (
        [float(g) for g in args.gammas.split(",")]
        if args.gammas
        else DEFAULT_GAMMA_GRID
    )
    out.write("gamma\tmean_combined_loss\n")
    for gamma, mean in gamma_sweep(seq, mle, gammas):
        out.write(f"{gamma:.10g}\t{mean:.10g}\n")
    return EXIT_OK


def _cmd_flow(args, out, err) -> int:
    merged = _resolve_options(args)
    cfg = SolverConfig(
        beta=merged["beta"],
        outer_iters=merged["outer_iters"],
        inner_k=merged["inner_k"],
        epsilon=merged["epsilon"],
        tolerance=merged["tolerance"],
    )
    rng = np.random.default_rng(merged["seed"])
    support = rng.normal(size=(args.atoms, args.dim))
    target = rng.uniform(0.05, 1.0, size=args.atoms)
    target /= target.sum()
    state = FlowState(
        support=support,
        theta=np.zeros(args.atoms),
        target=target,
        h=args.h,
        eta=args.eta,
    )
    _, trajectory = run_flow(state, args.max_steps, args.stop_tv, cfg=cfg)
    for line in trajectory_lines(trajectory):
        out.write(line + "\n")
    final_tv = trajectory[-1].tv
    err.write(f"flow: steps={trajectory[-1].step} final_tv={final_tv:.10g}\n")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqot",
        description="Sequence scoring with optimal-transport distances.",
    )
    parser.add_argument("--config", help="key=value option file "
                        f"(default: ${CONFIG_ENV_VAR})")
    sub = parser.add_subparsers(dest="command", required=True)

    p_score = sub.add_parser("score", help="score aligned corpus files")
    p_score.add_argument("--hyp", required=True, help="hypothesis corpus")
    p_score.add_argument("--ref", required=True, help="reference corpus")
    p_score.add_argument("--src", help="optional source corpus (copy leg)")
    p_score.add_argument("--embeddings", required=True, help="embedding table")
    _add_option_flags(p_score)
    p_score.set_defaults(func=_cmd_score)

    p_sweep = sub.add_parser("sweep", help="sweep the sequence-loss weight")
    p_sweep.add_argument("--seq-losses", dest="seq_losses", required=True,
                         help="file with one sequence loss per line")
    p_sweep.add_argument("--mle-losses", dest="mle_losses", required=True,
                         help="file with one likelihood loss per line")
    p_sweep.add_argument("--gammas", help="comma-separated weights "
                         "(default grid includes 0.1)")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_flow = sub.add_parser("flow", help="run the gradient-flow demo")
    p_flow.add_argument("--atoms", type=int, default=10)
    p_flow.add_argument("--dim", type=int, default=2)
    p_flow.add_argument("--h", type=float, default=0.5)
    p_flow.add_argument("--eta", type=float, default=0.1)
    p_flow.add_argument("--max-steps", dest="max_steps", type=int, default=500)
    p_flow.add_argument("--stop-tv", dest="stop_tv", type=float, default=0.05)
    _add_option_flags(p_flow)
    p_flow.set_defaults(func=_cmd_flow)

    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, out, err)
    except (OSError, ValueError, TypeError) as exc:
        err.write(f"seqot: error: {exc}\n")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
