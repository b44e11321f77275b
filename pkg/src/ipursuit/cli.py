"""Command-line harness.

Subcommands: cluster (user data), synth-sweep (accuracy grids on synthetic
ensembles), ratio-experiment (random-subspace affinity vs its limit),
theory-check (guarantee report), singular-values (spectrum + drop
recommendation).

Exit codes: 0 success, 2 usage/validation error, 1 runtime failure. All
validation happens before any output file is opened, so a failing run never
leaves partial artifacts. CSV outputs get a sidecar <out>.meta.json with the
config echo, seed, version, and timing; JSON outputs embed those fields
directly (timing_seconds is the only field that varies between reruns).
"""

from __future__ import annotations

import argparse
import re
import sys
import time

import numpy as np

from . import __version__
from . import experiments, io, theory
from .errors import IPursuitError
from .linalg import child_rng, numerical_rank, seeded_rng
from .pipeline import (
    estimate_intersection_dim,
    ipursuit,
    kmeans_baseline,
    tsc_baseline,
)
from .solver import SolverConfig


class _UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# flag value parsers
# ---------------------------------------------------------------------------

def parse_int_list(text: str):
    """Accept "a:b:step" (inclusive), comma lists, or a single integer."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) not in (2, 3):
            raise _UsageError(f"bad range {text!r}, expected start:stop[:step]")
        try:
            start, stop = int(parts[0]), int(parts[1])
            step = int(parts[2]) if len(parts) == 3 else 1
        except ValueError:
            raise _UsageError(f"bad range {text!r}") from None
        if step <= 0 or stop < start:
            raise _UsageError(f"bad range {text!r}")
        return list(range(start, stop + 1, step))
    try:
        return [int(p) for p in text.split(",") if p.strip() != ""]
    except ValueError:
        raise _UsageError(f"bad integer list {text!r}") from None


def parse_dim_rule(text: str):
    """A dimension rule: either "s+OFFSET" / "s-OFFSET" or a fixed integer."""
    text = text.strip()
    match = re.fullmatch(r"s([+-]\d+)", text)
    if match:
        offset = int(match.group(1))
        return lambda s: s + offset
    try:
        fixed = int(text)
    except ValueError:
        raise _UsageError(f"bad dimension rule {text!r}") from None
    return lambda s: fixed


def parse_enhance(text: str):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise _UsageError(f"--enhance takes 'auto' or an integer, got {text!r}") from None
    if value < 0:
        raise _UsageError("--enhance must be >= 0")
    return value


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        primal_tol=args.tol, dual_tol=args.tol, max_iters=args.max_iters
    )


def cmd_cluster(args) -> int:
    if args.k < 1:
        raise _UsageError(f"--k must be >= 1, got {args.k}")
    if args.q < 1:
        raise _UsageError(f"--q must be >= 1, got {args.q}")
    enhance = parse_enhance(args.enhance) if args.enhance is not None else None
    if args.method != "ipursuit" and enhance is not None:
        raise _UsageError(f"--enhance does not apply to method {args.method!r}")
    config = _solver_config(args)

    started = time.perf_counter()
    D = io.load_csv(args.input)
    rng = child_rng(args.seed, 0)
    drop = 0
    if args.method == "ipursuit":
        result = ipursuit(D, args.k, q=args.q, config=config,
                          enhance_dim=enhance, rng=rng)
        labels = result.assignment.labels
        drop = result.drop_dim
    elif args.method == "tsc":
        labels = tsc_baseline(D, args.k, q=args.q, rng=rng).labels
    else:
        labels = kmeans_baseline(D, args.k, rng=rng).labels
    accuracy = None
    if D.labels is not None:
        accuracy = theory.clustering_accuracy(labels, D.labels)
    elapsed = time.perf_counter() - started

    record = {
        "command": "cluster",
        "config": {
            "input": args.input,
            "k": args.k,
            "q": args.q,
            "method": args.method,
            "enhance": args.enhance,
            "seed": args.seed,
            "tol": args.tol,
            "max_iters": args.max_iters,
        },
        "seed": args.seed,
        "version": __version__,
        "n_points": D.n_points,
        "ambient_dim": D.ambient_dim,
        "drop_dim": drop,
        "labels": [int(x) for x in labels],
        "accuracy": accuracy,
        "timing_seconds": elapsed,
    }
    if args.labels_out:
        io.save_labels_csv(args.labels_out, labels)
    if args.out:
        io.save_json(args.out, record)
    if accuracy is not None:
        print(f"accuracy {accuracy:.6f}")
    print(f"clustered {D.n_points} points into {args.k} groups "
          f"({args.method}, {elapsed:.2f}s)")
    return 0


def _sweep_cells(args):
    if args.preset is not None:
        if args.preset == "fig2a":
            return experiments.fig_intersection_cells()
        return experiments.fig_cluster_cells()
    if args.M is None or args.m_rule is None:
        raise _UsageError("explicit sweeps need --M and --m-rule (or use --preset)")
    m_rule = parse_dim_rule(args.m_rule)
    shat_rule = parse_dim_rule(args.shat_rule)
    if args.s_list is not None:
        if args.K is None:
            raise _UsageError("an s sweep needs --K")
        s_values = parse_int_list(args.s_list)
        return [
            experiments.SweepCell("s", s, args.M, args.K, m_rule(s), s,
                                  max(shat_rule(s), 0))
            for s in s_values
        ]
    if args.k_list is not None:
        if args.s is None:
            raise _UsageError("a K sweep needs --s")
        k_values = parse_int_list(args.k_list)
        m = m_rule(args.s)
        shat = max(shat_rule(args.s), 0)
        return [
            experiments.SweepCell("K", k, args.M, k, m, args.s, shat)
            for k in k_values
        ]
    raise _UsageError("need --s-list or --k-list (or --preset)")


def cmd_synth_sweep(args) -> int:
    cells = _sweep_cells(args)
    if args.trials < 1:
        raise _UsageError("--trials must be >= 1")
    if args.n_per_cluster < 1:
        raise _UsageError("--n-per-cluster must be >= 1")
    try:
        for cell in cells:
            cell.validate()
    except IPursuitError as exc:
        raise _UsageError(str(exc)) from None
    config = _solver_config(args)

    started = time.perf_counter()
    rows = experiments.run_sweep(
        cells,
        n_per_cluster=args.n_per_cluster,
        trials=args.trials,
        seed=args.seed,
        q=args.q,
        config=config,
        workers=args.workers,
    )
    elapsed = time.perf_counter() - started
    fields = ["param", "value", "method", "mean_accuracy", "std_accuracy",
              "trials", "n_per_cluster"]
    io.save_table_csv(args.out, fields, rows)
    meta = {
        "command": "synth-sweep",
        "config": {
            "preset": args.preset,
            "cells": [cell.__dict__ for cell in cells],
            "n_per_cluster": args.n_per_cluster,
            "trials": args.trials,
            "q": args.q,
            "tol": args.tol,
            "max_iters": args.max_iters,
            "workers": args.workers,
        },
        "seed": args.seed,
        "version": __version__,
        "timing_seconds": elapsed,
    }
    io.save_json(args.out + ".meta.json", meta)
    print(f"wrote {args.out} ({len(rows)} rows, {len(cells)} grid points, "
          f"{elapsed:.1f}s)")
    return 0


def cmd_ratio_experiment(args) -> int:
    if args.trials < 1:
        raise _UsageError("--trials must be >= 1")
    s_values = parse_int_list(args.s_list)
    started = time.perf_counter()
    try:
        rows = theory.affinity_ratio_experiment(
            args.M, args.K, s_values, m_ratio=args.m_ratio,
            trials=args.trials, rng=seeded_rng(args.seed),
            sqrt_convention=args.sqrt_convention,
        )
    except IPursuitError as exc:
        raise _UsageError(str(exc)) from None
    elapsed = time.perf_counter() - started
    fields = ["s", "m", "limit", "mean_ratio", "min_ratio", "max_ratio", "trials"]
    io.save_table_csv(args.out, fields, rows)
    meta = {
        "command": "ratio-experiment",
        "config": {
            "M": args.M, "K": args.K, "s_list": s_values,
            "m_ratio": args.m_ratio, "trials": args.trials,
            "sqrt_convention": args.sqrt_convention,
        },
        "seed": args.seed,
        "version": __version__,
        "timing_seconds": elapsed,
    }
    io.save_json(args.out + ".meta.json", meta)
    print(f"wrote {args.out} ({len(rows)} rows, {elapsed:.1f}s)")
    return 0


def cmd_theory_check(args) -> int:
    synthetic = args.input is None
    if synthetic:
        missing = [name for name in ("M", "K", "m", "s", "n")
                   if getattr(args, name) is None]
        if missing:
            raise _UsageError(
                "synthetic theory-check needs --" + " --".join(missing)
            )
        if args.ensemble is not None:
            raise _UsageError("--ensemble only applies together with --input")
    else:
        if args.ensemble is None:
            raise _UsageError("--input needs --ensemble (the subspace description)")
    config = _solver_config(args)

    started = time.perf_counter()
    if synthetic:
        record = experiments.theory_check_synthetic(
            args.M, args.K, args.m, args.s, args.n,
            kappa=args.kappa, seed=args.seed, q=args.q, config=config,
        )
    else:
        D = io.load_csv(args.input)
        ens = io.load_ensemble_json(args.ensemble)
        record = experiments.theory_check_data(
            ens, D, kappa=args.kappa, seed=args.seed, q=args.q, config=config,
        )
    record["command"] = "theory-check"
    record["seed"] = args.seed
    record["timing_seconds"] = time.perf_counter() - started
    io.save_json(args.out, record)
    rep = record["report"]
    print(f"guarantee_ok={rep['guarantee_ok']} accuracy={rep['accuracy']}")
    print(f"wrote {args.out}")
    return 0


def cmd_singular_values(args) -> int:
    if args.top < 1:
        raise _UsageError("--top must be >= 1")
    started = time.perf_counter()
    D = io.load_csv(args.input)
    sv = np.linalg.svd(D.points, compute_uv=False)
    rank = numerical_rank(sv)
    usable = sv[:rank]
    recommended = 0
    if usable.size >= 2:
        recommended = estimate_intersection_dim(usable)
    top = sv[: args.top]
    rows = [
        {"index": i + 1, "singular_value": float(val)}
        for i, val in enumerate(top)
    ]
    elapsed = time.perf_counter() - started
    io.save_table_csv(args.out, ["index", "singular_value"], rows)
    meta = {
        "command": "singular-values",
        "config": {"input": args.input, "top": args.top},
        "seed": None,
        "version": __version__,
        "numerical_rank": rank,
        "recommended_drop": recommended,
        "timing_seconds": elapsed,
    }
    io.save_json(args.out + ".meta.json", meta)
    print(f"rank {rank}, recommended drop {recommended}")
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_solver_flags(sub, tol_default=1e-7, iters_default=20000):
    sub.add_argument("--tol", type=float, default=tol_default,
                     help="solver stopping tolerance (primal and dual)")
    sub.add_argument("--max-iters", type=int, default=iters_default,
                     help="solver iteration cap per direction")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipursuit",
        description="Innovation pursuit subspace clustering and its guarantees.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("cluster", help="cluster a CSV dataset")
    p.add_argument("--input", required=True, help="CSV, one point per row")
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--enhance", default=None,
                   help="'auto' or the number of leading directions to drop")
    p.add_argument("--q", type=int, default=3, help="affinity row sparsity")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=["ipursuit", "tsc", "kmeans"],
                   default="ipursuit")
    p.add_argument("--out", default=None, help="JSON result record path")
    p.add_argument("--labels-out", default=None, help="labels CSV path")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_cluster)

    p = subs.add_parser("synth-sweep", help="accuracy sweep on synthetic data")
    p.add_argument("--preset", choices=["fig2a", "fig2b"], default=None)
    p.add_argument("--M", type=int, default=None, help="ambient dimension")
    p.add_argument("--K", type=int, default=None, help="clusters (s sweep)")
    p.add_argument("--s", type=int, default=None, help="intersection dim (K sweep)")
    p.add_argument("--m-rule", default=None,
                   help="cluster dim rule: 's+2' or a fixed integer")
    p.add_argument("--shat-rule", default="s-5",
                   help="enhancement drop rule: 's-5' or a fixed integer")
    p.add_argument("--s-list", default=None, help="e.g. 10:40:5 or 10,20,30")
    p.add_argument("--k-list", default=None, help="e.g. 5:10")
    p.add_argument("--n-per-cluster", type=int, default=50)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--workers", type=int, default=experiments.default_workers(),
                   help=f"trial parallelism (default ${experiments.WORKERS_ENV} or 1)")
    p.add_argument("--out", required=True, help="output CSV path")
    _add_solver_flags(p, tol_default=1e-5, iters_default=3000)
    p.set_defaults(func=cmd_synth_sweep)

    p = subs.add_parser("ratio-experiment",
                        help="random-subspace affinity against its limit")
    p.add_argument("--M", type=int, default=10000)
    p.add_argument("--K", type=int, default=10)
    p.add_argument("--s-list", default="10:300:10")
    p.add_argument("--m-ratio", type=float, default=1.5)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sqrt-convention", action="store_true",
                   help="report aff/sqrt(limit) instead of aff^2/limit")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_ratio_experiment)

    p = subs.add_parser("theory-check", help="guarantee report (JSON)")
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--n", type=int, default=None, help="points per cluster")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--input", default=None, help="labeled CSV dataset")
    p.add_argument("--ensemble", default=None, help="subspace-bases JSON")
    p.add_argument("--out", required=True, help="output JSON path")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_theory_check)

    p = subs.add_parser("singular-values",
                        help="data spectrum and drop recommendation")
    p.add_argument("--input", required=True)
    p.add_argument("--top", type=int, default=50)
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_singular_values)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (IPursuitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
