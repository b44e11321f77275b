"""Seeded experiment drivers behind the CLI: accuracy sweeps over the
intersection dimension or the cluster count, and the combined theory report
on synthetic data.

Each (grid point, trial) pair gets an independent generator derived from the
master seed by key splitting, so results do not depend on execution order
and trials can fan out across processes.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .datagen import make_ensemble_fully_random, sample_points
from .errors import DomainError, InvalidDims
from .linalg import child_rng
from .pipeline import ipursuit
from .solver import SolverConfig
from .theory import build_theory_report, clustering_accuracy

# solver settings for the accuracy sweeps: the affinity ranking stabilizes
# well before the default 1e-7 tolerances, so the sweeps trade precision
# for wall time (library defaults are unchanged)
SWEEP_SOLVER = SolverConfig(primal_tol=1e-5, dual_tol=1e-5, max_iters=3000)

WORKERS_ENV = "IPURSUIT_WORKERS"


def default_workers() -> int:
    """Worker count from the IPURSUIT_WORKERS environment variable (min 1)."""
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SweepCell:
    """One grid point of an accuracy sweep."""

    param: str
    value: int
    M: int
    K: int
    m: int
    s: int
    shat: int

    def validate(self) -> None:
        if not (0 <= self.s < self.m <= self.M):
            raise DomainError(
                f"need 0 <= s < m <= M, got s={self.s}, m={self.m}, M={self.M}"
            )
        if self.K < 2:
            raise DomainError(f"need K >= 2, got {self.K}")
        if self.K * (self.m - self.s) + self.s > self.M:
            raise DomainError(
                f"K(m-s)+s = {self.K * (self.m - self.s) + self.s} exceeds M={self.M}"
            )
        if not (0 <= self.shat):
            raise DomainError(f"drop dimension must be >= 0, got {self.shat}")


def intersection_sweep_cells(M: int, K: int, s_list, m_offset: int = 2,
                             shat_offset: int = 5):
    """Grid over the intersection dimension with m = s + m_offset and the
    enhancement dropping s - shat_offset directions."""
    cells = []
    for s in s_list:
        s = int(s)
        cells.append(
            SweepCell("s", s, M, K, s + m_offset, s, max(s - shat_offset, 0))
        )
    return cells


def cluster_sweep_cells(M: int, s: int, m: int, k_list, shat: int):
    """Grid over the number of clusters at fixed dimensions."""
    return [SweepCell("K", int(K), M, int(K), m, s, shat) for K in k_list]


def fig_intersection_cells():
    """Preset: M=60, K=10, m=s+2, s from 10 to 40, drop s-5."""
    return intersection_sweep_cells(60, 10, range(10, 41))


def fig_cluster_cells():
    """Preset: M=60, s=40, m=42, K from 5 to 10, drop 35."""
    return cluster_sweep_cells(60, 40, 42, range(5, 11), 35)


def _run_trial(task):
    """One (cell, trial) evaluation; module-level so it pickles for workers."""
    cell, trial, seed, n_per_cluster, q, config = task
    axis = int(cell.param == "K")
    rng = child_rng(seed, axis, cell.value, trial)
    ens = make_ensemble_fully_random(cell.M, cell.K, cell.m, cell.s, rng)
    D = sample_points(ens, n_per_cluster, rng)
    plain = ipursuit(D, cell.K, q=q, config=config,
                     rng=child_rng(seed, axis, cell.value, trial, 1))
    acc_plain = clustering_accuracy(plain.assignment.labels, D.labels)
    acc_enh = acc_plain
    if cell.shat > 0:
        enh = ipursuit(D, cell.K, q=q, config=config, enhance_dim=cell.shat,
                       rng=child_rng(seed, axis, cell.value, trial, 2))
        acc_enh = clustering_accuracy(enh.assignment.labels, D.labels)
    return cell, trial, acc_plain, acc_enh


def run_sweep(cells, n_per_cluster: int = 50, trials: int = 10, seed: int = 0,
              q: int = 3, config: SolverConfig | None = None,
              workers: int = 1):
    """Run plain and enhanced clustering over a grid of sweep cells.

    Returns two rows per cell (method "plain" / "enhanced") with the mean
    and population standard deviation of accuracy over trials. Results are
    keyed by (cell, trial), so the worker count does not affect the output.
    """
    if trials < 1:
        raise DomainError("need at least one trial")
    if n_per_cluster < 1:
        raise DomainError("need at least one point per cluster")
    for cell in cells:
        cell.validate()
    if config is None:
        config = SWEEP_SOLVER
    tasks = [
        (cell, trial, seed, n_per_cluster, q, config)
        for cell in cells
        for trial in range(trials)
    ]
    acc = {}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for cell, trial, a_p, a_e in pool.map(_run_trial, tasks):
                acc[(cell, trial)] = (a_p, a_e)
    else:
        for task in tasks:
            cell, trial, a_p, a_e = _run_trial(task)
            acc[(cell, trial)] = (a_p, a_e)
    rows = []
    for cell in cells:
        plain = np.array([acc[(cell, t)][0] for t in range(trials)])
        enh = np.array([acc[(cell, t)][1] for t in range(trials)])
        for method, vals in (("plain", plain), ("enhanced", enh)):
            rows.append(
                {
                    "param": cell.param,
                    "value": cell.value,
                    "method": method,
                    "mean_accuracy": float(vals.mean()),
                    "std_accuracy": float(vals.std()),
                    "trials": trials,
                    "n_per_cluster": n_per_cluster,
                }
            )
    return rows


def theory_check_synthetic(M: int, K: int, m: int, s: int, n: int,
                           kappa: float | None = None, seed: int = 0,
                           q: int = 3,
                           config: SolverConfig | None = None) -> dict:
    """Generate a fully-random ensemble, fill the theory report, and attach
    the pipeline's clustering accuracy. Returns a JSON-ready record."""
    if n < 2:
        raise DomainError("need at least two points per cluster")
    rng = child_rng(seed, 0)
    ens = make_ensemble_fully_random(M, K, m, s, rng)
    D = sample_points(ens, n, rng)
    report = build_theory_report(ens, D, kappa=kappa)
    result = ipursuit(D, K, q=q, config=config, rng=child_rng(seed, 1))
    report.accuracy = clustering_accuracy(result.assignment.labels, D.labels)
    return {
        "config": {
            "M": M, "K": K, "m": m, "s": s, "n_per_cluster": n,
            "kappa": kappa, "seed": seed, "q": q,
        },
        "report": report.to_dict(),
        "version": __version__,
    }


def theory_check_data(ens, D, kappa: float | None = None, seed: int = 0,
                      q: int = 3, config: SolverConfig | None = None) -> dict:
    """Theory report for user-supplied data measured against a user-supplied
    ensemble description."""
    if D.labels is None:
        raise InvalidDims("theory checks need labeled data")
    report = build_theory_report(ens, D, kappa=kappa)
    result = ipursuit(D, ens.n_clusters, q=q, config=config,
                      rng=child_rng(seed, 1))
    report.accuracy = clustering_accuracy(result.assignment.labels, D.labels)
    return {
        "config": {"kappa": kappa, "seed": seed, "q": q,
                   "n_points": D.n_points},
        "report": report.to_dict(),
        "version": __version__,
    }
