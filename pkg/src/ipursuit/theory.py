"""Quantities that govern when innovation pursuit provably succeeds.

Implements the permeance statistics (how evenly points fill their
subspace), the coherence parameters between innovation subspaces, the
deterministic sufficient condition built from them, closed-form bounds for
the semi-random model, the random-subspace affinity limit with its
edge-distribution parameters, and the alignment bound justifying the
spectrum-trimming enhancement. Also hosts the label-agnostic clustering
accuracy metric and small experiment drivers used by the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import linalg
from .datagen import DataMatrix, SubspaceEnsemble, sample_points
from .errors import (
    DomainError,
    InvalidDims,
    LengthMismatch,
    MissingLabels,
    NotInSpan,
)

_SPAN_TOL = 1e-8
_CONTAIN_TOL = 1e-8


# ---------------------------------------------------------------------------
# accuracy
# ---------------------------------------------------------------------------

def clustering_accuracy(predicted, truth) -> float:
    """Fraction of points labeled correctly under the best label matching.

    The matching maximizes the contingency-table trace (Hungarian method),
    so the metric is invariant to label permutations and handles a predicted
    cluster count different from the true one.
    """
    predicted = np.asarray(predicted, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predicted.shape != truth.shape or predicted.ndim != 1:
        raise LengthMismatch(
            f"label vectors must align, got {predicted.shape} vs {truth.shape}"
        )
    n = predicted.size
    if n == 0:
        raise LengthMismatch("empty label vectors")
    t_vals, t_inv = np.unique(truth, return_inverse=True)
    p_vals, p_inv = np.unique(predicted, return_inverse=True)
    table = np.zeros((t_vals.size, p_vals.size))
    np.add.at(table, (t_inv, p_inv), 1.0)
    rows, cols = linear_sum_assignment(-table)
    return float(table[rows, cols].sum() / n)


def cross_cluster_mass(weights, labels) -> float:
    """Share of affinity mass connecting points with different labels."""
    W = np.asarray(weights, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if labels.shape != (W.shape[0],):
        raise LengthMismatch("labels do not match the affinity size")
    total = W.sum()
    if total <= 0:
        return 0.0
    cross = W[labels[:, None] != labels[None, :]].sum()
    return float(cross / total)


# ---------------------------------------------------------------------------
# permeance statistics
# ---------------------------------------------------------------------------

def _sphere_l1(B, delta):
    return float(np.abs(B.T @ delta).sum())


def _grid_extremes(B):
    thetas = np.linspace(0.0, np.pi, 10000, endpoint=False)
    dirs = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    vals = np.abs(dirs @ B).sum(axis=1)
    return float(vals.min()), float(vals.max())


def _local_extremes(B, restarts, rng):
    m = B.shape[0]
    starts = [linalg.sample_unit_sphere(m, rng) for _ in range(restarts)]
    best_min = math.inf
    best_max = 0.0
    for delta0 in starts:
        # minimization: projected subgradient with diminishing steps
        delta = delta0.copy()
        best_here = _sphere_l1(B, delta)
        for t in range(1, 201):
            g = B @ np.sign(B.T @ delta)
            gnorm = np.linalg.norm(g)
            if gnorm < 1e-15:
                break
            step = 1.0 / (gnorm * math.sqrt(t))
            delta = delta - step * g
            nrm = np.linalg.norm(delta)
            if nrm < 1e-15:
                delta = delta0.copy()
                continue
            delta /= nrm
            best_here = min(best_here, _sphere_l1(B, delta))
        best_min = min(best_min, best_here)
        # maximization: the fixed-point ascent is monotone
        delta = delta0.copy()
        for _ in range(200):
            g = B @ np.sign(B.T @ delta)
            gnorm = np.linalg.norm(g)
            if gnorm < 1e-15:
                break
            new = g / gnorm
            if np.linalg.norm(new - delta) < 1e-12:
                delta = new
                break
            delta = new
        best_max = max(best_max, _sphere_l1(B, delta))
    return best_min, best_max


def permeance_estimate(points, basis, restarts: int = 32, method: str = "auto",
                       rng: np.random.Generator | None = None):
    """Estimate min and max of ``delta -> ||points^T delta||_1`` over unit
    directions inside the subspace spanned by ``basis``.

    Returns (low, high). ``low`` comes from a multi-start projected
    subgradient descent (an upper bound on the true infimum), ``high`` from a
    monotone fixed-point ascent (a lower bound on the true supremum). For a
    2-dimensional subspace a dense angle grid (1e4 points) is exact to grid
    resolution and is used instead, unless ``method="local"`` forces the
    search. Deterministic: the default generator is a fixed-seed PCG64.
    """
    P = linalg.as_matrix(points, "points")
    basis = linalg.as_matrix(basis, "basis")
    if basis.shape[0] != P.shape[0]:
        raise DomainError("basis and points live in different ambient dimensions")
    resid = P - basis @ (basis.T @ P)
    worst = np.linalg.norm(resid, axis=0).max()
    if worst > _SPAN_TOL:
        raise NotInSpan(f"points leave the basis span by {worst:.2e}")
    B = basis.T @ P
    m = B.shape[0]
    if m == 1:
        val = float(np.abs(B).sum())
        return val, val
    if method not in ("auto", "grid", "local"):
        raise DomainError(f"unknown method {method!r}")
    if method == "grid" or (method == "auto" and m == 2):
        if m != 2:
            raise DomainError("the grid oracle only applies to 2-dim subspaces")
        return _grid_extremes(B)
    if rng is None:
        rng = linalg.seeded_rng(0)
    return _local_extremes(B, restarts, rng)


def measured_permeance(ens: SubspaceEnsemble, D: DataMatrix, restarts: int = 32):
    """Aggregate permeance over clusters: (min of cluster lows, max of highs)."""
    if D.labels is None:
        raise MissingLabels("permeance aggregation needs labeled data")
    h_low = math.inf
    h_high = 0.0
    for k in range(ens.n_clusters):
        block = D.points[:, D.labels == k]
        lo, hi = permeance_estimate(block, ens.cluster_basis(k), restarts=restarts)
        h_low = min(h_low, lo)
        h_high = max(h_high, hi)
    return h_low, h_high


# ---------------------------------------------------------------------------
# coherence parameters
# ---------------------------------------------------------------------------

def coherence_params(ens: SubspaceEnsemble, D: DataMatrix):
    """The three coherence parameters (t1, t2, t3) of an ensemble and its data.

    t1: worst affinity between one innovation span and the joint innovation
    span of the others; t2: worst pairwise innovation affinity; t3: largest
    projection norm of any point onto the union of the *other* subspaces.
    """
    if D.labels is None:
        raise MissingLabels("t3 needs per-point cluster labels")
    K = ens.n_clusters
    t1 = 0.0
    t2 = 0.0
    for k in range(K):
        rest = ens.rest_innovation_basis(k)
        if rest.shape[1] and ens.innovations[k].shape[1]:
            t1 = max(t1, linalg.aff_inf(ens.innovations[k], rest))
    for i in range(K):
        for j in range(i + 1, K):
            if ens.innovations[i].shape[1] and ens.innovations[j].shape[1]:
                t2 = max(t2, linalg.aff_inf(ens.innovations[i], ens.innovations[j]))
    t3 = 0.0
    for k in range(K):
        rest = ens.rest_basis(k)
        if rest.shape[1] == 0:
            continue
        block = D.points[:, D.labels == k]
        if block.shape[1] == 0:
            continue
        t3 = max(t3, float(np.linalg.norm(rest.T @ block, axis=0).max()))
    return t1, t2, min(t3, 1.0)


def innovation_assumption_holds(ens: SubspaceEnsemble) -> bool:
    """True iff every cluster's subspace leaves the span of all the others."""
    for k in range(ens.n_clusters):
        V = ens.innovations[k]
        if V.shape[1] == 0:
            return False
        rest = ens.rest_basis(k)
        if rest.shape[1] == 0:
            continue
        resid = V - rest @ (rest.T @ V)
        if np.linalg.norm(resid, 2) <= _CONTAIN_TOL:
            return False
    return True


# ---------------------------------------------------------------------------
# deterministic sufficient condition
# ---------------------------------------------------------------------------

def deterministic_guarantee_holds(h1, h2, t1, t2, t3, K: int) -> bool:
    """Sufficient condition for exact innovation recovery from the permeance
    statistics and coherence parameters. Both inequalities must hold.
    """
    if K < 2:
        raise DomainError("the guarantee involves at least two clusters")
    for name, t in (("t1", t1), ("t2", t2), ("t3", t3)):
        if not (0.0 <= t <= 1.0):
            raise DomainError(f"{name} must be in [0, 1], got {t}")
    if h1 < 0 or h2 < 0:
        raise DomainError("permeance statistics must be nonnegative")
    if t3 >= 1.0:
        raise DomainError("t3 must be strictly below 1")
    if (K - 2) * t2 >= 1.0:
        raise DomainError("(K-2)*t2 must be strictly below 1")
    lean = math.sqrt(t3 * t3 / (1.0 - t3 * t3))
    cond1 = h1 * math.sqrt(1.0 - (K - 2) * t2) >= h2 * (lean + t1)
    cond2 = h1 * math.sqrt(K - 1) >= h2 * (lean + 1.0)
    return bool(cond1 and cond2)


# ---------------------------------------------------------------------------
# semi-random model bounds
# ---------------------------------------------------------------------------

def coherence_ratio(m: int, s: int, K: int, t2: float, t3: float) -> float:
    """Intersection-vs-innovation coherence ratio; the probabilistic guarantee
    needs this to be at least 1.
    """
    if not (0 < s < m):
        raise DomainError(f"need 0 < s < m, got s={s}, m={m}")
    if K < 2:
        raise DomainError("need at least two clusters")
    if not (0.0 <= t3 < 1.0) or not (0.0 <= t2 <= 1.0):
        raise DomainError("coherences must satisfy 0 <= t2 <= 1, 0 <= t3 < 1")
    return (m - s) * (t3 * t3 - (K - 1) * t2 * t2) / (s * (1.0 - t3 * t3))


@dataclass(frozen=True)
class GuaranteeBound:
    """Lower bound on the success probability in the semi-random model."""

    prob_lower: float
    epsilon: float
    zeta: float
    vacuous: bool


def semi_random_guarantee(n, N, m, s, K, t2, t3) -> GuaranteeBound:
    """Probability bound that all innovation directions are recovered when
    coefficients are uniform on the sphere.

    ``n`` is the per-cluster point count and ``N`` the total. When the
    coherence ratio is below 1 the bound does not apply; the result is
    flagged vacuous with NaN values. The bound is also flagged vacuous when
    it is nonpositive.
    """
    if n < 2 or N < 1:
        raise DomainError("need n >= 2 points per cluster")
    z = coherence_ratio(m, s, K, t2, t3)
    if z < 1.0:
        return GuaranteeBound(math.nan, math.nan, z, True)
    a = math.sqrt(s) + z * s / math.sqrt(m - s)
    eps = 0.5 * (-a + math.sqrt(a * a + 2.0 * s * (z - 1.0)))
    prob = 1.0 - 2.0 / n - 2.0 * N * math.exp(-eps * eps)
    return GuaranteeBound(prob, eps, z, prob <= 0.0)


def semi_random_permeance_bounds(n: int, m: int):
    """High-probability (low, high) bounds on the permeance statistics for n
    uniform points on the unit sphere of an m-dim subspace.
    """
    if n < 2 or m < 2:
        raise InvalidDims(f"need n >= 2 and m >= 2, got n={n}, m={m}")
    slack = math.sqrt(2.0 * n * math.log(n) / (m - 1.0))
    h_low = math.sqrt(2.0 / math.pi) * n / math.sqrt(m) - 2.0 * math.sqrt(n) - slack
    h_high = n / math.sqrt(m) + 2.0 * math.sqrt(n) + slack
    return h_low, h_high


# ---------------------------------------------------------------------------
# random-subspace affinity limit and its edge distribution
# ---------------------------------------------------------------------------

def random_affinity_limit(M: int, m: int, K: int, s: int) -> float:
    """Limiting squared top affinity between one innovation span (dim m-s)
    and the union of the rest (dim (K-1)(m-s)+s) under random subspaces.

    Algebraically equals (sqrt(m-s) + sqrt((K-1)(m-s)+s))^2 / M. ``s = m``
    (no innovation) is allowed analytically and gives m/M.
    """
    if M < 1 or K < 1 or m < 1 or not (0 <= s <= m):
        raise DomainError(f"invalid dims M={M}, m={m}, K={K}, s={s}")
    inner = (m - s) * ((K - 2) * (m - s) + m)
    return ((K - 1) * (m - s) + m + 2.0 * math.sqrt(inner)) / M


def affinity_edge_params(M: int, m: int, K: int, s: int):
    """Centering and scale (mu, sigma) of the largest squared affinity
    between random subspaces of dims (m-s) and (K-1)(m-s)+s in R^M.
    """
    if M < 2 or K < 1 or m < 1 or s < 0:
        raise DomainError(f"invalid dims M={M}, m={m}, K={K}, s={s}")
    if s >= m:
        raise DomainError("needs a nonzero innovation dimension (s < m)")
    if s == 0 and K == 1:
        raise DomainError("the complementary span is empty for s=0, K=1")
    phi = 2.0 * math.sqrt((m - s) / M)
    gamma = 2.0 * math.sqrt(((K - 1) * (m - s) + s) / M)
    sin_phi = math.sin(phi)
    sin_gamma = math.sin(gamma)
    if sin_phi <= 0.0 or sin_gamma <= 0.0:
        raise DomainError("angle parameters leave the valid range")
    mu = math.sin((phi + gamma) / 2.0) ** 2
    sigma = (math.sin(phi + gamma) ** 4 / (4.0 * (M - 1) ** 2 * sin_phi * sin_gamma)) ** (1.0 / 3.0)
    return mu, sigma


def affinity_ratio_experiment(M: int, K: int, s_list, m_ratio: float = 1.5,
                              trials: int = 50,
                              rng: np.random.Generator | None = None,
                              sqrt_convention: bool = False):
    """Measure top affinity between random subspace pairs against the limit.

    For each s (with m = m_ratio * s, which must be integral) the pair dims
    are p = m - s and r = (K-1)(m-s) + s. One subspace is drawn uniformly at
    random; the other is fixed to the first r coordinate axes — by rotation
    invariance of the uniform measure the affinity has exactly the same
    distribution as for two independent uniform draws, at half the cost.

    Returns one dict per s with mean/min/max of aff^2 / T (or aff / sqrt(T)
    under ``sqrt_convention``).
    """
    if trials < 1:
        raise DomainError("need at least one trial")
    if rng is None:
        rng = linalg.seeded_rng(0)
    rows = []
    for s in s_list:
        m_exact = m_ratio * s
        m = int(round(m_exact))
        if abs(m_exact - m) > 1e-9:
            raise DomainError(f"m_ratio * s = {m_exact} is not an integer")
        if not (0 <= s < m):
            raise DomainError(f"need 0 <= s < m, got s={s}, m={m}")
        p = m - s
        r = (K - 1) * (m - s) + s
        if p + r > M:
            raise DomainError(
                f"pair dims {p}+{r} exceed the ambient dimension {M}"
            )
        limit = random_affinity_limit(M, m, K, s)
        ratios = np.empty(trials)
        for t in range(trials):
            A = linalg.sample_grassmannian(M, p, rng)
            top = np.linalg.svd(A[:r, :], compute_uv=False)[0]
            top = min(float(top), 1.0)
            if sqrt_convention:
                ratios[t] = top / math.sqrt(limit)
            else:
                ratios[t] = top * top / limit
        rows.append(
            {
                "s": int(s),
                "m": m,
                "limit": limit,
                "mean_ratio": float(ratios.mean()),
                "min_ratio": float(ratios.min()),
                "max_ratio": float(ratios.max()),
                "trials": trials,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# alignment of the top singular direction (enhancement rationale)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlignmentBound:
    """Bound on how much the data's top singular direction favors the
    intersection over the innovations."""

    kappa_prime: float
    ratio_bound: float
    epsilon: float
    prob_lower: float


def alignment_ratio_bound(m, s, K, n, t2, kappa) -> AlignmentBound:
    """Closed-form bound for lambda_1/lambda_2, the intersection-to-innovation
    alignment of the top singular direction, holding with the returned
    probability. ``kappa`` must lie in [(m-s)/m, 1).
    """
    if not (0 < s < m):
        raise DomainError(f"need 0 < s < m, got s={s}, m={m}")
    if K < 1 or n < 2:
        raise DomainError("need K >= 1 clusters and n >= 2 points")
    if not (0.0 <= t2 <= 1.0):
        raise DomainError("t2 must be in [0, 1]")
    lo = (m - s) / m
    if not (lo <= kappa < 1.0):
        raise DomainError(f"kappa must be in [{lo}, 1), got {kappa}")
    bracket = math.sqrt(2.0 * K * n / (math.pi * m)) - 2.0 - math.sqrt(2.0 * math.log(n) / (m - 1.0))
    kappa_prime = m * bracket * bracket / ((1.0 + (K - 1) * t2) * n * (m - s) * kappa)
    if kappa_prime > 0:
        ratio_bound = (kappa_prime - 1.0) / (2.0 * math.sqrt(kappa_prime))
    else:
        ratio_bound = -math.inf
    a = math.sqrt(m - s) + kappa * math.sqrt(s) / (1.0 - kappa)
    b = kappa * s / ((1.0 - kappa) * (m - s)) - 1.0
    eps = (m - s) * b / (a + math.sqrt(a * a + 2.0 * (m - s) * b))
    prob = 1.0 - 1.0 / n - 2.0 * K * n * math.exp(-eps * eps)
    return AlignmentBound(kappa_prime, ratio_bound, eps, prob)


@dataclass(frozen=True)
class AlignmentEmpirical:
    frequency: float
    ratio_bound: float
    ratios: np.ndarray


def alignment_ratio_empirical(ens: SubspaceEnsemble, n: int, kappa: float,
                              trials: int, rng: np.random.Generator) -> AlignmentEmpirical:
    """Monte Carlo check of the alignment bound on a given ensemble.

    Each trial samples n points per cluster, takes the top left singular
    direction x1 of the data, and measures ||U^T x1|| / ||V^T x1|| with U the
    intersection basis and V the joint innovation basis. Returns the
    frequency with which the closed-form ratio bound held.
    """
    if ens.intersection_dim == 0:
        raise DomainError("the alignment ratio needs a nonzero intersection")
    dims = set(ens.cluster_dims)
    if len(dims) != 1:
        raise DomainError("needs a homogeneous ensemble (equal cluster dims)")
    if trials < 1:
        raise DomainError("need at least one trial")
    m = dims.pop()
    s = ens.intersection_dim
    K = ens.n_clusters
    t2 = 0.0
    for i in range(K):
        for j in range(i + 1, K):
            t2 = max(t2, linalg.aff_inf(ens.innovations[i], ens.innovations[j]))
    bound = alignment_ratio_bound(m, s, K, n, t2, kappa)
    U = ens.intersection
    V = ens.joint_innovation_basis()
    ratios = np.empty(trials)
    for t in range(trials):
        D = sample_points(ens, n, rng)
        gram = D.points @ D.points.T
        _, vecs = np.linalg.eigh(gram)
        x1 = vecs[:, -1]
        lam1 = np.linalg.norm(U.T @ x1)
        lam2 = max(np.linalg.norm(V.T @ x1), 1e-300)
        ratios[t] = lam1 / lam2
    frequency = float(np.mean(ratios >= bound.ratio_bound))
    return AlignmentEmpirical(frequency, bound.ratio_bound, ratios)


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------

@dataclass
class TheoryReport:
    """Every computable guarantee quantity for one ensemble + dataset.

    Fields that do not apply (no intersection, a single cluster, no kappa
    given) are None. Probability bounds are unclamped; their ``*_vacuous``
    companions flag when they carry no information.
    """

    ambient_dim: int
    n_clusters: int
    cluster_dims: list
    intersection_dim: int
    n_points: int
    h1_est: float
    h2_est: float
    t1: float
    t2: float
    t3: float
    innovation_assumption: bool
    guarantee_ok: bool | None
    coherence_ratio: float | None
    success_prob: float | None
    success_epsilon: float | None
    success_vacuous: bool | None
    affinity_limit: float | None
    edge_mu: float | None
    edge_sigma: float | None
    kappa: float | None
    alignment_kappa_prime: float | None
    alignment_bound: float | None
    alignment_prob: float | None
    accuracy: float | None = None

    def to_dict(self) -> dict:
        out = {}
        for key, val in self.__dict__.items():
            if isinstance(val, (np.floating, np.integer)):
                val = val.item()
            if isinstance(val, np.bool_):
                val = bool(val)
            out[key] = val
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TheoryReport":
        fields = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in fields})


def build_theory_report(ens: SubspaceEnsemble, D: DataMatrix,
                        restarts: int = 32,
                        kappa: float | None = None) -> TheoryReport:
    """Measure an ensemble + dataset against all the closed-form conditions.

    The probabilistic success bound uses the smallest per-cluster point
    count as n. Homogeneous cluster dimension is required for the fields
    that depend on a single m; they are None otherwise.
    """
    if D.labels is None:
        raise MissingLabels("the report needs labeled data")
    h1, h2 = measured_permeance(ens, D, restarts=restarts)
    t1, t2, t3 = coherence_params(ens, D)
    K = ens.n_clusters
    s = ens.intersection_dim
    M = ens.ambient_dim
    N = D.n_points
    counts = np.bincount(D.labels, minlength=K)
    n = int(counts[counts > 0].min())
    dims = set(ens.cluster_dims)
    m = dims.pop() if len(dims) == 1 else None

    guarantee = None
    if K >= 2:
        if t3 < 1.0 and (K - 2) * t2 < 1.0:
            guarantee = deterministic_guarantee_holds(h1, h2, t1, t2, t3, K)
        else:
            # outside the formula's domain the sufficient condition cannot hold
            guarantee = False

    zeta = prob = eps = vac = None
    if m is not None and 0 < s < m and K >= 2 and t3 < 1.0:
        g = semi_random_guarantee(n, N, m, s, K, t2, t3)
        zeta, prob, eps, vac = g.zeta, g.prob_lower, g.epsilon, g.vacuous

    limit = mu = sigma = None
    if m is not None:
        limit = random_affinity_limit(M, m, K, s)
        try:
            mu, sigma = affinity_edge_params(M, m, K, s)
        except DomainError:
            pass

    kp = rb = ap = None
    if kappa is not None:
        if m is None or not (0 < s < m):
            raise DomainError("the alignment bound needs 0 < s < m and equal dims")
        ab = alignment_ratio_bound(m, s, K, n, t2, kappa)
        kp, rb, ap = ab.kappa_prime, ab.ratio_bound, ab.prob_lower

    return TheoryReport(
        ambient_dim=M,
        n_clusters=K,
        cluster_dims=list(ens.cluster_dims),
        intersection_dim=s,
        n_points=N,
        h1_est=h1,
        h2_est=h2,
        t1=t1,
        t2=t2,
        t3=t3,
        innovation_assumption=innovation_assumption_holds(ens),
        guarantee_ok=guarantee,
        coherence_ratio=zeta,
        success_prob=prob,
        success_epsilon=eps,
        success_vacuous=vac,
        affinity_limit=limit,
        edge_mu=mu,
        edge_sigma=sigma,
        kappa=kappa,
        alignment_kappa_prime=kp,
        alignment_bound=rb,
        alignment_prob=ap,
    )
