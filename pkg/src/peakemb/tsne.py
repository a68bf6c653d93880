"""Exact t-SNE projection to two dimensions.

Plain O(n^2) implementation: per-point Gaussian bandwidths found by
binary search on the conditional distribution's entropy, symmetrized
joint probabilities, Student-t (one degree of freedom) affinities in the
plane, and gradient descent with momentum and early exaggeration. Runs
are deterministic for a given seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfig, PerplexityTooHigh, TooFewPoints
from .metrics import LabeledPointSet

_PROB_FLOOR = 1e-12
_ENTROPY_TOL = 1e-5
_MAX_BISECTIONS = 50


@dataclass(frozen=True)
class TsneConfig:
    """Optimizer and neighbourhood parameters.

    Momentum starts at ``momentum_initial`` and switches to
    ``momentum_final`` after ``momentum_switch_iter`` iterations; joint
    probabilities are multiplied by ``early_exaggeration`` for the first
    ``exaggeration_iters`` iterations.
    """

    perplexity: float = 15.0
    iterations: int = 1000
    learning_rate: float = 100.0
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch_iter: int = 250
    early_exaggeration: float = 4.0
    exaggeration_iters: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.perplexity <= 0 or self.learning_rate <= 0:
            raise InvalidConfig("perplexity and learning_rate must be positive")
        if self.iterations < 1:
            raise InvalidConfig("iterations must be >= 1")
        for m in (self.momentum_initial, self.momentum_final):
            if not (0.0 <= m < 1.0):
                raise InvalidConfig("momentum must lie in [0, 1)")
        if self.early_exaggeration <= 0:
            raise InvalidConfig("early_exaggeration must be positive")


@dataclass(frozen=True)
class Projection2D:
    """2-D coordinates, one per input point, with optimizer diagnostics."""

    coordinates: np.ndarray
    labels: np.ndarray
    final_kl: float
    kl_checkpoints: dict[int, float] = field(default_factory=dict)


def conditional_probabilities(
    points: np.ndarray, perplexity: float
) -> tuple[np.ndarray, np.ndarray]:
    """Row-stochastic conditional affinities with matched perplexity.

    For each point a Gaussian bandwidth is bisected (at most
    ``_MAX_BISECTIONS`` steps) until the conditional distribution's
    entropy is within ``_ENTROPY_TOL`` of log(perplexity).

    Returns
    -------
    (P, H) : conditional probability matrix with a zero diagonal, and the
        per-point entropies actually achieved (natural log).
    """
    pts = np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    sq = np.sum(pts ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.maximum(d2, 0.0, out=d2)

    target = np.log(perplexity)
    P = np.zeros((n, n))
    H = np.zeros(n)
    others = np.arange(n)
    for i in range(n):
        mask = others != i
        di = d2[i, mask]
        beta = 1.0
        lo, hi = -np.inf, np.inf
        p = np.zeros_like(di)
        h = 0.0
        for _ in range(_MAX_BISECTIONS):
            p = np.exp(-di * beta)
            total = p.sum()
            if total <= 0.0:
                h = 0.0
            else:
                p = p / total
                nz = p > 0
                h = float(-np.sum(p[nz] * np.log(p[nz])))
            if abs(h - target) <= _ENTROPY_TOL:
                break
            if h > target:
                lo = beta
                beta = beta * 2.0 if not np.isfinite(hi) else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = beta * 0.5 if not np.isfinite(lo) else 0.5 * (beta + lo)
        P[i, mask] = p
        H[i] = h
    return P, H


def joint_probabilities(
    points: np.ndarray, perplexity: float
) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized joint affinities, floored off-diagonal and summing to 1."""
    cond, entropies = conditional_probabilities(points, perplexity)
    n = cond.shape[0]
    P = (cond + cond.T) / (2.0 * n)
    off = ~np.eye(n, dtype=bool)
    P[off] = np.maximum(P[off], _PROB_FLOOR)
    P /= P.sum()
    return P, entropies


def _student_t_affinities(Y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    sq = np.sum(Y ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (Y @ Y.T)
    np.maximum(d2, 0.0, out=d2)
    W = 1.0 / (1.0 + d2)
    np.fill_diagonal(W, 0.0)
    Q = np.maximum(W / W.sum(), _PROB_FLOOR)
    return Q, W


def _kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def tsne_project(
    pset: LabeledPointSet,
    cfg: TsneConfig | None = None,
    initial_coords: np.ndarray | None = None,
) -> Projection2D:
    """Project a labeled point set onto the plane with exact t-SNE.

    Initial coordinates default to a seeded standard normal scaled by
    1e-4; passing ``initial_coords`` overrides them (used for
    equivariance testing). KL divergence against the unexaggerated joint
    distribution is recorded at iterations {100, 250, 500, 1000} that fall
    within the run.

    Raises
    ------
    TooFewPoints
        Fewer than 5 points.
    PerplexityTooHigh
        ``perplexity >= (n - 1) / 3``.
    """
    cfg = cfg or TsneConfig()
    n = len(pset)
    if n < 5:
        raise TooFewPoints(f"t-SNE needs at least 5 points, got {n}")
    if cfg.perplexity >= (n - 1) / 3.0:
        raise PerplexityTooHigh(
            f"perplexity {cfg.perplexity} too high for {n} points "
            f"(needs < {(n - 1) / 3.0:.2f})"
        )

    P, _ = joint_probabilities(pset.points, cfg.perplexity)

    if initial_coords is not None:
        Y = np.array(initial_coords, dtype=np.float64, copy=True)
        if Y.shape != (n, 2):
            raise InvalidConfig(f"initial_coords must have shape ({n}, 2)")
    else:
        rng = np.random.default_rng(cfg.seed)
        Y = rng.standard_normal((n, 2)) * 1e-4

    velocity = np.zeros_like(Y)
    checkpoints = {100, 250, 500, 1000}
    kl_checkpoints: dict[int, float] = {}
    Q = None
    for it in range(1, cfg.iterations + 1):
        exaggerated = it <= cfg.exaggeration_iters
        P_step = P * cfg.early_exaggeration if exaggerated else P
        Q, W = _student_t_affinities(Y)
        G = 4.0 * ((P_step - Q) * W)
        grad = G.sum(axis=1)[:, None] * Y - G @ Y
        momentum = (
            cfg.momentum_initial
            if it <= cfg.momentum_switch_iter
            else cfg.momentum_final
        )
        velocity = momentum * velocity - cfg.learning_rate * grad
        Y = Y + velocity
        if it in checkpoints:
            Q_now, _ = _student_t_affinities(Y)
            kl_checkpoints[it] = _kl_divergence(P, Q_now)

    Q_final, _ = _student_t_affinities(Y)
    final_kl = _kl_divergence(P, Q_final)
    return Projection2D(
        coordinates=Y,
        labels=np.asarray(pset.labels).copy(),
        final_kl=final_kl,
        kl_checkpoints=kl_checkpoints,
    )
