"""Cluster separability metrics over labeled point sets.

Two metrics quantify how well a feature separates utterance groups:

* Silhouette coefficient: mean over samples of (b - a) / max(a, b),
  where a is the mean distance to the sample's own group and b the
  smallest mean distance to any other group. Range [-1, 1].
* Geometric separability index: the fraction of samples whose nearest
  neighbour carries the same label. Range [0, 1].

Both use Euclidean distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, SingleLabel


@dataclass(frozen=True)
class MetricPair:
    sc: float
    gsi: float


class LabeledPointSet:
    """Points of equal dimension with one group label per point."""

    def __init__(self, points, labels):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2:
            raise DimensionMismatch("points must form a 2-D array (n, dim)")
        labs = np.asarray(labels)
        if labs.shape[0] != pts.shape[0]:
            raise DimensionMismatch(
                f"{pts.shape[0]} points but {labs.shape[0]} labels"
            )
        self.points = pts
        self.labels = labs

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def pairwise_distances(pset: LabeledPointSet | np.ndarray) -> np.ndarray:
    """Symmetric matrix of Euclidean distances with a zero diagonal."""
    pts = pset.points if isinstance(pset, LabeledPointSet) else np.asarray(pset)
    sq = np.sum(pts ** 2, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (pts @ pts.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def silhouette_coefficient(pset: LabeledPointSet) -> float:
    """Mean silhouette score over all samples.

    Samples in singleton groups score 0, as do samples whose intra- and
    nearest-cluster distances are both 0.
    """
    labels = pset.labels
    uniq, inverse = np.unique(labels, return_inverse=True)
    if uniq.size < 2:
        raise SingleLabel("silhouette needs at least two distinct labels")
    d = pairwise_distances(pset)
    n = len(pset)

    # per-sample summed distance to each group
    group_sums = np.zeros((n, uniq.size))
    counts = np.zeros(uniq.size)
    for k in range(uniq.size):
        mask = inverse == k
        counts[k] = mask.sum()
        group_sums[:, k] = d[:, mask].sum(axis=1)

    own = counts[inverse]
    rows = np.arange(n)
    scores = np.zeros(n)
    multi = own > 1
    a = np.zeros(n)
    a[multi] = group_sums[rows[multi], inverse[multi]] / (own[multi] - 1)

    other_means = group_sums / counts[None, :]
    other_means[rows, inverse] = np.inf
    b = other_means.min(axis=1)

    denom = np.maximum(a, b)
    valid = multi & (denom > 0)
    scores[valid] = (b[valid] - a[valid]) / denom[valid]
    return float(scores.mean())


def gsi(pset: LabeledPointSet) -> float:
    """Fraction of samples whose nearest neighbour shares their label.

    The nearest neighbour excludes the sample itself; exact distance ties
    resolve to the lowest index, so the result is deterministic.
    """
    if len(pset) < 2:
        raise DimensionMismatch("gsi needs at least two points")
    d = pairwise_distances(pset)
    np.fill_diagonal(d, np.inf)
    nearest = np.argmin(d, axis=1)  # first minimum = lowest index
    return float(np.mean(pset.labels[nearest] == pset.labels))


def evaluate_metrics(pset: LabeledPointSet) -> MetricPair:
    """Compute both separability metrics for one labeled set."""
    return MetricPair(sc=silhouette_coefficient(pset), gsi=gsi(pset))


def standardize(points: np.ndarray) -> np.ndarray:
    """Z-score each feature column; constant columns become 0."""
    pts = np.asarray(points, dtype=np.float64)
    mean = pts.mean(axis=0)
    std = pts.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    return (pts - mean) / safe
