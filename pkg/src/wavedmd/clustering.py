"""Cluster labels from per-node coefficients, plus permutation-safe scoring.

Houses the seeded k-means core shared with the spectral oracle. The sign
encoding follows the decentralized rule: each node turns the signs of its
successive mode coefficients into bits of a cluster number, so no global
coordination is needed beyond agreeing on the mode order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InsufficientModesError

ZERO_TOL = 1e-12

KMEANS_RESTARTS = 100
KMEANS_MAX_ITER = 300
KMEANS_REL_TOL = 1e-10


@dataclass(frozen=True)
class ClusterAssignment:
    """Per-node labels with the rule that produced them.

    ``zero_flags`` lists nodes whose deciding entries were numerically zero
    and fell back to the positive side.
    """

    labels: tuple[int, ...]
    k: int
    method: str
    zero_flags: tuple[int, ...] = ()

    @property
    def n(self):
        return len(self.labels)

    def to_csv(self):
        return "node,label\n" + "".join(
            f"{i},{label}\n" for i, label in enumerate(self.labels)
        )


def sign_bit(value, zero_tol=ZERO_TOL):
    """1 for positive entries; numerically zero entries count as positive."""
    return 0 if value < -zero_tol else 1


def is_zero(value, zero_tol=ZERO_TOL):
    return abs(value) < zero_tol


def sign_encode(coeffs, bits):
    """Binary cluster number from coefficient signs.

    ``coeffs`` is one node's real coefficients ordered by ascending
    frequency, constant mode first; bit j comes from entry j+1, so the
    constant mode (same sign everywhere) never contributes.
    """
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    if len(coeffs) < bits + 1:
        raise InsufficientModesError(
            f"need {bits + 1} coefficients including the constant mode, got {len(coeffs)}"
        )
    number = 0
    for j in range(1, bits + 1):
        number += sign_bit(coeffs[j]) << (j - 1)
    return number


def bits_for_k(k):
    """Sign bits needed to address k clusters."""
    if k < 2:
        raise ValueError(f"need k >= 2 clusters, got {k}")
    return int(np.ceil(np.log2(k)))


# ---------------------------------------------------------------------------
# Seeded k-means core (k-means++ init, Lloyd iterations, restart cap)
# ---------------------------------------------------------------------------


def _kmeans_pp_init(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            centers[c] = points[rng.integers(n)]
            continue
        centers[c] = points[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((points - centers[c]) ** 2, axis=1))
    return centers


def _lloyd(points, centers, max_iter, rel_tol):
    prev_inertia = np.inf
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(points.shape[0]), labels].sum())
        for c in range(centers.shape[0]):
            mask = labels == c
            if mask.any():
                centers[c] = points[mask].mean(axis=0)
            else:
                # re-seat an empty cluster at the worst-served point
                centers[c] = points[np.argmax(d2.min(axis=1))]
        if prev_inertia - inertia <= rel_tol * max(prev_inertia, 1e-300):
            break
        prev_inertia = inertia
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    return labels, inertia


def kmeans(points, k, seed, restarts=KMEANS_RESTARTS):
    """Best-of-restarts Lloyd's algorithm; deterministic per seed.

    Every restart draws from its own child generator, so the result does
    not depend on how restarts would be scheduled across workers.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("points must be a nonempty 2-D array")
    streams = np.random.SeedSequence(seed).spawn(restarts)
    best_labels, best_inertia = None, np.inf
    for stream in streams:
        rng = np.random.default_rng(stream)
        centers = _kmeans_pp_init(points, k, rng)
        labels, inertia = _lloyd(points, centers, KMEANS_MAX_ITER, KMEANS_REL_TOL)
        if inertia < best_inertia:
            best_labels, best_inertia = labels, inertia
    return best_labels, best_inertia


def kmeans_assign(rows, k, seed):
    """Cluster per-node coefficient rows into k groups."""
    rows = np.asarray(rows, dtype=float)
    if np.unique(rows, axis=0).shape[0] < k:
        raise ValueError(f"fewer than k={k} distinct rows")
    labels, _ = kmeans(rows, k, seed)
    return ClusterAssignment(labels=tuple(int(x) for x in labels), k=k, method="kmeans")


def agreement(a, b):
    """Fraction of nodes with matching labels under the best relabeling.

    Maximizes the confusion-matrix trace over bijective label mappings
    (Hungarian assignment), so the score is permutation-invariant and
    symmetric; 1.0 means identical up to renaming.
    """
    if a.n != b.n:
        raise ValueError(f"assignments cover {a.n} vs {b.n} nodes")
    la = np.asarray(a.labels)
    lb = np.asarray(b.labels)
    size = max(la.max(), lb.max()) + 1
    confusion = np.zeros((size, size))
    np.add.at(confusion, (la, lb), 1.0)
    rows, cols = linear_sum_assignment(-confusion)
    return float(confusion[rows, cols].sum()) / a.n
