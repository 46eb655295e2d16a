"""Centralized spectral oracle: eigendecomposition and reference clustering.

The row-normalized Laplacian of an irregular graph is not symmetric, but it
is similar to the symmetric normalized Laplacian through D^{1/2}; the
eigenproblem is solved there and transformed back, which guarantees real
eigenvalues and well-conditioned vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clustering import ClusterAssignment, bits_for_k, is_zero, kmeans, sign_bit

RESIDUAL_TOL = 1e-8
GAP_EPS = 1e-12


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and unit-norm eigenvectors (one per column)."""

    lambdas: np.ndarray
    vectors: np.ndarray

    @property
    def n(self):
        return self.lambdas.size

    def vector(self, j):
        """Eigenvector by 1-based spectral index (vector(2) pairs with lambda_2)."""
        return self.vectors[:, j - 1]

    def lambdas_csv(self):
        return "".join(f"{lam:.17g}\n" for lam in self.lambdas)

    def vectors_csv(self, columns):
        """CSV of selected eigenvectors (1-based indices), one node per row."""
        sel = self.vectors[:, [j - 1 for j in columns]]
        header = ",".join(f"v{j}" for j in columns)
        body = "".join(
            ",".join(f"{x:.17g}" for x in row) + "\n" for row in sel
        )
        return header + "\n" + body


def eigendecompose(lap):
    """Full eigensystem of the row-normalized Laplacian.

    Solved on the similar symmetric operator D^{1/2} L D^{-1/2}; the
    transformed vectors are re-normalized to unit length. Raises if any
    eigenpair residual exceeds RESIDUAL_TOL.
    """
    dense = lap.dense()
    sqrt_d = np.sqrt(lap.degrees)
    sym = dense * (sqrt_d[:, None] / sqrt_d[None, :])
    sym = 0.5 * (sym + sym.T)
    lams, phi = np.linalg.eigh(sym)
    vectors = phi / sqrt_d[:, None]
    vectors = vectors / np.linalg.norm(vectors, axis=0, keepdims=True)
    residual = dense @ vectors - vectors * lams[None, :]
    worst = float(np.max(np.linalg.norm(residual, axis=0)))
    if worst > RESIDUAL_TOL:
        raise ArithmeticError(f"eigenpair residual {worst:.3e} exceeds {RESIDUAL_TOL}")
    return EigenSystem(lambdas=lams, vectors=vectors)


def spectral_cluster(es, k, method="signs", seed=0):
    """Reference clustering from the eigensystem.

    signs: bit-encode the entry signs of eigenvectors 2..bits+1 (numerically
    zero entries go to the positive side and are flagged). kmeans: cluster
    the rows of [v2 .. vk] with the seeded k-means core.
    """
    if not 2 <= k <= es.n:
        raise ValueError(f"k={k} outside [2, {es.n}]")
    if method == "signs":
        bits = bits_for_k(k)
        labels = []
        flagged = []
        for i in range(es.n):
            number = 0
            for j in range(bits):
                entry = es.vectors[i, 1 + j]
                if is_zero(entry):
                    flagged.append(i)
                number += sign_bit(entry) << j
            labels.append(number)
        return ClusterAssignment(
            labels=tuple(labels),
            k=k,
            method="signs",
            zero_flags=tuple(sorted(set(flagged))),
        )
    if method == "kmeans":
        rows = es.vectors[:, 1:k]
        labels, _ = kmeans(rows, k, seed)
        return ClusterAssignment(
            labels=tuple(int(x) for x in labels), k=k, method="kmeans"
        )
    raise ValueError(f"unknown method {method!r}")


def estimate_num_clusters(lambdas, max_k=10):
    """Cluster count at the largest relative eigenvalue gap.

    Scans j in [2, max_k] and returns the argmax of
    (lambda_{j+1} - lambda_j) / max(lambda_j, eps), 1-based indices.
    """
    lambdas = np.asarray(lambdas)
    if lambdas.size < 3:
        raise ValueError("need at least 3 eigenvalues")
    if max_k < 2:
        raise ValueError(f"max_k must be >= 2, got {max_k}")
    hi = min(max_k, lambdas.size - 1)
    best_j, best_gap = 2, -np.inf
    for j in range(2, hi + 1):
        gap = (lambdas[j] - lambdas[j - 1]) / max(lambdas[j - 1], GAP_EPS)
        if gap > best_gap:
            best_j, best_gap = j, gap
    return best_j
