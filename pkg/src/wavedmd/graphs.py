"""Weighted undirected graphs: parsing, generators, and the normalized Laplacian.

Node indices are 0-based everywhere inside the package; 1-based inputs are
shifted at the parse boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    DisconnectedGraphError,
    EdgeListParseError,
    GraphValidationError,
)

# Dense Laplacian storage up to this size, compressed-sparse-row beyond.
DENSE_LIMIT = 5000


@dataclass(frozen=True)
class Graph:
    """Weighted undirected graph with canonical edge storage.

    ``edges`` holds one entry per unordered pair, as (i, j, w) with i < j,
    sorted lexicographically. All weights are strictly positive.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]

    @property
    def num_edges(self):
        return len(self.edges)

    def weighted_degrees(self):
        """Sum of incident edge weights per node."""
        d = np.zeros(self.n)
        for i, j, w in self.edges:
            d[i] += w
            d[j] += w
        return d

    def adjacency(self, dense=None):
        """Symmetric weighted adjacency matrix (dense or CSR by size)."""
        if dense is None:
            dense = self.n <= DENSE_LIMIT
        rows = [e[0] for e in self.edges] + [e[1] for e in self.edges]
        cols = [e[1] for e in self.edges] + [e[0] for e in self.edges]
        vals = [e[2] for e in self.edges] * 2
        a = sp.coo_matrix((vals, (rows, cols)), shape=(self.n, self.n))
        return a.toarray() if dense else a.tocsr()

    def is_connected(self):
        if self.n <= 1:
            return True
        ncomp, _ = connected_components(self.adjacency(dense=False), directed=False)
        return ncomp == 1


def make_graph(n, edges):
    """Validate and canonicalize an edge iterable into a Graph.

    Raises GraphValidationError on self-loops, non-positive weights,
    out-of-range indices, or duplicate pairs with conflicting weights.
    """
    seen = {}
    for i, j, w in edges:
        i, j, w = int(i), int(j), float(w)
        if i == j:
            raise GraphValidationError(f"self-loop at node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphValidationError(f"edge ({i},{j}) outside [0,{n})")
        if not w > 0 or not np.isfinite(w):
            raise GraphValidationError(f"edge ({i},{j}) has non-positive weight {w}")
        key = (i, j) if i < j else (j, i)
        if key in seen:
            if seen[key] != w:
                raise GraphValidationError(
                    f"duplicate edge {key} with conflicting weights {seen[key]} vs {w}"
                )
            continue
        seen[key] = w
    canon = tuple((i, j, seen[(i, j)]) for i, j in sorted(seen))
    return Graph(n=n, edges=canon)


def parse_edge_list(text, one_based=False, default_weight=1.0):
    """Parse whitespace-separated "i j" or "i j w" lines into a Graph.

    Lines whose first non-blank character is '#' are comments; blank lines
    are skipped. Node count is max index + 1 after 0-based normalization.
    Duplicate undirected edges collapse; conflicting weights are an error.
    """
    if hasattr(text, "read"):
        text = text.read()
    shift = 1 if one_based else 0
    raw = []
    max_idx = -1
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) not in (2, 3):
            raise EdgeListParseError(lineno, f"expected 'i j' or 'i j w', got {line!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
            w = float(parts[2]) if len(parts) == 3 else float(default_weight)
        except ValueError as exc:
            raise EdgeListParseError(lineno, str(exc)) from None
        i -= shift
        j -= shift
        if i < 0 or j < 0:
            raise EdgeListParseError(lineno, f"negative node index after shift: ({i},{j})")
        if i == j:
            raise EdgeListParseError(lineno, f"self-loop at node {i + shift}")
        if not w > 0:
            raise EdgeListParseError(lineno, f"non-positive weight {w}")
        raw.append((i, j, w))
        max_idx = max(max_idx, i, j)
    if max_idx < 0:
        raise GraphValidationError("edge list is empty")
    return make_graph(max_idx + 1, raw)


def serialize_graph(g):
    """Emit "i j w" lines, 0-based, weights at 17 significant digits."""
    return "".join(f"{i} {j} {w:.17g}\n" for i, j, w in g.edges)


@dataclass(frozen=True)
class Laplacian:
    """Row-normalized graph Laplacian L = I - D^{-1} W.

    ``matrix`` is dense for n <= DENSE_LIMIT, CSR otherwise. ``degrees``
    keeps the weighted degrees used for the normalization.
    """

    n: int
    matrix: object
    degrees: np.ndarray

    @property
    def is_dense(self):
        return isinstance(self.matrix, np.ndarray)

    def dense(self):
        return self.matrix if self.is_dense else self.matrix.toarray()

    def dot(self, vec):
        return self.matrix @ vec


def build_laplacian(g):
    """Build the normalized Laplacian; requires a connected graph.

    Diagonal entries are exactly 1, off-diagonal (i,j) is -W_ij / deg_i for
    edges, 0 elsewhere; each row sums to 0 up to roundoff.
    """
    d = g.weighted_degrees()
    if g.n == 0:
        raise GraphValidationError("empty graph")
    if np.any(d == 0):
        isolated = int(np.nonzero(d == 0)[0][0])
        raise DisconnectedGraphError(f"node {isolated} has no neighbors")
    if not g.is_connected():
        raise DisconnectedGraphError("graph is disconnected")
    dense = g.n <= DENSE_LIMIT
    w = g.adjacency(dense=dense)
    if dense:
        lap = np.eye(g.n) - w / d[:, None]
        np.fill_diagonal(lap, 1.0)
    else:
        inv_d = sp.diags(1.0 / d)
        lap = (sp.eye(g.n) - inv_d @ w).tocsr()
    return Laplacian(n=g.n, matrix=lap, degrees=d)


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


def generate_weak_line(n, weak_pos, w_strong, w_weak):
    """Path graph of n nodes where edge (weak_pos-1, weak_pos) is weak.

    ``weak_pos`` is the 0-based index of the second endpoint of the weak
    edge, so the 50-node graph with a weak link between nodes 24 and 25
    uses weak_pos=25.
    """
    if n < 3:
        raise GraphValidationError(f"line graph needs n >= 3, got {n}")
    if not 1 <= weak_pos < n:
        raise GraphValidationError(f"weak_pos {weak_pos} outside [1,{n})")
    edges = [
        (i, i + 1, w_weak if i + 1 == weak_pos else w_strong) for i in range(n - 1)
    ]
    return make_graph(n, edges)


def generate_planted_partition(
    blocks,
    block_size,
    p_in,
    p_out,
    w_in,
    w_out,
    seed,
    max_retries=50,
):
    """Seeded random graph with ``blocks`` groups of ``block_size`` nodes.

    Intra-block pairs get an edge with probability p_in and a uniform
    weight from w_in; inter-block pairs use p_out and w_out. Resamples
    until connected, up to max_retries. Deterministic for a fixed seed.
    """
    if not (0 < p_out <= 1 and 0 < p_in <= 1):
        raise GraphValidationError("edge probabilities must lie in (0,1]")
    if blocks > 1 and p_in <= p_out:
        raise GraphValidationError("planted partition requires p_in > p_out")
    for lo, hi in (w_in, w_out):
        if not (0 < lo <= hi):
            raise GraphValidationError(f"weight interval ({lo},{hi}) must be positive")
    n = blocks * block_size
    labels = planted_labels(blocks, block_size)
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, p_in, p_out)
    rng = np.random.default_rng(seed)
    for _ in range(max_retries):
        mask = rng.random(prob.size) < prob
        lo = np.where(same[mask], w_in[0], w_out[0])
        hi = np.where(same[mask], w_in[1], w_out[1])
        weights = lo + rng.random(int(mask.sum())) * (hi - lo)
        g = make_graph(n, zip(iu[mask], ju[mask], weights))
        if g.is_connected() and all(d > 0 for d in g.weighted_degrees()):
            return g
    raise RuntimeError(f"no connected sample after {max_retries} retries")


def planted_labels(blocks, block_size):
    """Ground-truth block label per node for the planted-partition layout."""
    return np.repeat(np.arange(blocks), block_size)


# Zachary karate club: 34 members, 78 unweighted friendship ties.
KARATE_EDGES = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
    (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2),
    (1, 3), (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3),
    (2, 7), (2, 8), (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7),
    (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16), (6, 16),
    (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33),
    (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33),
    (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33),
    (24, 25), (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33),
    (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32),
    (31, 33), (32, 33),
)

# The post-split faction of each member (0 = instructor, 1 = administrator).
KARATE_FACTIONS = (
    0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 0, 1, 1,
    1, 1, 1, 1, 1, 1, 1, 1, 1, 1,
)


def karate_club():
    """The karate club graph with unit weights."""
    return make_graph(34, ((i, j, 1.0) for i, j in KARATE_EDGES))
