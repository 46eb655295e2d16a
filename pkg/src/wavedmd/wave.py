"""Discrete wave equation on a graph.

The second-order recurrence

    u_i(t) = 2 u_i(t-1) - u_i(t-2) - c^2 sum_j L_ij u_j(t-1)

is evolved with the flat start u(-1) = u(0). Each node only needs its own
history and the previous values of its neighbors, so a synchronous-round
simulation (all reads at t-1, then all writes at t) reproduces the
decentralized algorithm exactly. The companion form

    z(t) = M z(t-1),   M = [[2I - c^2 L, -I], [I, 0]],  z(t) = (u(t), u(t-1))

serves as the centralized verification oracle; for 0 < c < sqrt(2) every
eigenvalue of M lies on the unit circle, so trajectories stay bounded.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import WaveOverflowError
from .graphs import build_laplacian

C_MAX = math.sqrt(2.0)

# Default wave speed: near the top of the stability range, so the frequency
# map arccos(1 - c^2 lam / 2) spreads the eigenvalue band across most of the
# unit circle. Mid-range speeds compress the top of the band quadratically
# and make close eigenvalue pairs numerically unresolvable.
DEFAULT_C = 1.4

# Amplitude guard for propagate(); neutral stability keeps |u| within a
# small multiple of |u(0)|, so exceeding this signals a broken input.
_BLOWUP_FACTOR = 1e6


@dataclass(frozen=True)
class WaveConfig:
    """Propagation settings: wave speed, retained samples, initial state.

    ``u0`` overrides the seeded uniform[0,1) initial condition when given.
    """

    t_max: int
    c: float = DEFAULT_C
    u0: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 < self.c < C_MAX:
            raise ValueError(f"wave speed must satisfy 0 < c < sqrt(2), got {self.c}")
        if self.t_max < 2:
            raise ValueError(f"t_max must be >= 2, got {self.t_max}")


@dataclass(frozen=True)
class TraceMatrix:
    """Per-node wave samples; row i holds u_i(0), ..., u_i(t_max - 1)."""

    values: np.ndarray

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def t_max(self):
        return self.values.shape[1]

    def row(self, i):
        return self.values[i]

    def to_csv(self):
        """One row per node, 17-significant-digit decimals."""
        lines = (",".join(f"{v:.17g}" for v in row) for row in self.values)
        return "".join(line + "\n" for line in lines)


def step_local(u_prev, u_prev2, neighbor_values, c):
    """Single-node update from Eq.-(3)-style neighbor data.

    ``neighbor_values`` lists (L_ij, u_j(t-1)) pairs and must include the
    node itself (L_ii = 1). Pure function of its arguments.
    """
    acc = 0.0
    for lij, uj in neighbor_values:
        acc += lij * uj
    return 2.0 * u_prev - u_prev2 - c * c * acc


def initial_condition(n, seed):
    """Seeded uniform [0,1) start, drawn in node-index order."""
    return np.random.default_rng(seed).random(n)


def propagate(g, cfg, seed=0):
    """Evolve the wave and return the N x t_max trace matrix.

    Deterministic for a fixed seed, independent of worker scheduling: each
    round is one synchronous matrix-vector product against the Laplacian.
    """
    lap = build_laplacian(g)
    if cfg.u0 is not None:
        u0 = np.asarray(cfg.u0, dtype=float)
        if u0.shape != (g.n,):
            raise ValueError(f"u0 has shape {u0.shape}, expected ({g.n},)")
    else:
        u0 = initial_condition(g.n, seed)
    guard = _BLOWUP_FACTOR * max(1.0, float(np.max(np.abs(u0))))
    out = np.empty((g.n, cfg.t_max))
    out[:, 0] = u0
    u_prev2 = u0
    u_prev = u0
    c2 = cfg.c * cfg.c
    for t in range(1, cfg.t_max):
        u_t = 2.0 * u_prev - u_prev2 - c2 * lap.dot(u_prev)
        if not np.all(np.isfinite(u_t)) or np.max(np.abs(u_t)) > guard:
            raise WaveOverflowError(
                f"amplitude blew up at t={t}; check c and the Laplacian"
            )
        out[:, t] = u_t
        u_prev2 = u_prev
        u_prev = u_t
    return TraceMatrix(values=out)


@dataclass(frozen=True)
class WavePropagator:
    """Companion matrix M of the recurrence, used as a centralized oracle."""

    n: int
    c: float
    m: object

    def dense(self):
        return self.m if isinstance(self.m, np.ndarray) else self.m.toarray()

    def eigenvalues(self):
        return np.linalg.eigvals(self.dense())

    def step(self, z):
        return self.m @ z

    def trace(self, u0, t_max):
        """N x t_max trace from iterating z(t) = M z(t-1), z(0) = (u0, u0)."""
        u0 = np.asarray(u0, dtype=float)
        z = np.concatenate([u0, u0])
        out = np.empty((self.n, t_max))
        out[:, 0] = u0
        for t in range(1, t_max):
            z = self.m @ z
            out[:, t] = z[: self.n]
        return out


def build_M(g, c):
    """Assemble M = [[2I - c^2 L, -I], [I, 0]] for the graph."""
    if not 0.0 < c < C_MAX:
        raise ValueError(f"wave speed must satisfy 0 < c < sqrt(2), got {c}")
    lap = build_laplacian(g)
    n = g.n
    if lap.is_dense:
        top = np.hstack([2.0 * np.eye(n) - c * c * lap.matrix, -np.eye(n)])
        bottom = np.hstack([np.eye(n), np.zeros((n, n))])
        m = np.vstack([top, bottom])
    else:
        eye = sp.eye(n)
        m = sp.bmat(
            [[2.0 * eye - c * c * lap.matrix, -eye], [eye, None]], format="csr"
        )
    return WavePropagator(n=n, c=c, m=m)


def alpha_from_lambda(lam, c):
    """Unit-modulus recurrence roots for one Laplacian eigenvalue.

    Returns (e^{i w}, e^{-i w}); the pair collapses to (1, 1) at lam = 0.
    """
    if not 0.0 <= lam <= 2.0:
        raise ValueError(f"Laplacian eigenvalue must lie in [0,2], got {lam}")
    if not 0.0 < c < C_MAX:
        raise ValueError(f"wave speed must satisfy 0 < c < sqrt(2), got {c}")
    re = (2.0 - c * c * lam) / 2.0
    im = (c / 2.0) * math.sqrt(max(4.0 * lam - c * c * lam * lam, 0.0))
    return complex(re, im), complex(re, -im)


def omega_from_lambda(lam, c):
    """Oscillation frequency in [0, pi) for one Laplacian eigenvalue."""
    return cmath.phase(alpha_from_lambda(lam, c)[0])


def lambda_from_omega(omega, c):
    """Inverse map (2 - 2 cos w) / c^2 back to a Laplacian eigenvalue."""
    return (2.0 - 2.0 * math.cos(omega)) / (c * c)


def closed_form_trace(g, u0, c, t):
    """u(t) from the spectral solution of the recurrence.

    On regular graphs (symmetric L) this expands u0 over the orthonormal
    eigenvectors v_j and evolves each coefficient by
    p_j e^{i t w_j} + q_j e^{-i t w_j} with p_j = (1 + i tan(w_j / 2)) / 2.
    On non-regular graphs the orthonormal expansion does not apply and the
    M-power oracle is used instead.
    """
    u0 = np.asarray(u0, dtype=float)
    lap = build_laplacian(g)
    degrees = lap.degrees
    if not np.allclose(degrees, degrees[0], rtol=1e-12, atol=0.0):
        prop = build_M(g, c)
        return prop.trace(u0, t + 1)[:, t]
    lams, vecs = np.linalg.eigh(lap.dense())
    coeffs = vecs.T @ u0
    acc = np.zeros(g.n, dtype=complex)
    for lam, b, v in zip(lams, coeffs, vecs.T):
        omega = omega_from_lambda(min(max(lam, 0.0), 2.0), c)
        p = 0.5 * complex(1.0, math.tan(omega / 2.0))
        q = p.conjugate()
        factor = p * cmath.exp(1j * t * omega) + q * cmath.exp(-1j * t * omega)
        acc += b * factor * v
    return acc.real
