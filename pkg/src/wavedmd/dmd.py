"""Per-node frequency recovery via delay-embedded exact DMD.

A scalar trace u(0..T-1) is arranged into Hankel snapshot matrices X, Y
(shifted by one step); the eigenvalues of Y X^+ are the complex exponentials
e^{i w_j} present in the signal, and the first components of the associated
modes rescale the least-squares amplitudes back to the signal coefficients.
For wave traces the frequencies map bijectively to Laplacian eigenvalues
through lam = (2 - 2 cos w) / c^2, and the coefficient at a given frequency
is proportional to that node's eigenvector component.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hankel

from .errors import (
    DegenerateSignalError,
    InsufficientModesError,
    RankDeficientModesError,
)
from .wave import lambda_from_omega


@dataclass(frozen=True)
class DmdOptions:
    """Numerical knobs for the DMD pipeline.

    rank_tol: drop singular values below rank_tol * sigma_max.
    min_magnitude: discard eigenvalues with |mu| below this as artifacts.
    pair_tol: merge mu_a with mu_b when |mu_a - conj(mu_b)| < pair_tol.
    dc_omega_tol: frequencies at or below this count as the constant mode.
    """

    rank_tol: float = 1e-10
    min_magnitude: float = 0.5
    pair_tol: float = 1e-8
    dc_omega_tol: float = 1e-4


DEFAULT_OPTIONS = DmdOptions()


@dataclass(frozen=True)
class DelayEmbedding:
    """Hankel snapshot matrices: x[r,c] = trace[r+c], y[r,c] = trace[r+c+1]."""

    k_rows: int
    m_cols: int
    x: np.ndarray
    y: np.ndarray


def delay_embed(trace, k_rows, m_cols):
    """Build the K x M delay embedding of a scalar trace.

    Needs len(trace) >= k_rows + m_cols and K, M > 1; the last sample lands
    in Y's bottom-right corner when K + M equals the trace length.
    """
    trace = np.asarray(trace)
    if k_rows <= 1 or m_cols <= 1:
        raise ValueError(f"embedding needs K > 1 and M > 1, got {k_rows}x{m_cols}")
    if trace.ndim != 1 or len(trace) < k_rows + m_cols:
        raise ValueError(
            f"trace of length {trace.shape} too short for K+M={k_rows + m_cols}"
        )
    x = hankel(trace[:k_rows], trace[k_rows - 1 : k_rows - 1 + m_cols])
    y = hankel(trace[1 : k_rows + 1], trace[k_rows : k_rows + m_cols])
    return DelayEmbedding(k_rows=k_rows, m_cols=m_cols, x=x, y=y)


@dataclass(frozen=True)
class DmdResult:
    """Eigenvalues and unit-normalized K-length modes, sorted by
    decreasing real part of the eigenvalue (conjugate +w member first)."""

    eigenvalues: np.ndarray
    modes: np.ndarray


def exact_dmd(emb, rank_tol=None, min_magnitude=None):
    """Exact DMD of the pair (X, Y) via reduced SVD.

    X = U S V*; the projected operator U* Y V S^{-1} carries the nonzero
    spectrum of Y X^+, and each mode is (1/mu) Y V S^{-1} w, unit-normalized.
    Eigenvalues of negligible magnitude are numerical artifacts of the
    truncation and are dropped.
    """
    opts = DEFAULT_OPTIONS
    rank_tol = opts.rank_tol if rank_tol is None else rank_tol
    min_magnitude = opts.min_magnitude if min_magnitude is None else min_magnitude
    u, s, vh = np.linalg.svd(emb.x, full_matrices=False)
    if not np.isfinite(s[0]) or s[0] <= 0.0:
        raise DegenerateSignalError("snapshot matrix has no signal")
    keep = s > rank_tol * s[0]
    if not np.any(keep):
        raise DegenerateSignalError("all singular values below tolerance")
    u = u[:, keep]
    s = s[keep]
    vh = vh[keep, :]
    yvs = (emb.y @ vh.conj().T) / s
    a_tilde = u.conj().T @ yvs
    mu, w = np.linalg.eig(a_tilde)
    significant = np.abs(mu) >= min_magnitude
    if not np.any(significant):
        raise DegenerateSignalError("no eigenvalues of significant magnitude")
    mu = mu[significant]
    w = w[:, significant]
    modes = (yvs @ w) / mu[None, :]
    modes = modes / np.linalg.norm(modes, axis=0, keepdims=True)
    order = np.lexsort((-mu.imag, -mu.real))
    return DmdResult(eigenvalues=mu[order], modes=modes[:, order])


def solve_amplitudes(result, x0):
    """Signal coefficients a_j from the first embedding column.

    Solves Phi_hat a_hat = x(0) in the least-squares sense and rescales by
    the first mode component, which cancels both the normalization and the
    arbitrary eigenvector phase.
    """
    phi = result.modes
    a_hat, _, rank, _ = np.linalg.lstsq(phi, np.asarray(x0), rcond=None)
    if rank < phi.shape[1]:
        raise RankDeficientModesError(
            f"mode matrix rank {rank} < {phi.shape[1]} modes"
        )
    return phi[0, :] * a_hat


@dataclass(frozen=True)
class SpectralMode:
    """One recovered oscillation: frequency, mapped eigenvalue, coefficient."""

    omega: float
    lam: float
    amplitude: complex


@dataclass(frozen=True)
class LocalSpectrum:
    """Modes recovered at a single node, sorted by ascending frequency."""

    node: int
    modes: tuple[SpectralMode, ...] = field(default_factory=tuple)

    def omegas(self):
        return np.array([m.omega for m in self.modes])

    def lambdas(self):
        return np.array([m.lam for m in self.modes])

    def amplitudes(self):
        return np.array([m.amplitude for m in self.modes])

    def oscillatory(self, dc_omega_tol=DEFAULT_OPTIONS.dc_omega_tol):
        """Modes above the constant-mode band, ascending frequency."""
        return tuple(m for m in self.modes if m.omega > dc_omega_tol)


def local_spectrum(trace, k_rows, m_cols, c, options=DEFAULT_OPTIONS, node=-1):
    """Full single-node pipeline: embed, DMD, amplitudes, conjugate merge.

    Conjugate eigenvalue pairs collapse to one mode at w = |arg mu| keeping
    the +w member's coefficient; the mapped Laplacian eigenvalue is
    (2 - 2 cos w) / c^2. Modes come back sorted by ascending frequency.
    """
    emb = delay_embed(trace, k_rows, m_cols)
    result = exact_dmd(emb, options.rank_tol, options.min_magnitude)
    amps = solve_amplitudes(result, emb.x[:, 0])
    mu = result.eigenvalues
    args = np.angle(mu)
    consumed = np.zeros(mu.size, dtype=bool)
    collected = []
    for i in np.argsort(-args):  # descending: +w members first
        if consumed[i]:
            continue
        consumed[i] = True
        if args[i] >= 0.0:
            # absorb the closest unconsumed conjugate partner, if any
            gaps = np.abs(mu - np.conj(mu[i]))
            gaps[consumed] = np.inf
            gaps[args > 0.0] = np.inf
            partner = int(np.argmin(gaps))
            if np.isfinite(gaps[partner]) and gaps[partner] < options.pair_tol:
                consumed[partner] = True
        collected.append((abs(float(args[i])), amps[i]))
    collected.sort(key=lambda pair: pair[0])
    merged = []
    for omega, amp in collected:
        if merged and omega - merged[-1][0] < options.pair_tol:
            merged[-1][1] += amp  # coalesce numerically split duplicates
            continue
        merged.append([omega, amp])
    modes = tuple(
        SpectralMode(omega=omega, lam=lambda_from_omega(omega, c), amplitude=complex(amp))
        for omega, amp in merged
    )
    return LocalSpectrum(node=node, modes=modes)


def coefficient_row(spectrum, n_modes, dc_omega_tol=DEFAULT_OPTIONS.dc_omega_tol):
    """Real coefficient parts of the first n_modes oscillatory modes.

    The constant mode carries no clustering information and is skipped;
    across nodes the real parts share the eigenvector's sign pattern up to
    one global flip per mode.
    """
    osc = spectrum.oscillatory(dc_omega_tol)
    if len(osc) < n_modes:
        raise InsufficientModesError(
            f"node {spectrum.node}: {len(osc)} oscillatory modes, need {n_modes}"
        )
    return np.array([osc[j].amplitude.real for j in range(n_modes)])


def default_embedding(n_nodes, t_max):
    """Default split K + M = t_max with K capped at the exact-recovery depth 2N."""
    k = min(2 * n_nodes, t_max // 2)
    return k, t_max - k
