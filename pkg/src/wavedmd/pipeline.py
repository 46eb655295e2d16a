"""Experiment harness: end-to-end clustering runs, searches, and sweeps.

Reproduces the headline comparisons: minimum trace length per method to
match centralized spectral clustering, and the mean relative error of the
lowest oscillation frequency as the trace grows. All randomness hangs off
a single integer seed; identical configs produce byte-identical reports.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import fft_baseline
from .clustering import (
    ClusterAssignment,
    agreement,
    bits_for_k,
    is_zero,
    kmeans_assign,
    sign_encode,
)
from .dmd import (
    DEFAULT_OPTIONS,
    DmdOptions,
    coefficient_row,
    default_embedding,
    local_spectrum,
)
from .errors import InsufficientModesError
from .graphs import (
    Graph,
    generate_planted_partition,
    generate_weak_line,
    karate_club,
    parse_edge_list,
)
from .spectral import eigendecompose, estimate_num_clusters, spectral_cluster
from .wave import (
    DEFAULT_C,
    WaveConfig,
    build_M,
    build_laplacian,
    lambda_from_omega,
    omega_from_lambda,
    propagate,
)

WORKERS_ENV = "WAVEDMD_WORKERS"

# Above these sizes a run must opt in with large=True (hours-scale work).
LARGE_N = 2000
LARGE_WORK = 8_000_000  # n * t_max

# Spectral reference is computed only when the oracle stays feasible.
ORACLE_LIMIT = 10_000

# Dense companion-matrix eigendecomposition cap for exact frequencies.
_M_EIG_LIMIT = 1500


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: graph source, wave settings, method, and outputs."""

    graph: object  # path, generator spec string, or a Graph instance
    t_max: int = 0
    c: float = DEFAULT_C
    k_rows: int | None = None
    m_cols: int | None = None
    method: str = "dmd"  # dmd | fft | spectral
    assign: str = "signs"  # signs | kmeans
    k: object = 2  # int or "auto"
    max_k: int = 10
    seed: int = 0
    threshold: float = fft_baseline.DEFAULT_THRESHOLD
    options: DmdOptions = field(default_factory=DmdOptions)
    workers: int | None = None
    large: bool = False


def resolve_workers(workers):
    if workers is not None:
        return max(1, int(workers))
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def load_graph(source, seed=0):
    """Graph from a path, a generator spec string, or a Graph instance.

    Specs: "karate", "weak-line:N,WEAK_POS,W_STRONG,W_WEAK",
    "planted:BLOCKS,SIZE,P_IN,P_OUT,WIN_LO:WIN_HI,WOUT_LO:WOUT_HI".
    Anything else is treated as an edge-list file path.
    """
    if isinstance(source, Graph):
        return source
    spec = str(source)
    if spec == "karate":
        return karate_club()
    if spec.startswith("weak-line:"):
        n, weak, ws, ww = spec.split(":", 1)[1].split(",")
        return generate_weak_line(int(n), int(weak), float(ws), float(ww))
    if spec.startswith("planted:"):
        blocks, size, p_in, p_out, w_in, w_out = spec.split(":", 1)[1].split(",")
        lo_in, hi_in = (float(x) for x in w_in.split(":"))
        lo_out, hi_out = (float(x) for x in w_out.split(":"))
        return generate_planted_partition(
            int(blocks), int(size), float(p_in), float(p_out),
            (lo_in, hi_in), (lo_out, hi_out), seed=seed,
        )
    with open(spec) as handle:
        return parse_edge_list(handle)


def _check_large(cfg, n):
    if cfg.large:
        return
    if n > LARGE_N or n * cfg.t_max > LARGE_WORK:
        raise ValueError(
            f"run of n={n}, t_max={cfg.t_max} exceeds the default budget; "
            "pass large=True (--large) to opt in"
        )


def node_spectra(traces, k_rows, m_cols, c, options=DEFAULT_OPTIONS, workers=1):
    """Per-node DMD spectra; nodes fan out across a thread pool."""

    def one(i):
        return local_spectrum(
            traces.values[i], k_rows, m_cols, c, options=options, node=i
        )

    indices = range(traces.n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, indices))
    return [one(i) for i in indices]


def _embedding_shape(cfg, n):
    if cfg.k_rows is not None:
        k = cfg.k_rows
        m = cfg.m_cols if cfg.m_cols is not None else cfg.t_max - k
        return k, m
    return default_embedding(n, cfg.t_max)


def _dmd_rows(cfg, traces, n_modes, k_rows, m_cols):
    """Stacked per-node rows [dc, mode_1 .. mode_n_modes] of real coefficients."""
    workers = resolve_workers(cfg.workers)
    spectra = node_spectra(
        traces, k_rows, m_cols, cfg.c, options=cfg.options, workers=workers
    )
    rows = np.empty((traces.n, n_modes + 1))
    for spec in spectra:
        dc = 0.0
        if spec.modes and spec.modes[0].omega <= cfg.options.dc_omega_tol:
            dc = spec.modes[0].amplitude.real
        rows[spec.node, 0] = dc
        rows[spec.node, 1:] = coefficient_row(
            spec, n_modes, dc_omega_tol=cfg.options.dc_omega_tol
        )
    return rows


def _fft_rows(cfg, traces, n_modes):
    rows = np.empty((traces.n, n_modes + 1))
    for i in range(traces.n):
        spec = fft_baseline.fft_local_spectrum(
            traces.values[i], threshold=cfg.threshold, node=i
        )
        rows[i, 0] = spec.coefficients[0].real
        rows[i, 1:] = fft_baseline.fft_coefficient_row(spec, n_modes)
    return rows


def _normalize_columns(rows):
    norms = np.linalg.norm(rows, axis=0, keepdims=True)
    norms[norms == 0.0] = 1.0
    return rows / norms


def run_cluster(cfg):
    """Full pipeline: graph -> waves -> per-node spectra -> labels.

    Returns (assignment, report). The report carries the agreement against
    the centralized spectral reference whenever the oracle is feasible.
    """
    g = load_graph(cfg.graph, seed=cfg.seed)
    _check_large(cfg, g.n)
    es = None
    if g.n <= ORACLE_LIMIT:
        es = eigendecompose(build_laplacian(g))
    k = cfg.k
    if k == "auto":
        if es is None:
            raise ValueError("k='auto' needs the spectral oracle (graph too large)")
        k = estimate_num_clusters(es.lambdas, max_k=cfg.max_k)
    k = int(k)

    report = {
        "method": cfg.method,
        "assign": cfg.assign,
        "k": k,
        "n": g.n,
        "c": cfg.c,
        "seed": cfg.seed,
        "t_max": cfg.t_max,
    }

    if cfg.method == "spectral":
        if es is None:
            raise ValueError("spectral method needs a feasible oracle")
        assignment = spectral_cluster(es, k, method=cfg.assign, seed=cfg.seed)
        report.update(agreement_vs_spectral=1.0, zero_flags=list(assignment.zero_flags))
        return assignment, report

    if cfg.t_max < 2:
        raise ValueError(f"t_max must be >= 2, got {cfg.t_max}")
    traces = propagate(g, WaveConfig(t_max=cfg.t_max, c=cfg.c), seed=cfg.seed)

    bits = bits_for_k(k)
    n_modes = bits if cfg.assign == "signs" else k - 1
    if cfg.method == "dmd":
        k_rows, m_cols = _embedding_shape(cfg, g.n)
        report.update(k_rows=k_rows, m_cols=m_cols)
        rows = _dmd_rows(cfg, traces, n_modes, k_rows, m_cols)
    elif cfg.method == "fft":
        report.update(threshold=cfg.threshold)
        rows = _fft_rows(cfg, traces, n_modes)
    else:
        raise ValueError(f"unknown method {cfg.method!r}")

    if cfg.assign == "signs":
        labels = tuple(sign_encode(row, bits) for row in rows)
        flagged = tuple(
            i for i, row in enumerate(rows) if any(is_zero(x) for x in row[1:])
        )
        assignment = ClusterAssignment(
            labels=labels, k=k, method="signs", zero_flags=flagged
        )
    elif cfg.assign == "kmeans":
        embedding = _normalize_columns(rows[:, 1:])
        assignment = kmeans_assign(embedding, k, cfg.seed)
    else:
        raise ValueError(f"unknown assignment rule {cfg.assign!r}")

    report["zero_flags"] = list(assignment.zero_flags)
    if es is not None:
        reference = spectral_cluster(es, k, method=cfg.assign, seed=cfg.seed)
        report["agreement_vs_spectral"] = agreement(assignment, reference)
        report["reference"] = "spectral-reference"
    return assignment, report


# ---------------------------------------------------------------------------
# Minimum trace-length search
# ---------------------------------------------------------------------------


def pow2_grid(start, stop):
    """Powers of two from start to stop inclusive."""
    if start < 2 or stop < start:
        raise ValueError("need 2 <= start <= stop")
    t = 1 << (start - 1).bit_length()
    out = []
    while t <= stop:
        out.append(t)
        t *= 2
    return out


def step_grid(start, step, stop):
    """Arithmetic grid start, start+step, ... up to stop inclusive."""
    if start < 2 or step < 1 or stop < start:
        raise ValueError("need 2 <= start <= stop and step >= 1")
    return list(range(start, stop + 1, step))


@dataclass(frozen=True)
class ComparisonReport:
    """Search trail: agreements per evaluated grid point, first success."""

    method: str
    grid: tuple[int, ...]
    agreements: tuple[float, ...]
    min_tmax: int | None

    @property
    def exhausted(self):
        return self.min_tmax is None

    def to_json(self):
        payload = {
            "method": self.method,
            "grid": list(self.grid),
            "agreements": list(self.agreements),
            "min_tmax": self.min_tmax,
        }
        if self.exhausted:
            payload["min_tmax_note"] = f"> {self.grid[-1]}"
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def run_min_tmax_search(cfg, method, grid, stop_at_success=True):
    """Ascending scan for the least t_max reaching agreement 1.0.

    Evaluates grid points in order, so a reported minimum always has its
    predecessor's failure on record. Nodes with too few recovered modes
    count as failures (agreement 0.0), not errors.
    """
    grid = list(grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be nonempty and strictly ascending")
    agreements = []
    min_tmax = None
    for t in grid:
        sub = replace(cfg, method=method, t_max=t, k_rows=None, m_cols=None)
        try:
            _, report = run_cluster(sub)
            score = report.get("agreement_vs_spectral")
            if score is None:
                raise ValueError("min-tmax search needs the spectral reference")
        except InsufficientModesError:
            score = 0.0
        agreements.append(score)
        if score == 1.0:
            min_tmax = t
            if stop_at_success:
                break
    return ComparisonReport(
        method=method,
        grid=tuple(grid[: len(agreements)]),
        agreements=tuple(agreements),
        min_tmax=min_tmax,
    )


# ---------------------------------------------------------------------------
# Frequency-error sweep
# ---------------------------------------------------------------------------


def true_omegas(g, c):
    """Ascending distinct oscillation frequencies of the companion matrix."""
    if 2 * g.n <= _M_EIG_LIMIT:
        alphas = build_M(g, c).eigenvalues()
        args = np.abs(np.angle(alphas))
    else:
        es = eigendecompose(build_laplacian(g))
        args = np.array(
            [omega_from_lambda(min(max(lam, 0.0), 2.0), c) for lam in es.lambdas]
        )
    return np.sort(args)


def true_omega2(g, c, dc_tol=DEFAULT_OPTIONS.dc_omega_tol):
    omegas = true_omegas(g, c)
    above = omegas[omegas > dc_tol]
    if above.size == 0:
        raise ValueError("graph has no oscillatory frequency")
    return float(above[0])


@dataclass(frozen=True)
class SweepRow:
    t_max: int
    method: str
    mean_rel_err: float
    note: str = ""


def sweep_to_csv(rows):
    body = "".join(
        f"{r.t_max},{r.method},{'' if math.isnan(r.mean_rel_err) else format(r.mean_rel_err, '.17g')},{r.note}\n"
        for r in rows
    )
    return "t_max,method,mean_rel_err,note\n" + body


def run_error_sweep(cfg, t_grid, methods=("dmd", "fft")):
    """Mean relative error of the lowest frequency per method and t_max.

    The reference frequency comes from the companion-matrix spectrum. FFT
    failures (no retained oscillatory bin) make the grid point NaN with a
    note rather than aborting the sweep.
    """
    t_grid = sorted(t_grid)
    g = load_graph(cfg.graph, seed=cfg.seed)
    _check_large(replace(cfg, t_max=t_grid[-1]), g.n)
    omega2 = true_omega2(g, cfg.c, cfg.options.dc_omega_tol)
    traces = propagate(g, WaveConfig(t_max=t_grid[-1], c=cfg.c), seed=cfg.seed)
    workers = resolve_workers(cfg.workers)
    rows = []
    for t in t_grid:
        prefix = traces.values[:, :t]
        for method in methods:
            estimates = []
            failures = 0
            if method == "dmd":
                k_rows, m_cols = default_embedding(g.n, t)

                def estimate(i):
                    spec = local_spectrum(
                        prefix[i], k_rows, m_cols, cfg.c,
                        options=cfg.options, node=i,
                    )
                    osc = spec.oscillatory(cfg.options.dc_omega_tol)
                    return osc[0].omega if osc else None

                if workers > 1:
                    with ThreadPoolExecutor(max_workers=workers) as pool:
                        results = list(pool.map(estimate, range(g.n)))
                else:
                    results = [estimate(i) for i in range(g.n)]
                for value in results:
                    if value is None:
                        failures += 1
                    else:
                        estimates.append(value)
            elif method == "fft":
                for i in range(g.n):
                    spec = fft_baseline.fft_local_spectrum(
                        prefix[i], threshold=cfg.threshold, node=i
                    )
                    try:
                        estimates.append(fft_baseline.fft_omega2_estimate(spec))
                    except InsufficientModesError:
                        failures += 1
            else:
                raise ValueError(f"unknown method {method!r}")
            if estimates:
                err = float(
                    np.mean([abs(w - omega2) / omega2 for w in estimates])
                )
                note = f"{failures} nodes failed" if failures else ""
            else:
                err = float("nan")
                note = "no oscillatory estimate at any node"
            rows.append(SweepRow(t_max=t, method=method, mean_rel_err=err, note=note))
    return rows


# ---------------------------------------------------------------------------
# Adaptive trace growth
# ---------------------------------------------------------------------------


def converged_tmax(
    g,
    c=DEFAULT_C,
    seed=0,
    node=0,
    n_lowest=3,
    tol=1e-6,
    t_start=32,
    t_cap=4096,
    options=DEFAULT_OPTIONS,
):
    """Double t_max until the lowest oscillatory frequencies stabilize.

    Returns (t_max, spectrum) for the first length whose n_lowest smallest
    nonzero frequencies moved less than tol since the previous round.
    """
    previous = None
    t = t_start
    while t <= t_cap:
        traces = propagate(g, WaveConfig(t_max=t, c=c), seed=seed)
        k_rows, m_cols = default_embedding(g.n, t)
        spec = local_spectrum(
            traces.values[node], k_rows, m_cols, c, options=options, node=node
        )
        osc = spec.oscillatory(options.dc_omega_tol)
        current = np.array([m.omega for m in osc[:n_lowest]])
        if (
            previous is not None
            and previous.size == current.size == n_lowest
            and np.max(np.abs(previous - current)) < tol
        ):
            return t, spec
        previous = current
        t *= 2
    raise RuntimeError(f"frequencies did not converge below t_max={t_cap}")


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def local_spectrum_json(spec, method="dmd"):
    payload = {
        "node": spec.node,
        "method": method,
        "modes": [
            {
                "omega": m.omega,
                "lambda": m.lam,
                "re_a": m.amplitude.real,
                "im_a": m.amplitude.imag,
            }
            for m in spec.modes
        ],
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def fft_spectrum_json(spec, c=DEFAULT_C):
    modes = []
    for k in spec.retained_bins():
        omega = float(spec.omegas[k])
        modes.append(
            {
                "omega": omega,
                "lambda": lambda_from_omega(omega, c),
                "re_a": float(spec.coefficients[k].real),
                "im_a": float(spec.coefficients[k].imag),
                "magnitude": float(spec.magnitudes[k]),
            }
        )
    payload = {"node": spec.node, "method": "fft", "modes": modes}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_json(report):
    return json.dumps(report, sort_keys=True, indent=2) + "\n"
