"""Decentralized graph clustering via wave propagation and per-node DMD."""

from .clustering import ClusterAssignment, agreement, kmeans_assign, sign_encode
from .dmd import (
    DelayEmbedding,
    DmdOptions,
    DmdResult,
    LocalSpectrum,
    delay_embed,
    exact_dmd,
    local_spectrum,
    solve_amplitudes,
)
from .fft_baseline import FftSpectrum, fft_local_spectrum, fft_omega2_estimate
from .graphs import (
    Graph,
    Laplacian,
    build_laplacian,
    generate_planted_partition,
    generate_weak_line,
    karate_club,
    make_graph,
    parse_edge_list,
    serialize_graph,
)
from .pipeline import ExperimentConfig, run_cluster, run_error_sweep, run_min_tmax_search
from .spectral import EigenSystem, eigendecompose, estimate_num_clusters, spectral_cluster
from .wave import (
    TraceMatrix,
    WaveConfig,
    WavePropagator,
    alpha_from_lambda,
    build_M,
    closed_form_trace,
    lambda_from_omega,
    omega_from_lambda,
    propagate,
    step_local,
)

__version__ = "0.1.0"
