"""Command-line front end.

Subcommands: cluster, spectrum, min-tmax, error-sweep, generate. Exit
codes: 0 success, 1 usage error, 2 numerical failure, 3 reference
disagreement under --verify.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import fft_baseline, pipeline
from .clustering import ClusterAssignment
from .dmd import DmdOptions, local_spectrum
from .errors import (
    DegenerateSignalError,
    DisconnectedGraphError,
    InsufficientModesError,
    RankDeficientModesError,
    WaveOverflowError,
)
from .graphs import (
    generate_planted_partition,
    generate_weak_line,
    karate_club,
    serialize_graph,
)
from .pipeline import ExperimentConfig
from .spectral import eigendecompose
from .wave import DEFAULT_C, WaveConfig, build_laplacian, propagate

USAGE_ERROR = 1
NUMERICAL_ERROR = 2
VERIFY_MISMATCH = 3

_NUMERICAL = (
    WaveOverflowError,
    DegenerateSignalError,
    InsufficientModesError,
    RankDeficientModesError,
    DisconnectedGraphError,
    ArithmeticError,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--graph", required=True,
                   help="edge-list path or spec: karate | weak-line:... | planted:...")
    p.add_argument("--c", type=float, default=DEFAULT_C, help="wave speed (0, sqrt(2))")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--large", action="store_true",
                   help="opt in to hours-scale runs (big N or t_max)")
    p.add_argument("--config", help="JSON file of defaults for the flags")


def _add_method(p):
    p.add_argument("--method", choices=["dmd", "fft", "spectral"], default="dmd")
    p.add_argument("--t-max", type=int, default=0)
    p.add_argument("--k-rows", type=int, help="embedding depth K (default min(2N, t_max/2))")
    p.add_argument("--m-cols", type=int, help="embedding width M (default t_max - K)")
    p.add_argument("--threshold", type=float, default=fft_baseline.DEFAULT_THRESHOLD,
                   help="FFT retention threshold")
    p.add_argument("--rank-tol", type=float, default=DmdOptions.rank_tol)


def build_parser():
    parser = _Parser(prog="wavedmd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a graph and report agreement")
    _add_common(p)
    _add_method(p)
    p.add_argument("--assign", choices=["signs", "kmeans"], default="signs")
    p.add_argument("--k", default="2", help="cluster count or 'auto' (spectral gap)")
    p.add_argument("--max-k", type=int, default=10)
    p.add_argument("--out", help="prefix for <out>.labels.csv and <out>.report.json")
    p.add_argument("--verify", action="store_true",
                   help="exit 3 unless agreement with the spectral reference is 1.0")

    p = sub.add_parser("spectrum", help="per-node spectrum as JSON")
    _add_common(p)
    _add_method(p)
    p.add_argument("--node", type=int, default=0)
    p.add_argument("--all-nodes", action="store_true")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--trace-out", help="also dump the trace matrix CSV here")
    p.add_argument("--eigen-out",
                   help="spectral method: prefix for eigenvalue/eigenvector CSVs")

    p = sub.add_parser("min-tmax", help="least t_max matching the spectral reference")
    _add_common(p)
    _add_method(p)
    p.add_argument("--assign", choices=["signs", "kmeans"], default="signs")
    p.add_argument("--k", default="2")
    p.add_argument("--max-k", type=int, default=10)
    p.add_argument("--grid", required=True,
                   help="pow2:START:STOP or step:START:STEP:STOP")
    p.add_argument("--out", help="JSON report path (default stdout)")

    p = sub.add_parser("error-sweep", help="mean relative lowest-frequency error")
    _add_common(p)
    _add_method(p)
    p.add_argument("--t-grid", default="64,128,256,512,1024",
                   help="comma-separated trace lengths")
    p.add_argument("--methods", default="dmd,fft")
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("generate", help="write a generated graph as an edge list")
    p.add_argument("--kind", choices=["weak-line", "planted", "karate"], required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--weak-pos", type=int, default=25)
    p.add_argument("--w-strong", type=float, default=5.0)
    p.add_argument("--w-weak", type=float, default=1.0)
    p.add_argument("--blocks", type=int, default=4)
    p.add_argument("--block-size", type=int, default=100)
    p.add_argument("--p-in", type=float, default=0.2)
    p.add_argument("--p-out", type=float, default=0.01)
    p.add_argument("--w-in", default="1:2")
    p.add_argument("--w-out", default="0.1:0.5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")
    return parser


def _apply_config_file(parser, argv):
    # a config file provides defaults; explicit flags win
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    with open(argv[idx + 1]) as handle:
        defaults = json.load(handle)
    flat = []
    for key, value in defaults.items():
        flag = "--" + key.replace("_", "-")
        if flag not in argv:
            flat.extend([flag, str(value)])
    return argv[:1] + flat + argv[1:]


def _write(text, path):
    if path:
        with open(path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _parse_k(value):
    return "auto" if value == "auto" else int(value)


def _config_from_args(args):
    return ExperimentConfig(
        graph=args.graph,
        t_max=args.t_max,
        c=args.c,
        k_rows=getattr(args, "k_rows", None),
        m_cols=getattr(args, "m_cols", None),
        method=args.method,
        assign=getattr(args, "assign", "signs"),
        k=_parse_k(getattr(args, "k", "2")),
        max_k=getattr(args, "max_k", 10),
        seed=args.seed,
        threshold=args.threshold,
        options=DmdOptions(rank_tol=args.rank_tol),
        large=args.large,
    )


def _cmd_cluster(args):
    cfg = _config_from_args(args)
    assignment, report = pipeline.run_cluster(cfg)
    if args.out:
        _write(assignment.to_csv(), args.out + ".labels.csv")
        _write(pipeline.report_json(report), args.out + ".report.json")
    else:
        sys.stdout.write(pipeline.report_json(report))
    score = report.get("agreement_vs_spectral")
    if score is not None:
        print(f"agreement vs spectral reference: {score:.6f}", file=sys.stderr)
    if args.verify and score != 1.0:
        return VERIFY_MISMATCH
    return 0


def _cmd_spectrum(args):
    cfg = _config_from_args(args)
    g = pipeline.load_graph(cfg.graph, seed=cfg.seed)
    if cfg.method == "spectral":
        es = eigendecompose(build_laplacian(g))
        if args.eigen_out:
            _write(es.lambdas_csv(), args.eigen_out + ".lambdas.csv")
            _write(es.vectors_csv(range(1, min(g.n, 10) + 1)),
                   args.eigen_out + ".vectors.csv")
        payload = {"lambdas": [float(x) for x in es.lambdas]}
        _write(json.dumps(payload, sort_keys=True, indent=2) + "\n", args.out)
        return 0
    if cfg.t_max < 2:
        raise InsufficientModesError("spectrum needs --t-max >= 2")
    traces = propagate(g, WaveConfig(t_max=cfg.t_max, c=cfg.c), seed=cfg.seed)
    if args.trace_out:
        _write(traces.to_csv(), args.trace_out)
    nodes = range(g.n) if args.all_nodes else [args.node]
    chunks = []
    for i in nodes:
        if cfg.method == "fft":
            spec = fft_baseline.fft_local_spectrum(
                traces.values[i], threshold=cfg.threshold, node=i
            )
            chunks.append(pipeline.fft_spectrum_json(spec, c=cfg.c))
        else:
            k_rows, m_cols = pipeline._embedding_shape(cfg, g.n)
            spec = local_spectrum(
                traces.values[i], k_rows, m_cols, cfg.c, options=cfg.options, node=i
            )
            chunks.append(pipeline.local_spectrum_json(spec))
    _write("".join(chunks), args.out)
    return 0


def _parse_grid(text):
    parts = text.split(":")
    if parts[0] == "pow2" and len(parts) == 3:
        return pipeline.pow2_grid(int(parts[1]), int(parts[2]))
    if parts[0] == "step" and len(parts) == 4:
        return pipeline.step_grid(int(parts[1]), int(parts[2]), int(parts[3]))
    raise ValueError(f"bad grid spec {text!r}")


def _cmd_min_tmax(args):
    cfg = _config_from_args(args)
    grid = _parse_grid(args.grid)
    report = pipeline.run_min_tmax_search(cfg, cfg.method, grid)
    _write(report.to_json(), args.out)
    return 0


def _cmd_error_sweep(args):
    cfg = _config_from_args(args)
    t_grid = [int(x) for x in args.t_grid.split(",")]
    methods = args.methods.split(",")
    rows = pipeline.run_error_sweep(cfg, t_grid, methods=methods)
    _write(pipeline.sweep_to_csv(rows), args.out)
    return 0


def _cmd_generate(args):
    if args.kind == "karate":
        g = karate_club()
    elif args.kind == "weak-line":
        g = generate_weak_line(args.n, args.weak_pos, args.w_strong, args.w_weak)
    else:
        lo_in, hi_in = (float(x) for x in args.w_in.split(":"))
        lo_out, hi_out = (float(x) for x in args.w_out.split(":"))
        g = generate_planted_partition(
            args.blocks, args.block_size, args.p_in, args.p_out,
            (lo_in, hi_in), (lo_out, hi_out), seed=args.seed,
        )
    _write(serialize_graph(g), args.out)
    return 0


_COMMANDS = {
    "cluster": _cmd_cluster,
    "spectrum": _cmd_spectrum,
    "min-tmax": _cmd_min_tmax,
    "error-sweep": _cmd_error_sweep,
    "generate": _cmd_generate,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(str(exc))
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _NUMERICAL as exc:
        print(f"wavedmd: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ValueError, OSError) as exc:
        print(f"wavedmd: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
