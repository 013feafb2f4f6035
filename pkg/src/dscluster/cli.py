"""Command-line front end: generate data, cluster a file, run benchmark sweeps.

Every flag can also be set through the environment as DSCLUSTER_<FLAG>
(uppercase, dashes to underscores); explicit flags win. Exit codes: 0 success,
1 compute failure, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import benchmark, synth
from .data import DataMatrix, RankPolicy, load_matrix, write_matrix
from .directions import DivergenceError
from .evaluation import clustering_error
from .pipeline import ClusterParams, run_pipeline
from .spectral import ClusterLabels

ENV_PREFIX = "DSCLUSTER_"

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_USAGE = 2

PRESET_NAMES = ("fig1", "fig2", "fig3", "table1")


class UsageError(Exception):
    """Bad flags or unreadable input; maps to exit code 2."""


def _env(name, cast, fallback):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    if raw is None:
        return fallback
    if cast is bool:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    try:
        return cast(raw)
    except ValueError as exc:
        raise UsageError(f"bad value for {ENV_PREFIX}{name.upper().replace('-', '_')}: {raw!r}") from exc


def _add_solver_flags(parser):
    parser.add_argument("--p", type=int, choices=(1, 2), default=_env("p", int, 2),
                        help="response norm (default 2)")
    parser.add_argument("--mu", type=float, default=_env("mu", float, 3.3),
                        help="augmented-Lagrangian weight (default 3.3)")
    parser.add_argument("--gamma", type=float, default=_env("gamma", float, 0.01),
                        help="sparsity weight (default 0.01)")
    parser.add_argument("--tol", type=float, default=_env("tol", float, 1e-5),
                        help="residual stopping threshold")
    parser.add_argument("--max-iters", type=int, default=_env("max-iters", int, 300))
    parser.add_argument("--a-update", choices=("paper", "exact"),
                        default=_env("a-update", str, "paper"),
                        help="direction-update variant")
    parser.add_argument("--g", type=int, default=_env("g", int, None),
                        help="neighborhood size (default: rule of thumb)")
    parser.add_argument("--rank-policy", default=_env("rank-policy", str, "exact"),
                        help="span projection: exact, fixed=R, or energy=T")
    parser.add_argument("--restarts", type=int, default=_env("restarts", int, 20),
                        help="k-means restarts")
    parser.add_argument("--exclude-self", action="store_true",
                        default=_env("exclude-self", bool, False),
                        help="drop each point's own index from its neighborhood")
    parser.add_argument("--renorm-x", action="store_true",
                        default=_env("renorm-x", bool, False),
                        help="renormalize projected columns before the angular kernel")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dscluster",
        description="Direction-search subspace clustering toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a union-of-subspaces dataset")
    p_synth.add_argument("--m1", type=int, required=True, help="ambient dimension")
    p_synth.add_argument("--n", type=int, required=True, help="cluster count")
    p_synth.add_argument("--d", type=int, required=True, help="subspace dimension")
    p_synth.add_argument("--y", type=int, default=_env("y", int, 0),
                         help="shared intersection dimension")
    p_synth.add_argument("--per-cluster", type=int, required=True,
                         help="points per cluster")
    p_synth.add_argument("--tau", type=float, default=_env("tau", float, 0.0),
                         help="relative Frobenius noise power")
    p_synth.add_argument("--seed", type=int, default=_env("seed", int, 0))
    p_synth.add_argument("-o", "--output", required=True, help="CSV output path")

    p_cluster = sub.add_parser("cluster", help="cluster a dataset file")
    p_cluster.add_argument("input", help="dataset path (CSV or PGM directory)")
    p_cluster.add_argument("--format", choices=("csv", "pgm-dir"),
                           default=_env("format", str, "csv"))
    p_cluster.add_argument("--algo", choices=("dsc", "tsc"),
                           default=_env("algo", str, "dsc"))
    p_cluster.add_argument("--n-clusters", type=int,
                           default=_env("n-clusters", int, None),
                           help="cluster count (default: from ground-truth labels)")
    p_cluster.add_argument("--d", type=int, default=_env("d", int, None),
                           help="subspace dimension hint for the neighborhood size")
    p_cluster.add_argument("--seed", type=int, default=_env("seed", int, 0))
    p_cluster.add_argument("-o", "--output", default=None,
                           help="write predicted labels CSV here")
    _add_solver_flags(p_cluster)

    p_bench = sub.add_parser("bench", help="run a benchmark sweep from a JSON spec")
    p_bench.add_argument("spec", help="spec path or preset name "
                                      f"({', '.join(PRESET_NAMES)})")
    p_bench.add_argument("-o", "--outdir", default=None,
                         help="output directory (default bench_<name>)")
    p_bench.add_argument("--set", dest="overrides", action="append", default=[],
                         metavar="KEY=VALUE",
                         help="override a spec entry, e.g. --set base.tau=0.2")
    p_bench.add_argument("--faces", default=_env("faces", str, None),
                         help="labeled face dataset (CSV or PGM directory) for "
                              "the table1 protocol")
    p_bench.add_argument("--faces-format", choices=("csv", "pgm-dir"),
                         default=_env("faces-format", str, "csv"))
    p_bench.add_argument("--jobs", type=int, default=_env("jobs", int, 1),
                         help="parallel trials (default 1)")
    p_bench.add_argument("--quiet", action="store_true",
                         default=_env("quiet", bool, False))
    return parser


def cmd_synth(args):
    cfg = synth.SynthConfig(m1=args.m1, n=args.n, d=args.d, y=args.y,
                            points_per_cluster=args.per_cluster, seed=args.seed)
    clean = synth.generate(cfg)
    data = synth.add_noise(clean, synth.NoiseSpec(tau=args.tau, seed=args.seed + 1))
    comments = [f"m1={cfg.m1} n={cfg.n} d={cfg.d} y={cfg.y} "
                f"per_cluster={cfg.points_per_cluster} seed={cfg.seed}"]
    if args.tau > 0.0:
        achieved = (np.linalg.norm(data.matrix - clean.matrix)
                    / np.linalg.norm(clean.matrix))
        comments.append(f"tau={args.tau:.17g} achieved_ratio={achieved:.17g}")
    write_matrix(data, args.output, header_comments=comments)
    print(f"wrote {data.m2} points of dimension {data.m1} to {args.output}")
    return EXIT_OK


def _cluster_params(args, n_clusters):
    return ClusterParams(n_clusters=n_clusters, algorithm=args.algo, p=args.p,
                         mu=args.mu, gamma=args.gamma, tol=args.tol,
                         max_iters=args.max_iters, a_update=args.a_update,
                         g=args.g, subspace_dim=args.d,
                         rank_policy=RankPolicy.parse(args.rank_policy),
                         exclude_self=args.exclude_self, renormalize=args.renorm_x,
                         restarts=args.restarts, seed=args.seed)


def cmd_cluster(args):
    try:
        data = load_matrix(args.input, format=args.format)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    n_clusters = args.n_clusters
    if n_clusters is None:
        if data.labels is None:
            raise UsageError("--n-clusters is required when the input has no labels")
        n_clusters = int(np.unique(data.labels).size)
    params = _cluster_params(args, n_clusters)
    result = run_pipeline(data, params)
    if params.algorithm == "dsc":
        state = "converged" if result.converged else "hit the iteration cap"
        print(f"solver iterations: {result.iters_used} ({state})")
    if data.labels is not None:
        truth = ClusterLabels(labels=data.labels, n_clusters=n_clusters)
        print(f"clustering error: {clustering_error(result.labels, truth):.2f}")
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(f"# predicted labels for {args.input}\n")
            fh.write(f"# algorithm={params.algorithm} n_clusters={n_clusters} "
                     f"p={params.p} mu={params.mu} gamma={params.gamma} "
                     f"seed={params.seed}\n")
            fh.write("point,label\n")
            for idx, lab in enumerate(result.labels.labels):
                fh.write(f"{idx},{lab}\n")
        print(f"wrote labels to {args.output}")
    return EXIT_OK


def _apply_overrides(raw, overrides):
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return raw


def _load_bench_spec(args):
    path = args.spec
    if not os.path.exists(path) and path in PRESET_NAMES:
        path = os.path.join(os.path.dirname(__file__), "presets", path + ".json")
    if not os.path.exists(path):
        raise UsageError(f"benchmark spec not found: {args.spec}")
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    return _apply_overrides(raw, args.overrides)


def cmd_bench(args):
    raw = _load_bench_spec(args)
    progress = None if args.quiet else _print_row
    if raw.get("protocol") == "faces":
        result = _bench_faces(raw, args, progress)
    else:
        spec = benchmark.BenchSpec.from_dict(raw)
        result = benchmark.run_experiment(spec, progress=progress, jobs=args.jobs)
    outdir = args.outdir or f"bench_{result.spec.name}"
    paths = benchmark.write_results(result, outdir)
    failures = result.failures
    if failures:
        print(f"warning: {len(failures)} of {len(result.rows)} trials failed",
              file=sys.stderr)
    print(f"wrote {paths['results']}, {paths['summary']}, {paths['plot']}")
    return EXIT_OK


def _print_row(row):
    status = f"error {row.error_pct:6.2f}%" if not row.failed else "FAILED"
    print(f"  sweep={row.sweep:g} trial={row.trial} {row.algorithm}: {status} "
          f"({row.seconds:.1f}s)", file=sys.stderr)


def _bench_faces(raw, args, progress):
    if args.faces is None:
        raise UsageError("the faces protocol needs --faces (or DSCLUSTER_FACES) "
                         "pointing at the labeled dataset")
    try:
        data = load_matrix(args.faces, format=args.faces_format)
    except FileNotFoundError as exc:
        raise UsageError(str(exc)) from exc
    if data.labels is None:
        raise UsageError(f"{args.faces} has no subject labels")
    return benchmark.run_face_experiment(
        data,
        n_subjects=int(raw.get("n_subjects", 5)),
        n_combos=int(raw.get("n_combos", 10)),
        projection_rank=int(raw.get("projection_rank", 500)),
        spec_params=raw.get("params", {}),
        seed=int(raw.get("seed", 0)),
        progress=progress)


def main(argv=None):
    try:
        # Building the parser can already fail on malformed environment values.
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "cluster":
            return cmd_cluster(args)
        return cmd_bench(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"solver diverged: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
