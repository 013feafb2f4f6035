"""Experiment harness: seeded sweeps over synthetic regimes plus a face protocol.

A BenchSpec describes one sweep (variable y, N, or tau). Every (sweep point,
trial) pair gets its own derived seeds for data, noise, and clustering, and
both algorithms see the identical noisy dataset so comparisons are paired.
Failures are recorded per trial and never abort the sweep.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .data import DataMatrix, RankPolicy
from .evaluation import clustering_error
from .pipeline import ALGORITHMS, ClusterParams, run_pipeline
from .spectral import ClusterLabels
from .synth import NoiseSpec, SynthConfig, add_noise, generate

SWEEP_VARIABLES = ("y", "N", "tau")

RESULT_COLUMNS = "sweep,trial,algorithm,error_pct,iters,seconds,seed"
SUMMARY_COLUMNS = ("sweep,algorithm,trials,failures,mean_error_pct,std_error_pct,"
                   "mean_iters,mean_seconds")
PLOT_COLUMNS = "sweep,algorithm,mean_error_pct,std_error_pct"


@dataclass(frozen=True)
class BenchSpec:
    """One sweep experiment, loadable from JSON."""

    name: str
    sweep: str                     # which variable the values drive
    values: tuple
    base: dict                     # m1, n, d, y, points_per_cluster, tau
    algorithms: tuple = ("dsc", "tsc")
    trials: int = 10
    seed: int = 0
    params: dict = field(default_factory=dict)   # ClusterParams overrides

    def __post_init__(self):
        if self.sweep not in SWEEP_VARIABLES:
            raise ValueError(f"sweep must be one of {SWEEP_VARIABLES}, got {self.sweep!r}")
        if len(self.values) == 0:
            raise ValueError("sweep values must be non-empty")
        if len(self.algorithms) == 0:
            raise ValueError("need at least one algorithm")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        needed = {"m1", "d", "points_per_cluster"}
        if self.sweep != "N":
            needed.add("n")
        if self.base and not needed <= set(self.base):
            raise ValueError(f"base must define {sorted(needed - set(self.base))}")
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))

    @classmethod
    def from_dict(cls, raw):
        known = {f.name for f in fields(cls)}
        extra = set(raw) - known
        if extra:
            raise ValueError(f"unknown benchmark keys: {sorted(extra)}")
        return cls(**raw)

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def geometry(self, value):
        """SynthConfig kwargs and tau for one sweep point."""
        g = dict(self.base)
        if self.sweep == "tau":
            g["tau"] = value
        elif self.sweep == "y":
            g["y"] = int(value)
        else:
            g["n"] = int(value)
        tau = float(g.pop("tau", 0.0))
        return g, tau


@dataclass(frozen=True)
class TrialRow:
    """One algorithm's outcome on one generated dataset."""

    sweep: float
    trial: int
    algorithm: str
    error_pct: float
    iters: int
    seconds: float
    seed: int
    message: str = ""

    @property
    def failed(self):
        return bool(self.message)


@dataclass(frozen=True)
class ExperimentResult:
    """All trial rows of a sweep plus the spec that produced them."""

    spec: BenchSpec
    rows: tuple

    def __post_init__(self):
        for row in self.rows:
            if not row.failed and not 0.0 <= row.error_pct <= 100.0:
                raise ValueError(f"error {row.error_pct} outside [0, 100]")
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def failures(self):
        return tuple(r for r in self.rows if r.failed)

    def summary(self):
        """Per-(sweep value, algorithm) aggregates over successful trials.

        Returns rows (sweep, algorithm, trials, failures, mean_error, std_error,
        mean_iters, mean_seconds) in sweep-then-algorithm order.
        """
        out = []
        for value in self.spec.values:
            for algo in self.spec.algorithms:
                rows = [r for r in self.rows
                        if r.sweep == float(value) and r.algorithm == algo]
                good = [r for r in rows if not r.failed]
                errs = np.array([r.error_pct for r in good])
                out.append({
                    "sweep": float(value),
                    "algorithm": algo,
                    "trials": len(rows),
                    "failures": len(rows) - len(good),
                    "mean_error_pct": float(errs.mean()) if errs.size else float("nan"),
                    "std_error_pct": float(errs.std()) if errs.size else float("nan"),
                    "mean_iters": float(np.mean([r.iters for r in good])) if good else float("nan"),
                    "mean_seconds": float(np.mean([r.seconds for r in good])) if good else float("nan"),
                })
        return out

    def mean_error(self, value, algorithm):
        for entry in self.summary():
            if entry["sweep"] == float(value) and entry["algorithm"] == algorithm:
                return entry["mean_error_pct"]
        raise KeyError(f"no rows for sweep={value}, algorithm={algorithm}")


def trial_seeds(root_seed, sweep_index, trial):
    """Independent (data, noise, clustering) seeds for one trial.

    Derived from spawn keys so any subset of the grid can be regenerated
    without running the rest.
    """
    ss = np.random.SeedSequence(entropy=root_seed, spawn_key=(sweep_index, trial))
    return tuple(int(v) for v in ss.generate_state(3))


def build_params(spec: BenchSpec, algorithm, n_clusters, subspace_dim, cluster_seed):
    overrides = dict(spec.params)
    policy = overrides.pop("rank_policy", None)
    if policy is not None:
        overrides["rank_policy"] = RankPolicy.parse(policy)
    return ClusterParams(n_clusters=n_clusters, algorithm=algorithm,
                         subspace_dim=subspace_dim, seed=cluster_seed, **overrides)


def _run_trial(spec: BenchSpec, sweep_index, value, trial):
    """All algorithms on one generated dataset; returns one TrialRow each."""
    geometry, tau = spec.geometry(value)
    data_seed, noise_seed, cluster_seed = trial_seeds(spec.seed, sweep_index, trial)
    try:
        cfg = SynthConfig(m1=geometry["m1"], n=geometry["n"], d=geometry["d"],
                          y=geometry.get("y", 0),
                          points_per_cluster=geometry["points_per_cluster"],
                          seed=data_seed)
        dataset = add_noise(generate(cfg), NoiseSpec(tau=tau, seed=noise_seed))
    except Exception as exc:   # noqa: BLE001 - per-trial isolation
        msg = f"{type(exc).__name__}: {exc}"
        return [TrialRow(sweep=float(value), trial=trial, algorithm=algo,
                         error_pct=float("nan"), iters=0, seconds=0.0,
                         seed=data_seed, message=msg)
                for algo in spec.algorithms]
    truth = ClusterLabels(labels=dataset.labels, n_clusters=cfg.n)
    rows = []
    for algo in spec.algorithms:
        params = build_params(spec, algo, cfg.n, cfg.d, cluster_seed)
        start = time.perf_counter()
        try:
            result = run_pipeline(dataset, params)
            row = TrialRow(sweep=float(value), trial=trial, algorithm=algo,
                           error_pct=clustering_error(result.labels, truth),
                           iters=result.iters_used,
                           seconds=time.perf_counter() - start,
                           seed=data_seed)
        except Exception as exc:   # noqa: BLE001 - per-trial isolation
            row = TrialRow(sweep=float(value), trial=trial, algorithm=algo,
                           error_pct=float("nan"), iters=0,
                           seconds=time.perf_counter() - start,
                           seed=data_seed, message=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return rows


def run_experiment(spec: BenchSpec, progress=None, jobs=1) -> ExperimentResult:
    """Run the whole sweep.

    progress, if given, is called with each TrialRow. jobs > 1 runs trials on
    a thread pool; seeds are per-trial so the result rows are identical either
    way (only the seconds column moves).
    """
    tasks = [(i, value, trial)
             for i, value in enumerate(spec.values)
             for trial in range(spec.trials)]
    rows = []
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = pool.map(lambda t: _run_trial(spec, *t), tasks)
            for batch in batches:
                rows.extend(batch)
                if progress is not None:
                    for row in batch:
                        progress(row)
    else:
        for task in tasks:
            batch = _run_trial(spec, *task)
            rows.extend(batch)
            if progress is not None:
                for row in batch:
                    progress(row)
    return ExperimentResult(spec=spec, rows=tuple(rows))


def run_face_experiment(data: DataMatrix, n_subjects, n_combos=10,
                        projection_rank=500, spec_params=None, seed=0,
                        progress=None) -> ExperimentResult:
    """Cluster random subject subsets of a labeled image dataset.

    Each combo draws n_subjects distinct label values, restricts the data to
    those columns, projects onto at most projection_rank left singular
    vectors, and clusters with the direction-search pipeline.
    """
    if data.labels is None:
        raise ValueError("face data needs ground-truth subject labels")
    subjects = np.unique(data.labels)
    if n_subjects > subjects.size:
        raise ValueError(f"asked for {n_subjects} subjects, dataset has {subjects.size}")
    spec = BenchSpec(name=f"faces{n_subjects}", sweep="N", values=(n_subjects,),
                     base={}, algorithms=("dsc",), trials=n_combos, seed=seed,
                     params=dict(spec_params or {}))
    rows = []
    for combo in range(n_combos):
        pick_seed, _, cluster_seed = trial_seeds(seed, 0, combo)
        rng = np.random.default_rng(pick_seed)
        chosen = rng.choice(subjects, size=n_subjects, replace=False)
        mask = np.isin(data.labels, chosen)
        subset = DataMatrix(data.matrix[:, mask],
                            labels=np.searchsorted(np.sort(chosen), data.labels[mask]),
                            source=data.source)
        rank = min(projection_rank, min(subset.matrix.shape))
        params = build_params(spec, "dsc", n_subjects, None, cluster_seed)
        params = replace(params, rank_policy=RankPolicy.fixed(rank))
        truth = ClusterLabels(labels=subset.labels, n_clusters=n_subjects)
        start = time.perf_counter()
        try:
            result = run_pipeline(subset, params)
            row = TrialRow(sweep=float(n_subjects), trial=combo, algorithm="dsc",
                           error_pct=clustering_error(result.labels, truth),
                           iters=result.iters_used,
                           seconds=time.perf_counter() - start, seed=pick_seed)
        except Exception as exc:   # noqa: BLE001 - per-trial isolation
            row = TrialRow(sweep=float(n_subjects), trial=combo, algorithm="dsc",
                           error_pct=float("nan"), iters=0,
                           seconds=time.perf_counter() - start,
                           seed=pick_seed, message=f"{type(exc).__name__}: {exc}")
        rows.append(row)
        if progress is not None:
            progress(row)
    return ExperimentResult(spec=spec, rows=tuple(rows))


def _repro_header(spec: BenchSpec):
    lines = [f"# name={spec.name}",
             f"# algorithms={','.join(spec.algorithms)}",
             f"# sweep={spec.sweep}",
             f"# values={','.join(repr(v) for v in spec.values)}",
             f"# base={json.dumps(spec.base, sort_keys=True)}",
             f"# params={json.dumps(spec.params, sort_keys=True)}",
             f"# trials={spec.trials}",
             f"# seed={spec.seed}"]
    return lines


def write_results(result: ExperimentResult, outdir):
    """Write results.csv, summary.csv, and plot_long.csv under outdir.

    Every file repeats the reproducibility header; rerunning the same spec
    reproduces everything except the wall-clock seconds column.
    """
    os.makedirs(outdir, exist_ok=True)
    header = _repro_header(result.spec)
    paths = {}

    path = os.path.join(outdir, "results.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(header) + "\n")
        fh.write(RESULT_COLUMNS + "\n")
        for r in result.rows:
            fh.write(f"{r.sweep:g},{r.trial},{r.algorithm},{r.error_pct:.10g},"
                     f"{r.iters},{r.seconds:.3f},{r.seed}\n")
        if result.failures:
            for r in result.failures:
                fh.write(f"# failed sweep={r.sweep:g} trial={r.trial} "
                         f"algorithm={r.algorithm}: {r.message}\n")
    paths["results"] = path

    summary = result.summary()
    path = os.path.join(outdir, "summary.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(header) + "\n")
        fh.write(SUMMARY_COLUMNS + "\n")
        for e in summary:
            fh.write(f"{e['sweep']:g},{e['algorithm']},{e['trials']},{e['failures']},"
                     f"{e['mean_error_pct']:.10g},{e['std_error_pct']:.10g},"
                     f"{e['mean_iters']:.10g},{e['mean_seconds']:.3f}\n")
    paths["summary"] = path

    path = os.path.join(outdir, "plot_long.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(header) + "\n")
        fh.write(PLOT_COLUMNS + "\n")
        for e in summary:
            fh.write(f"{e['sweep']:g},{e['algorithm']},"
                     f"{e['mean_error_pct']:.10g},{e['std_error_pct']:.10g}\n")
    paths["plot"] = path
    return paths
