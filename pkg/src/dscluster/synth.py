"""Synthetic union-of-subspaces datasets with a controlled shared intersection.

Each cluster lives on S_i = M (+) R_i: a common y-dimensional subspace M plus
a per-cluster (d-y)-dimensional part R_i drawn inside M's orthogonal
complement, so every pairwise intersection is exactly M. Points are V_i g with
g standard normal, then unit-normalized. Noise is calibrated by the Frobenius
ratio tau = ||alpha E||_F / ||D||_F.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import DataMatrix, normalize_columns


@dataclass(frozen=True)
class SynthConfig:
    """Geometry of a generated dataset.

    m1: ambient dimension; n: cluster count; d: subspace dimension;
    y: dimension of the shared intersection (0 <= y < d).
    """

    m1: int
    n: int
    d: int
    y: int
    points_per_cluster: int
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one cluster, got n={self.n}")
        if not 0 <= self.y < self.d:
            raise ValueError(f"need 0 <= y < d, got y={self.y}, d={self.d}")
        if self.d > self.m1:
            raise ValueError(f"subspace dim d={self.d} exceeds ambient dim m1={self.m1}")
        if self.points_per_cluster < 1:
            raise ValueError("points_per_cluster must be positive")

    @property
    def m2(self):
        return self.n * self.points_per_cluster


@dataclass(frozen=True)
class NoiseSpec:
    """Additive Gaussian noise at relative Frobenius power tau."""

    tau: float
    seed: int = 0

    def __post_init__(self):
        if not self.tau >= 0.0:
            raise ValueError(f"tau must be nonnegative, got {self.tau}")


def _bases_from_rng(cfg: SynthConfig, rng):
    m1, d, y = cfg.m1, cfg.d, cfg.y
    if y > 0:
        common, _ = np.linalg.qr(rng.standard_normal((m1, y)))
    else:
        common = np.zeros((m1, 0))
    bases = []
    for _ in range(cfg.n):
        raw = rng.standard_normal((m1, d - y))
        if y > 0:
            raw -= common @ (common.T @ raw)
        part, r = np.linalg.qr(raw)
        if np.abs(np.diag(r)).min() < 1e-10 * max(np.abs(np.diag(r)).max(), 1.0):
            raise ValueError("degenerate draw: cluster basis lost rank after projection")
        bases.append(np.hstack([common, part]))
    return common, bases


def subspace_bases(cfg: SynthConfig):
    """Orthonormal bases (common part M, then [V_1 ... V_n]) for cfg's draw.

    Uses the same stream as generate(), so these are exactly the spans the
    generated points live in.
    """
    rng = np.random.default_rng(cfg.seed)
    return _bases_from_rng(cfg, rng)


def generate(cfg: SynthConfig) -> DataMatrix:
    """Draw the dataset: unit-norm columns, block-ordered ground-truth labels."""
    rng = np.random.default_rng(cfg.seed)
    _, bases = _bases_from_rng(cfg, rng)
    blocks = []
    for basis in bases:
        coeffs = rng.standard_normal((cfg.d, cfg.points_per_cluster))
        blocks.append(basis @ coeffs)
    matrix = np.hstack(blocks)
    labels = np.repeat(np.arange(cfg.n), cfg.points_per_cluster)
    raw = DataMatrix(matrix, labels=labels,
                     source=f"synth(m1={cfg.m1},n={cfg.n},d={cfg.d},y={cfg.y},"
                            f"ppc={cfg.points_per_cluster},seed={cfg.seed})")
    return normalize_columns(raw)


def add_noise(data: DataMatrix, spec: NoiseSpec) -> DataMatrix:
    """Return D + alpha*E with alpha set so ||alpha E||_F / ||D||_F == tau.

    tau=0 returns the input unchanged. The result is deliberately not
    renormalized; the clustering front end normalizes whatever matrix it is
    handed.
    """
    if spec.tau == 0.0:
        return data
    rng = np.random.default_rng(spec.seed)
    noise = rng.standard_normal(data.matrix.shape)
    alpha = spec.tau * np.linalg.norm(data.matrix) / np.linalg.norm(noise)
    return DataMatrix(data.matrix + alpha * noise, labels=data.labels,
                      source=data.source + f"+noise(tau={spec.tau},seed={spec.seed})")
