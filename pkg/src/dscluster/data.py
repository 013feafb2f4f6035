"""Dataset representation, column normalization, span projection, and file I/O.

File formats
------------
CSV: UTF-8, comma-separated, '.' decimal separator. Leading lines starting
with '#' are header comments; a ``# has_labels=true|false`` directive marks
whether the last column of every row is an integer ground-truth label.
Rows are data points; the matrix is transposed internally so columns are
points. PGM: binary (P5) and ASCII (P2) graymaps with maxval <= 65535;
pixel values are rescaled to [0, 1] and each image becomes one column.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .linalg import check_matrix, numerical_rank


@dataclass(frozen=True)
class DataMatrix:
    """A column-per-point dataset with optional ground-truth labels."""

    matrix: np.ndarray            # m1 x m2, columns are points
    labels: np.ndarray = None     # int vector of length m2, or None
    source: str = ""              # free-form provenance

    def __post_init__(self):
        A = check_matrix(np.array(self.matrix, dtype=float), "data matrix")
        A.flags.writeable = False
        object.__setattr__(self, "matrix", A)
        if self.labels is not None:
            lab = np.array(self.labels, dtype=int)
            if lab.ndim != 1 or lab.shape[0] != A.shape[1]:
                raise ValueError(
                    f"labels must be a vector of length {A.shape[1]}, got shape {lab.shape}")
            lab.flags.writeable = False
            object.__setattr__(self, "labels", lab)

    @property
    def m1(self):
        return self.matrix.shape[0]

    @property
    def m2(self):
        return self.matrix.shape[1]


@dataclass(frozen=True)
class ProjectedData:
    """Orthonormal span basis Q and reduced coordinates X = Q^T D."""

    basis: np.ndarray            # m1 x r, orthonormal columns
    coords: np.ndarray           # r x m2
    energy_captured: float       # fraction of squared singular-value mass kept

    def __post_init__(self):
        object.__setattr__(self, "basis", check_matrix(self.basis, "span basis"))
        object.__setattr__(self, "coords", check_matrix(self.coords, "reduced coordinates"))

    @property
    def rank(self):
        return self.basis.shape[1]


@dataclass(frozen=True)
class RankPolicy:
    """How many span dimensions project_to_span keeps.

    kind "exact" keeps the numerical rank, "fixed" keeps a given count,
    "energy" keeps the smallest count whose squared singular values reach
    a fraction of the total.
    """

    kind: str
    value: float = None

    @classmethod
    def exact(cls):
        return cls("exact")

    @classmethod
    def fixed(cls, r):
        if int(r) < 1:
            raise ValueError(f"fixed rank must be >= 1, got {r}")
        return cls("fixed", int(r))

    @classmethod
    def energy(cls, threshold):
        if not 0.0 < threshold <= 1.0:
            raise ValueError(f"energy threshold must be in (0, 1], got {threshold}")
        return cls("energy", float(threshold))

    @classmethod
    def parse(cls, text):
        """Parse 'exact', 'fixed=R', or 'energy=T'."""
        text = text.strip()
        if text == "exact":
            return cls.exact()
        m = re.fullmatch(r"fixed=(\d+)", text)
        if m:
            return cls.fixed(int(m.group(1)))
        m = re.fullmatch(r"energy=([0-9.eE+-]+)", text)
        if m:
            return cls.energy(float(m.group(1)))
        raise ValueError(f"cannot parse rank policy {text!r}")

    def __str__(self):
        return self.kind if self.kind == "exact" else f"{self.kind}={self.value:g}"


def normalize_columns(data: DataMatrix) -> DataMatrix:
    """Scale every column to unit l2 norm; rejects all-zero columns."""
    norms = np.linalg.norm(data.matrix, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise ValueError(f"cannot normalize all-zero column {zero[0]}")
    return DataMatrix(data.matrix / norms, labels=data.labels, source=data.source)


def project_to_span(data: DataMatrix, policy: RankPolicy = RankPolicy.exact()) -> ProjectedData:
    """Project onto the dominant left singular vectors of the data matrix."""
    D = data.matrix
    U, s, _ = np.linalg.svd(D, full_matrices=False)
    total = float(np.sum(s ** 2))
    if policy.kind == "exact":
        r = max(numerical_rank(s), 1)
    elif policy.kind == "fixed":
        r = int(policy.value)
        if r > min(D.shape):
            raise ValueError(f"fixed rank {r} exceeds min(shape) = {min(D.shape)}")
    elif policy.kind == "energy":
        cum = np.cumsum(s ** 2)
        r = int(np.searchsorted(cum, policy.value * total - 1e-15)) + 1
        r = min(r, s.size)
    else:
        raise ValueError(f"unknown rank policy {policy.kind!r}")
    Q = U[:, :r]
    energy = float(np.sum(s[:r] ** 2) / total) if total > 0 else 1.0
    return ProjectedData(basis=Q, coords=Q.T @ D, energy_captured=energy)


# ---------------------------------------------------------------------------
# CSV ingestion / export
# ---------------------------------------------------------------------------

_HAS_LABELS_RE = re.compile(r"#\s*has_labels\s*=\s*(true|false)\s*$", re.IGNORECASE)


def _parse_csv(path: Path):
    has_labels = False
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _HAS_LABELS_RE.match(line)
                if m:
                    has_labels = m.group(1).lower() == "true"
                continue
            cells = line.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise ValueError(
                    f"{path}:{lineno}: expected {width} fields, got {len(cells)}")
            try:
                rows.append([float(c) for c in cells])
            except ValueError:
                bad = next(c for c in cells if not _is_number(c))
                raise ValueError(
                    f"{path}:{lineno}: cannot parse {bad.strip()!r} as a number") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    table = np.asarray(rows, dtype=float)
    labels = None
    if has_labels:
        if table.shape[1] < 2:
            raise ValueError(f"{path}: has_labels=true but only one column present")
        raw = table[:, -1]
        if not np.allclose(raw, np.round(raw)):
            raise ValueError(f"{path}: label column contains non-integer values")
        labels = np.round(raw).astype(int)
        table = table[:, :-1]
    return DataMatrix(table.T, labels=labels, source=str(path))


def _is_number(cell):
    try:
        float(cell)
        return True
    except ValueError:
        return False


def write_matrix(data: DataMatrix, path, header_comments=()):
    """Write a dataset as CSV (rows are points, 17 significant digits).

    Extra header comment lines are emitted verbatim after the has_labels
    directive; load_matrix ignores them.
    """
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# has_labels={'true' if data.labels is not None else 'false'}\n")
        for comment in header_comments:
            fh.write(f"# {comment}\n")
        for j in range(data.m2):
            cells = [f"{v:.17g}" for v in data.matrix[:, j]]
            if data.labels is not None:
                cells.append(str(int(data.labels[j])))
            fh.write(",".join(cells) + "\n")
    return path


# ---------------------------------------------------------------------------
# PGM ingestion
# ---------------------------------------------------------------------------

def _read_pgm(path: Path):
    """Read a P2/P5 graymap into a float array scaled to [0, 1]."""
    blob = path.read_bytes()
    pos = 0

    def next_token():
        nonlocal pos
        while pos < len(blob):
            if blob[pos:pos + 1].isspace():
                pos += 1
            elif blob[pos:pos + 1] == b"#":
                while pos < len(blob) and blob[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            else:
                break
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        return blob[start:pos]

    magic = next_token()
    if magic not in (b"P2", b"P5"):
        raise ValueError(f"{path}: unsupported PGM magic {magic!r}")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError:
        raise ValueError(f"{path}: malformed PGM header") from None
    if not 0 < maxval <= 65535:
        raise ValueError(f"{path}: unsupported PGM maxval {maxval}")
    count = width * height
    if magic == b"P5":
        pos += 1  # single whitespace byte after maxval
        dtype = np.dtype(">u2" if maxval > 255 else "u1")
        if len(blob) - pos < count * dtype.itemsize:
            raise ValueError(f"{path}: truncated PGM pixel data")
        raw = np.frombuffer(blob, dtype=dtype, count=count, offset=pos)
    else:
        values = blob[pos:].split()
        if len(values) < count:
            raise ValueError(f"{path}: truncated PGM pixel data")
        raw = np.asarray([int(v) for v in values[:count]])
    pixels = raw.astype(float).reshape(height, width)
    if pixels.max(initial=0.0) > maxval:
        raise ValueError(f"{path}: pixel value exceeds maxval {maxval}")
    return pixels / maxval


def _pgm_group_key(pgm_path: Path, root: Path):
    rel = pgm_path.relative_to(root)
    if len(rel.parts) > 1:
        name = rel.parts[0]
    else:
        name = pgm_path.stem
    return name.split("_")[0]


def _load_pgm_dir(root: Path):
    files = sorted(root.rglob("*.pgm"), key=lambda p: p.relative_to(root).as_posix())
    if not files:
        raise ValueError(f"{root}: no .pgm files found")
    columns = []
    keys = []
    length = None
    for f in files:
        vec = _read_pgm(f).reshape(-1)  # row-major vectorization
        if length is None:
            length = vec.size
        elif vec.size != length:
            raise ValueError(
                f"{f}: image has {vec.size} pixels, expected {length} like the first image")
        columns.append(vec)
        keys.append(_pgm_group_key(f, root))
    codes = {k: i for i, k in enumerate(sorted(set(keys)))}
    labels = np.asarray([codes[k] for k in keys])
    return DataMatrix(np.column_stack(columns), labels=labels, source=str(root))


def load_matrix(path, format="csv") -> DataMatrix:
    """Load a dataset from a CSV file or a directory of PGM images."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such path: {path}")
    if format == "csv":
        return _parse_csv(path)
    if format == "pgm-dir":
        if not path.is_dir():
            raise ValueError(f"{path}: pgm-dir format expects a directory")
        return _load_pgm_dir(path)
    raise ValueError(f"unsupported format {format!r}")
