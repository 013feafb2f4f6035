"""Dense linear-algebra kernels shared by the whole package.

Thin SVD, symmetric eigendecomposition, and symmetric-positive-definite
solve operators with a Woodbury fast path for wide data matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

# Relative singular-value cutoff below which a direction counts as numerically zero.
RANK_TOL = 1e-12

# Relative asymmetry admitted before a matrix is rejected as non-symmetric.
SYM_TOL = 1e-10


def check_matrix(M, name="matrix"):
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    A = np.asarray(M, dtype=float)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.isfinite(A).all():
        raise ValueError(f"{name} contains non-finite entries")
    return A


def numerical_rank(singular_values):
    """Number of singular values above RANK_TOL relative to the largest."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0.0:
        return 0
    return int(np.count_nonzero(s > RANK_TOL * s[0]))


def thin_svd(M, k):
    """Rank-k truncated singular value decomposition.

    Returns (U, s, V) with U: rows x k, s: length-k non-increasing,
    V: cols x k, such that U @ diag(s) @ V.T is the best rank-k
    approximation of M.
    """
    A = check_matrix(M, "thin_svd input")
    if not 1 <= k <= min(A.shape):
        raise ValueError(f"k={k} out of range for shape {A.shape}")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return U[:, :k], s[:k], Vt[:k, :].T


def sym_eig(M, k, which="smallest"):
    """k eigenpairs of a symmetric matrix.

    which="smallest" returns eigenvalues in ascending order,
    which="largest" in descending order; eigenvectors are the
    corresponding orthonormal columns.
    """
    A = check_matrix(M, "sym_eig input")
    n = A.shape[0]
    if A.shape[1] != n:
        raise ValueError(f"sym_eig input must be square, got shape {A.shape}")
    scale = np.abs(A).max()
    if scale > 0 and np.abs(A - A.T).max() > SYM_TOL * scale:
        raise ValueError("sym_eig input is not symmetric")
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for size {n}")
    if which == "smallest":
        subset = (0, k - 1)
    elif which == "largest":
        subset = (n - k, n - 1)
    else:
        raise ValueError(f"which must be 'smallest' or 'largest', got {which!r}")
    vals, vecs = scipy.linalg.eigh(A, subset_by_index=subset)
    if which == "largest":
        vals = vals[::-1]
        vecs = vecs[:, ::-1]
    return vals, vecs


def orthonormal_basis(M, tol=None):
    """Orthonormal basis of the column space of M (SVD range finder).

    tol is an absolute singular-value cutoff; default is RANK_TOL relative
    to the largest singular value.
    """
    A = check_matrix(M, "orthonormal_basis input")
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if tol is None:
        r = numerical_rank(s)
    else:
        r = int(np.count_nonzero(s > tol))
    return U[:, :r]


@dataclass(frozen=True)
class SpdSolver:
    """Apply the inverse of mu * (I + coefficient * X X^T) or its Gram twin.

    mode "direct" holds a Cholesky factorization of the small
    (r x r) matrix I + coefficient * X X^T and solves it directly.
    mode "woodbury" represents the large (m2 x m2) operator
    inv(I + coefficient * X^T X) through the identity
    inv(I + c X^T X) = I - c X^T inv(I + c X X^T) X, so one
    application costs O(r * m2^2) and the m2 x m2 inverse is never formed.
    """

    size: int
    scale: float              # 1/mu prefactor
    coefficient: float
    mode: str                 # "direct" | "woodbury"
    inner_basis: np.ndarray   # X, kept for the woodbury application
    _cho: tuple = field(repr=False, default=None)

    def apply(self, B):
        """Operator-vector / operator-matrix product."""
        B = np.asarray(B, dtype=float)
        squeeze = B.ndim == 1
        if squeeze:
            B = B[:, None]
        if B.shape[0] != self.size:
            raise ValueError(f"operand has {B.shape[0]} rows, operator size is {self.size}")
        # check_finite off: operands come from an iterative loop that screens
        # for non-finite values itself, and the scan would dominate small solves.
        if self.mode == "direct":
            out = scipy.linalg.cho_solve(self._cho, B, check_finite=False)
        else:
            X = self.inner_basis
            out = B - self.coefficient * (
                X.T @ scipy.linalg.cho_solve(self._cho, X @ B, check_finite=False))
        out *= self.scale
        return out[:, 0] if squeeze else out


def make_spd_solver(X, coefficient, mu, side="covariance"):
    """Build the solve operator for mu^-1 * inv(I + coefficient * X X^T).

    side="covariance" gives the r x r operator; side="gram" gives the
    m2 x m2 operator mu^-1 * inv(I + coefficient * X^T X) applied through
    the Woodbury identity.
    """
    A = check_matrix(X, "make_spd_solver input")
    if coefficient <= 0:
        raise ValueError(f"coefficient must be positive, got {coefficient}")
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if side not in ("covariance", "gram"):
        raise ValueError(f"side must be 'covariance' or 'gram', got {side!r}")
    r, m2 = A.shape
    small = np.eye(r) + coefficient * (A @ A.T)
    cho = scipy.linalg.cho_factor(small)
    size = r if side == "covariance" else m2
    mode = "direct" if side == "covariance" else "woodbury"
    return SpdSolver(size=size, scale=1.0 / mu, coefficient=float(coefficient),
                     mode=mode, inner_basis=A, _cho=cho)
