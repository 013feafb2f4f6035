"""Independent reference implementations used to derive expected test values.

Everything here is deliberately written from first principles with different
algorithms than the package (one-sided Jacobi instead of LAPACK SVD,
characteristic-polynomial bisection instead of symmetric QR, projected
subgradient descent instead of ADMM, exhaustive permutation search instead of
the assignment solver), so agreement is evidence rather than tautology.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.optimize import linprog


# ---------------------------------------------------------------------------
# One-sided Jacobi SVD
# ---------------------------------------------------------------------------

def jacobi_svd(A, tol=1e-13, max_sweeps=60):
    """Full SVD by one-sided Jacobi rotations.

    Returns (U, s, V) with A = U @ diag(s) @ V.T, s non-increasing. Only
    sensible for small dense matrices; accuracy is the point, not speed.
    """
    A = np.asarray(A, dtype=float)
    transposed = A.shape[0] < A.shape[1]
    W = A.T.copy() if transposed else A.copy()
    m, n = W.shape
    V = np.eye(n)
    for _ in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                wi, wj = W[:, i], W[:, j]
                alpha = wi @ wi
                beta = wj @ wj
                g = wi @ wj
                if abs(g) <= tol * np.sqrt(alpha * beta) or g == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * g)
                t = np.sign(zeta) / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                W[:, i], W[:, j] = c * wi - s * wj, s * wi + c * wj
                V[:, i], V[:, j] = c * V[:, i] - s * V[:, j], s * V[:, i] + c * V[:, j]
        if not rotated:
            break
    norms = np.linalg.norm(W, axis=0)
    order = np.argsort(-norms, kind="stable")
    norms = norms[order]
    W = W[:, order]
    V = V[:, order]
    U = np.zeros((m, n))
    for k in range(n):
        if norms[k] > 0.0:
            U[:, k] = W[:, k] / norms[k]
    if transposed:
        return V, norms, U
    return U, norms, V


# ---------------------------------------------------------------------------
# Symmetric eigenvalues via characteristic polynomial + bisection (n <= 4)
# ---------------------------------------------------------------------------

def charpoly_coefficients(S):
    """Monic characteristic polynomial coefficients [1, c1, ..., cn]
    via the Faddeev-LeVerrier recurrence."""
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(S)
    for k in range(1, n + 1):
        M = S @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(S @ M) / k)
    return np.array(coeffs)


def _poly_eval(coeffs, x):
    y = 0.0
    for c in coeffs:
        y = y * x + c
    return y


def charpoly_eigvals(S, grid=4001, bisect_tol=1e-13):
    """All eigenvalues of a small symmetric matrix, ascending.

    Locates sign changes of the characteristic polynomial on a Gershgorin
    interval and bisects each bracket. Raises if fewer than n roots are
    found (coincident eigenvalues need a finer treatment than this oracle)."""
    S = np.asarray(S, dtype=float)
    if S.shape[0] > 4:
        raise ValueError("oracle restricted to n <= 4")
    if not np.allclose(S, S.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    n = S.shape[0]
    coeffs = charpoly_coefficients(S)
    radius = float(np.abs(S).sum(axis=1).max()) + 1.0
    xs = np.linspace(-radius, radius, grid)
    ys = np.array([_poly_eval(coeffs, x) for x in xs])
    roots = []
    for a, b, fa, fb in zip(xs[:-1], xs[1:], ys[:-1], ys[1:]):
        if fa == 0.0:
            roots.append(a)
            continue
        if fa * fb < 0.0:
            lo, hi, flo = a, b, fa
            while hi - lo > bisect_tol * max(1.0, abs(lo)):
                mid = 0.5 * (lo + hi)
                fmid = _poly_eval(coeffs, mid)
                if fmid == 0.0:
                    lo = hi = mid
                elif flo * fmid < 0.0:
                    hi = mid
                else:
                    lo, flo = mid, fmid
            roots.append(0.5 * (lo + hi))
    if abs(ys[-1]) == 0.0:
        roots.append(xs[-1])
    if len(roots) != n:
        raise ValueError(
            f"found {len(roots)} sign changes for n={n}; eigenvalues too close "
            "for the bisection oracle — redraw the test matrix")
    return np.sort(np.array(roots))


# ---------------------------------------------------------------------------
# Minimum-response direction by projected subgradient descent
# ---------------------------------------------------------------------------

def subgrad_directions(X, iters=100_000, step_scale=None, seed=None):
    """Solve min ||a^T X||_1 s.t. a^T x_i = 1 for every column i at once.

    Plain projected subgradient descent with a 1/sqrt(t) step and
    best-objective tracking. Feasible start a_i = x_i / ||x_i||^2.
    Returns (A_best, objectives) with objectives per column.
    """
    X = np.asarray(X, dtype=float)
    r, m2 = X.shape
    col_sq = np.einsum("ij,ij->j", X, X)
    if np.any(col_sq == 0.0):
        raise ValueError("zero column has no feasible direction")
    A = X / col_sq
    if step_scale is None:
        step_scale = 1.0 / max(1.0, np.linalg.norm(X, 2))
    best_obj = np.abs(X.T @ A).sum(axis=0)
    best_A = A.copy()
    for t in range(1, iters + 1):
        G = X @ np.sign(X.T @ A)
        # Tangent projection keeps the iterate on a^T x_i = 1 up to rounding.
        G -= X * (np.einsum("ij,ij->j", X, G) / col_sq)
        A = A - (step_scale / np.sqrt(t)) * G
        A += X * ((1.0 - np.einsum("ij,ij->j", X, A)) / col_sq)
        obj = np.abs(X.T @ A).sum(axis=0)
        better = obj < best_obj
        if better.any():
            best_obj[better] = obj[better]
            best_A[:, better] = A[:, better]
    return best_A, best_obj


def lp_direction_objective(X, i):
    """Exact optimum of min ||a^T X||_1 s.t. a^T x_i = 1 via linear
    programming (variables a and elementwise bounds u >= |X^T a|).

    Used to validate the subgradient oracle, not as the oracle itself."""
    X = np.asarray(X, dtype=float)
    r, m2 = X.shape
    c = np.concatenate([np.zeros(r), np.ones(m2)])
    A_ub = np.block([[X.T, -np.eye(m2)], [-X.T, -np.eye(m2)]])
    b_ub = np.zeros(2 * m2)
    A_eq = np.concatenate([X[:, i], np.zeros(m2)])[None, :]
    bounds = [(None, None)] * r + [(0.0, None)] * m2
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"reference LP failed: {res.message}")
    return float(res.fun)


# ---------------------------------------------------------------------------
# Clustering error by exhaustive permutation search
# ---------------------------------------------------------------------------

def exhaustive_error(predicted, truth, n_clusters):
    """Percent misclassified, minimized over every label permutation.

    Exponential in n_clusters; only for tiny instances."""
    predicted = np.asarray(predicted, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predicted.shape != truth.shape:
        raise ValueError("length mismatch")
    m2 = predicted.size
    best = m2
    for perm in itertools.permutations(range(n_clusters)):
        mapped = np.array(perm)[predicted]
        best = min(best, int(np.sum(mapped != truth)))
    return 100.0 * best / m2
