"""Direct solver for cyclic banded systems.

A cyclic banded matrix with half-bandwidth ``p`` has entries
``A[i, (i + k) % n]`` for ``k = -p..p``.  The non-wrapping part is factored
with LAPACK's banded LU (``scipy.linalg.solve_banded``); the ``2p`` rows that
carry wrap-around corner entries are handled as a rank-``2p`` update via the
Sherman-Morrison-Woodbury identity.  Cost is O(n p^2).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import LinAlgError, solve, solve_banded

from .errors import LinearSolveFailure


def cyclic_matvec(diags: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``A @ x`` where ``diags[k + p, i] == A[i, (i + k) % n]``."""
    p = (diags.shape[0] - 1) // 2
    out = np.zeros_like(x, dtype=float)
    for k in range(-p, p + 1):
        out += diags[k + p] * np.roll(x, -k)
    return out


def cyclic_to_dense(diags: np.ndarray) -> np.ndarray:
    p = (diags.shape[0] - 1) // 2
    n = diags.shape[1]
    A = np.zeros((n, n))
    rows = np.arange(n)
    for k in range(-p, p + 1):
        A[rows, (rows + k) % n] += diags[k + p]
    return A


def solve_cyclic_banded(diags: np.ndarray, b: np.ndarray, rtol: float | None = None) -> np.ndarray:
    """Solve ``A x = b`` for a cyclic banded ``A`` given by its diagonals.

    ``diags`` has shape ``(2p + 1, n)`` with ``diags[k + p, i] == A[i, (i+k) % n]``.
    If ``rtol`` is given, the relative residual ``|Ax - b| / (|A| |x| + |b|)`` is
    checked and :class:`LinearSolveFailure` raised when it exceeds ``rtol``.
    """
    diags = np.asarray(diags, dtype=float)
    b = np.asarray(b, dtype=float)
    p = (diags.shape[0] - 1) // 2
    n = diags.shape[1]
    if n <= 2 * p:
        raise ValueError(f"cyclic band of half-width {p} needs n > {2 * p}, got {n}")

    # banded storage: ab[p + i - j, j] = A[i, j]
    ab = np.zeros((2 * p + 1, n))
    corner_rows = list(range(p)) + list(range(n - p, n))
    C = np.zeros((n, 2 * p))
    for k in range(-p, p + 1):
        # rows i with 0 <= i + k < n
        i0, i1 = max(0, -k), n - max(0, k)
        ab[p - k, i0 + k : i1 + k] = diags[k + p, i0:i1]
    for c, i in enumerate(corner_rows):
        for k in range(-p, p + 1):
            j = i + k
            if j < 0 or j >= n:
                C[j % n, c] = diags[k + p, i]

    E = np.zeros((n, 2 * p))
    E[corner_rows, np.arange(2 * p)] = 1.0
    rhs = np.column_stack([b.reshape(n, -1), E])
    try:
        sol = solve_banded((p, p), ab, rhs, check_finite=False)
        y, Z = sol[:, : rhs.shape[1] - 2 * p], sol[:, -2 * p :]
        cap = np.eye(2 * p) + C.T @ Z
        x = y - Z @ solve(cap, C.T @ y)
    except (LinAlgError, ValueError) as exc:
        raise LinearSolveFailure(f"cyclic banded solve failed: {exc}") from exc
    x = x.reshape(b.shape)
    if not np.all(np.isfinite(x)):
        raise LinearSolveFailure("cyclic banded solve produced non-finite values")
    if rtol is not None:
        cols = x.reshape(n, -1)
        bcols = b.reshape(n, -1)
        anorm = np.abs(diags).sum(axis=0).max()
        for col, bc in zip(cols.T, bcols.T):
            res = np.max(np.abs(cyclic_matvec(diags, col) - bc))
            scale = anorm * np.max(np.abs(col)) + np.max(np.abs(bc))
            if scale > 0 and res > rtol * scale:
                raise LinearSolveFailure(f"relative residual {res / scale:.2e} exceeds {rtol:.1e}")
    return x
