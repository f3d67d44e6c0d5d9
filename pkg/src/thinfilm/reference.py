"""Dense reference solver for one implicit deterministic step (small grids only).

Written independently of :mod:`thinfilm.deterministic`: difference operators
are explicit dense matrices, the edge mobility is evaluated from its defining
difference quotient ``(b - a) / (G'(b) - G'(a))``, the Jacobian comes from
complex-step differentiation and the linear systems go to ``numpy.linalg``.
"""

from __future__ import annotations

import numpy as np


def difference_matrices(n: int, h: float):
    """Dense periodic forward difference ``D+`` and compact second difference ``D2``."""
    eye = np.eye(n)
    shift = np.roll(eye, 1, axis=1)  # (shift @ v)[j] = v[j+1]
    Dp = (shift - eye) / h
    D2 = (shift - 2 * eye + shift.T) / h**2
    return Dp, D2


def _gprime(eps, s):
    return -eps / (3.0 * s**3) - 1.0 / s


def _mobility(eps, s):
    s2 = s * s
    return s2 * s2 / (eps + s2)


def edge_mobility_quotient(eps, a, b, rule="entropy_consistent"):
    if rule == "entropy_consistent":
        da = b - a
        close = np.abs(np.real(da)) <= 1e-12 * np.maximum(np.abs(np.real(a)), np.abs(np.real(b)))
        safe_da = np.where(close, 1.0, da)
        quot = safe_da / np.where(close, 1.0, _gprime(eps, b) - _gprime(eps, a))
        return np.where(close, _mobility(eps, 0.5 * (a + b)), quot)
    fa, fb = _mobility(eps, a), _mobility(eps, b)
    if rule == "arithmetic":
        return 0.5 * (fa + fb)
    if rule == "harmonic":
        return 2 * fa * fb / (fa + fb)
    raise ValueError(rule)


def dense_residual(w, v_old, eps, tau, h, rule="entropy_consistent"):
    n = v_old.size
    Dp, D2 = difference_matrices(n, h)
    D3 = Dp @ D2
    M = edge_mobility_quotient(eps, w, np.roll(w, -1), rule)
    flux = M * (D3 @ w)
    # divergence of an edge flux: -D+^T
    return w - v_old - tau * (Dp.T @ flux)


def dense_newton_step(v_old, eps, tau, h, rule="entropy_consistent", max_iter=60):
    """Solve the backward-Euler system to rounding with full Newton steps."""
    w = np.array(v_old, dtype=float)
    n = w.size
    cs = 1e-30
    for _ in range(max_iter):
        R = dense_residual(w, v_old, eps, tau, h, rule)
        Jac = np.empty((n, n))
        for k in range(n):
            wc = w.astype(complex)
            wc[k] += 1j * cs
            Jac[:, k] = np.imag(dense_residual(wc, v_old, eps, tau, h, rule)) / cs
        step = np.linalg.solve(Jac, -R)
        w = w + step
        if np.max(np.abs(step)) <= 1e-15 * np.max(np.abs(w)):
            break
    return w
