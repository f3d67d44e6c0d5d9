"""Scalar functionals and estimators evaluated along simulated trajectories."""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from .errors import EnergyUnderflow, InsufficientData, InvalidBound, NonPositiveHeight
from .grid import Field, dx, dxx, forward_diff, integrate
from .mobility import MobilityModel, entropy_functional

RECORD_COLUMNS = (
    "t",
    "mass",
    "energy_J",
    "entropy",
    "min_u",
    "max_u",
    "sup_dev",
    "cum_dissipation",
    "cum_d2",
)

_SENTINEL_FLOOR = 1e-30


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    energy_J: float
    entropy: float
    min_u: float
    max_u: float
    sup_dev: float
    cum_dissipation: float
    cum_d2: float

    def as_row(self) -> tuple:
        return astuple(self)


def energy_J(u: Field) -> float:
    """Dirichlet energy ``1/2 h sum ((u[j+1] - u[j]) / h)^2``.

    The one-sided difference makes this the energy that the implicit solver
    dissipates exactly and that the spectral shift preserves exactly.
    """
    d = forward_diff(u)
    return 0.5 * u.grid.h * float(np.dot(d, d))


def sup_deviation(u: Field, ref_mean: float) -> float:
    return float(np.max(np.abs(u.values - ref_mean)))


def sobolev_constant(grid) -> float:
    """Smallest ``C`` with ``max_j |u_j - mean(u)|^2 <= C * 2 J[u]`` for every grid field.

    The maximiser is the discrete periodic Green's function; in Fourier
    variables ``C = (h / 4n) * sum_{k=1}^{n-1} 1 / sin^2(pi k / n)``, which
    equals ``L (n^2 - 1) / (12 n^2)`` and tends to ``L / 12``.
    """
    n, h = grid.n, grid.h
    k = np.arange(1, n)
    return float(h / (4.0 * n) * np.sum(1.0 / np.sin(np.pi * k / n) ** 2))


def sobolev_constant_estimate(grid, samples: int = 1000, seed: int = 0) -> float:
    """Empirical lower estimate of :func:`sobolev_constant` from random zero-mean fields.

    Samples rotate through white noise, random low-mode trigonometric sums and
    the periodic inverse Laplacian of a few random point loads.  The last
    family contains the maximiser, so the estimate gets close to the exact
    constant.
    """
    rng = np.random.default_rng(seed)
    x, n, h = grid.x, grid.n, grid.h
    k = np.arange(n // 2 + 1)
    lam = (4.0 / h**2) * np.sin(np.pi * k / n) ** 2
    lam[0] = 1.0
    best = 0.0
    for i in range(samples):
        kind = i % 3
        if kind == 0:
            v = rng.standard_normal(n)
        elif kind == 1:
            kmax = int(rng.integers(1, 9))
            ks = np.arange(1, kmax + 1)
            amp = rng.standard_normal(kmax) / ks**2
            ph = rng.uniform(0, 2 * np.pi, kmax)
            v = np.sum(amp[:, None] * np.cos(2 * np.pi * ks[:, None] * x / grid.length + ph[:, None]), axis=0)
        else:
            loads = np.zeros(n)
            loads[rng.integers(0, n, int(rng.integers(1, 4)))] = rng.standard_normal()
            spec = np.fft.rfft(loads) / lam
            spec[0] = 0.0
            v = np.fft.irfft(spec, n)
        v = v - v.mean()
        f = Field(grid, v)
        e2 = 2.0 * energy_J(f)
        if e2 > 0:
            best = max(best, sup_deviation(f, 0.0) ** 2 / e2)
    return best


def k_epsilon(epsilon: float, theta: float, K_bound: float) -> tuple[float, float]:
    """Decay coefficient ``K_eps`` and its ``eps -> 0`` limit for a height bound ``K_bound``."""
    if not (K_bound > 0 and np.isfinite(K_bound)):
        raise InvalidBound(f"K_bound must be positive and finite, got {K_bound}")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    pi2 = np.pi**2
    denom = 16.0 * (np.pi + 1.0) ** 2
    k_eps = pi2 * (1.0 + 2.0 * epsilon**theta) ** 2 / (denom * np.sqrt(epsilon + K_bound**2))
    k_lim = pi2 / (denom * K_bound)
    return float(k_eps), float(k_lim)


def decay_correction_term(epsilon: float, theta: float, K_bound: float, cum_d2: float) -> float:
    """``sqrt(eps) * K_eps * int int (u_xx)^2`` with the unknown constant set to one."""
    return float(np.sqrt(epsilon) * k_epsilon(epsilon, theta, K_bound)[0] * cum_d2)


def _records_of(traj_or_records):
    return getattr(traj_or_records, "diagnostics", traj_or_records)


def decay_fit(traj, t_start: float | None = None) -> tuple[float, float]:
    """Least-squares fit of ``ln J`` against ``t`` on records with ``t >= t_start``.

    Returns ``(rate, r_squared)`` with ``rate = -slope``.  ``t_start`` defaults
    to a tenth of the final record time.
    """
    recs = list(_records_of(traj))
    if not recs:
        raise InsufficientData("no records")
    t = np.array([r.t for r in recs])
    J = np.array([r.energy_J for r in recs])
    if t_start is None:
        t_start = 0.1 * t[-1]
    sel = t >= t_start
    t, J = t[sel], J[sel]
    if t.size < 10:
        raise InsufficientData(f"need at least 10 records after t={t_start}, have {t.size}")
    low = np.nonzero(J <= _SENTINEL_FLOOR)[0]
    if low.size:
        t_hit = float(t[low[0]])
        raise EnergyUnderflow(f"energy reached numerical zero at t={t_hit}", t_hit=t_hit)
    y = np.log(J)
    slope, intercept = np.polyfit(t, y, 1)
    resid = y - (slope * t + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(-slope), r2


def lemma_ratio_estimates(u: Field, m: MobilityModel, beta: float) -> tuple[float, float]:
    """Grid versions of the two functional-inequality ratios used for the decay estimate.

    ``r_weighted = int u^b (u_xx)^2 / ((1-b)^2 int u^(b-2) (u_x)^4)`` and
    ``r_mass = int u^2 (u_xx)^2 / ((int u)^2 int (u_x)^2)``.  A ratio whose
    denominator is below 1e-30 (or ``b == 1``) is reported as ``inf``.
    """
    v = u.values
    if np.any(v <= 0):
        raise NonPositiveHeight("ratio estimates need a strictly positive field")
    g = u.grid
    d1 = dx(u).values
    d2 = dxx(u).values
    num_w = integrate(Field(g, v**beta * d2**2))
    den_w = (1.0 - beta) ** 2 * integrate(Field(g, v ** (beta - 2.0) * d1**4))
    num_m = integrate(Field(g, v**2 * d2**2))
    den_m = integrate(u) ** 2 * integrate(Field(g, d1**2))
    r_weighted = np.inf if (beta == 1.0 or den_w < _SENTINEL_FLOOR) else num_w / den_w
    r_mass = np.inf if den_m < _SENTINEL_FLOOR else num_m / den_m
    return float(r_weighted), float(r_mass)


def make_record(
    u: Field,
    m: MobilityModel,
    t: float,
    ref_mean: float,
    cum_dissipation: float,
    cum_d2: float,
) -> DiagnosticsRecord:
    entropy = entropy_functional(m, u) if m.epsilon > 0 and u.min() > 0 else float("nan")
    return DiagnosticsRecord(
        t=float(t),
        mass=integrate(u),
        energy_J=energy_J(u),
        entropy=entropy,
        min_u=u.min(),
        max_u=u.max(),
        sup_dev=sup_deviation(u, ref_mean),
        cum_dissipation=float(cum_dissipation),
        cum_d2=float(cum_d2),
    )
