"""Regularized quadratic mobility and the matching entropy density.

The regularized mobility is ``f(s) = s**4 / (eps + s**2)``; the entropy density
``G(s) = eps / (6 s**2) - ln s`` is chosen so that ``G''(s) * f(s) == 1``.
Every function accepts scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    LimitMobilityHasNoEpsilonEntropy,
    NegativeHeight,
    NegativeInitialData,
    NonPositiveHeight,
)
from .grid import Field, integrate

DEFAULT_THETA = 0.3


@dataclass(frozen=True)
class MobilityModel:
    """Regularization parameter ``epsilon`` (0 selects the limit mobility ``s**2``)
    and the exponent ``theta`` of the initial lift ``eps**theta``."""

    epsilon: float
    theta: float = DEFAULT_THETA

    def __post_init__(self):
        if not (self.epsilon >= 0 and np.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be a finite non-negative number, got {self.epsilon}")
        if not 0.0 < self.theta < 0.4:
            raise ValueError(f"theta must lie in (0, 2/5), got {self.theta}")

    @property
    def lift(self) -> float:
        return self.epsilon**self.theta


def _as_array(s):
    return np.asarray(s, dtype=float)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def _check_nonneg(s):
    if np.any(s < 0):
        raise NegativeHeight(f"mobility evaluated at negative height (min {np.min(s):.3e})")


def _check_entropy_args(m: MobilityModel, s):
    if m.epsilon == 0:
        raise LimitMobilityHasNoEpsilonEntropy("entropy G_eps needs epsilon > 0")
    if np.any(s <= 0):
        raise NonPositiveHeight(f"entropy evaluated at non-positive height (min {np.min(s):.3e})")


def f_eps(m: MobilityModel, s):
    s = _as_array(s)
    _check_nonneg(s)
    if m.epsilon == 0:
        return _out(s * s)
    s2 = s * s
    return _out(s2 * s2 / (m.epsilon + s2))


def f_eps_prime(m: MobilityModel, s):
    s = _as_array(s)
    _check_nonneg(s)
    if m.epsilon == 0:
        return _out(2.0 * s)
    s2 = s * s
    eps = m.epsilon
    return _out((2.0 * s2 * s2 * s + 4.0 * eps * s2 * s) / (eps + s2) ** 2)


def entropy_G(m: MobilityModel, s):
    s = _as_array(s)
    _check_entropy_args(m, s)
    return _out(m.epsilon / (6.0 * s * s) - np.log(s))


def entropy_G_prime(m: MobilityModel, s):
    s = _as_array(s)
    _check_entropy_args(m, s)
    return _out(-m.epsilon / (3.0 * s**3) - 1.0 / s)


def entropy_G_second(m: MobilityModel, s):
    s = _as_array(s)
    _check_entropy_args(m, s)
    s2 = s * s
    return _out((m.epsilon + s2) / (s2 * s2))


def lift_initial(m: MobilityModel, u0: Field) -> Field:
    """Shift non-negative initial data up by ``eps**theta``."""
    if m.epsilon <= 0:
        raise ValueError("the initial lift needs epsilon > 0")
    if np.any(u0.values < 0):
        raise NegativeInitialData(f"initial data has negative values (min {u0.min():.3e})")
    return Field(u0.grid, u0.values + m.lift)


def entropy_functional(m: MobilityModel, f: Field) -> float:
    """``integral of G_eps(f)``; finite for every strictly positive grid field."""
    return integrate(Field(f.grid, entropy_G(m, f.values)))
