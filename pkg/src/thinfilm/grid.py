"""Uniform periodic grid on the torus [0, L) with finite-difference operators.

All derivative stencils here are second-order central differences with
periodic index arithmetic.  They are used for diagnostics; the implicit
solver in :mod:`thinfilm.deterministic` assembles its own flux-form stencil.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class TorusGrid:
    """Node-centred grid ``x_j = j*h``, ``j = 0..n-1``, with ``h = L/n``.

    ``n`` must be a power of two (the stochastic step uses an FFT).  Small
    non-power-of-two grids are allowed with ``pow2=False``; they are only
    meant for dense reference solves.
    """

    length: float
    points: int
    pow2: bool = field(default=True, compare=False)

    def __post_init__(self):
        if not (self.length > 0 and np.isfinite(self.length)):
            raise ValueError(f"grid length must be positive, got {self.length}")
        if int(self.points) != self.points or self.points < 8:
            raise ValueError(f"need at least 8 grid points, got {self.points}")
        if self.pow2 and not _is_pow2(int(self.points)):
            raise ValueError(f"number of points must be a power of two, got {self.points}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "length", float(self.length))

    @property
    def n(self) -> int:
        return self.points

    @property
    def h(self) -> float:
        return self.length / self.points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.points) * self.h

    def field(self, values) -> "Field":
        return Field(self, values)

    def sample(self, func) -> "Field":
        """Evaluate ``func`` at the nodes."""
        return Field(self, func(self.x))

    def constant(self, c: float) -> "Field":
        return Field(self, np.full(self.points, float(c)))


@dataclass(frozen=True, eq=False)
class Field:
    """Real grid function on a :class:`TorusGrid`.

    ``values`` is stored as a read-only float64 copy, so a Field can be shared
    between threads without defensive copying.
    """

    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True).reshape(-1)
        if vals.size != self.grid.points:
            raise ValueError(f"field has {vals.size} values, grid has {self.grid.points} points")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def map(self, func) -> "Field":
        return Field(self.grid, func(self.values))


def _roll(v, k):
    # value at index j+k
    return np.roll(v, -k)


def dx(f: Field) -> Field:
    """Central first difference ``(f[j+1] - f[j-1]) / 2h``.

    Input is taken as one period of a periodic function; a non-periodic
    sample (e.g. ``f = x``) produces a large spike at the seam.
    """
    v, h = f.values, f.grid.h
    return Field(f.grid, (_roll(v, 1) - _roll(v, -1)) / (2.0 * h))


def dxx(f: Field) -> Field:
    """Compact second difference ``(f[j+1] - 2 f[j] + f[j-1]) / h^2``.

    This is not ``dx(dx(f))`` (which would use the wide 2h stencil).
    """
    v, h = f.values, f.grid.h
    return Field(f.grid, (_roll(v, 1) - 2.0 * v + _roll(v, -1)) / h**2)


def dxxx(f: Field) -> Field:
    v, h = f.values, f.grid.h
    num = _roll(v, 2) - 2.0 * _roll(v, 1) + 2.0 * _roll(v, -1) - _roll(v, -2)
    return Field(f.grid, num / (2.0 * h**3))


def forward_diff(f: Field) -> np.ndarray:
    """Edge-centred difference ``(f[j+1] - f[j]) / h``, located at ``x_{j+1/2}``."""
    v = f.values
    return (_roll(v, 1) - v) / f.grid.h


def integrate(f: Field) -> float:
    """Rectangle rule ``h * sum(f)``; equal to the trapezoid rule on a periodic grid."""
    return float(f.grid.h * np.sum(f.values))


def inner(f: Field, g: Field) -> float:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return float(f.grid.h * np.dot(f.values, g.values))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(inner(f, f)))


def mean(f: Field) -> float:
    return integrate(f) / f.grid.length
