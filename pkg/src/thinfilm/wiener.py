"""Sampled Brownian paths with reproducible Brownian-bridge refinement.

A :class:`WienerPath` is a set of knots ``(t_k, beta(t_k))``.  :func:`refine`
inserts the midpoint of every interval, drawing it from the Brownian bridge
conditioned on the two neighbouring knots.  The normal variate used for the
``k``-th midpoint at refinement level ``l`` is a pure function of
``(seed, l, k)``, so the same logical path is obtained at every resolution,
in any process, in any order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InvalidHorizon, NotAKnot

_MASK64 = (1 << 64) - 1
_KNOT_RTOL = 1e-9


def _seed_words(*parts: int) -> list[int]:
    return [int(p) & _MASK64 for p in parts]


def derive_seed(base_seed: int, *indices: int) -> int:
    """64-bit child seed from a base seed and an index tuple (order-independent of execution)."""
    ss = np.random.SeedSequence(_seed_words(base_seed, *indices))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True, eq=False)
class WienerPath:
    times: np.ndarray
    values: np.ndarray
    seed: int
    level: int = 0

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1 or t.size < 2:
            raise ValueError("times and values must be 1-D arrays of equal length >= 2")
        if t[0] != 0.0 or v[0] != 0.0:
            raise ValueError("a Wiener path starts at (0, 0)")
        if np.any(np.diff(t) <= 0):
            raise ValueError("path times must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def steps(self) -> int:
        return self.times.size - 1

    def knot_index(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t))
        tol = _KNOT_RTOL * max(self.horizon, 1.0)
        for j in (i - 1, i):
            if 0 <= j < self.times.size and abs(self.times[j] - t) <= tol:
                return j
        raise NotAKnot(f"t={t!r} is not a knot of the path")

    def value_at(self, t: float) -> float:
        return float(self.values[self.knot_index(t)])


def sample_path(seed: int, T: float, steps: int) -> WienerPath:
    """Equispaced path on ``[0, T]`` with i.i.d. ``N(0, T/steps)`` increments."""
    if not (T > 0 and np.isfinite(T)):
        raise InvalidHorizon(f"horizon must be positive, got {T}")
    if int(steps) != steps or steps < 1:
        raise InvalidHorizon(f"need at least one step, got {steps}")
    steps = int(steps)
    rng = np.random.default_rng(np.random.SeedSequence(_seed_words(seed)))
    dt = T / steps
    incr = rng.standard_normal(steps) * np.sqrt(dt)
    values = np.concatenate(([0.0], np.cumsum(incr)))
    times = T * np.arange(steps + 1) / steps
    return WienerPath(times, values, int(seed), 0)


def _bridge_normals(seed: int, level: int, count: int) -> np.ndarray:
    # Philox is counter-based and .random() consumes exactly one 64-bit word per
    # draw, so the k-th variate depends on (seed, level, k) only.
    key = np.random.SeedSequence(_seed_words(seed, level, 0x6272)).generate_state(2, dtype=np.uint64)
    gen = np.random.Generator(np.random.Philox(key=key))
    u = gen.random(count)
    # random() may return exactly 0
    u = np.where(u == 0.0, np.finfo(float).tiny, u)
    return ndtri(u)


def refine(path: WienerPath) -> WienerPath:
    """Insert bridge midpoints; existing knots are carried over bit-for-bit."""
    t, v = path.times, path.values
    dt = np.diff(t)
    z = _bridge_normals(path.seed, path.level + 1, dt.size)
    mid_t = t[:-1] + 0.5 * dt
    mid_v = 0.5 * (v[:-1] + v[1:]) + 0.5 * np.sqrt(dt) * z
    times = np.empty(2 * t.size - 1)
    values = np.empty_like(times)
    times[0::2], times[1::2] = t, mid_t
    values[0::2], values[1::2] = v, mid_v
    return WienerPath(times, values, path.seed, path.level + 1)


def increment(path: WienerPath, t1: float, t2: float) -> float:
    """``beta(t2) - beta(t1)``; both times must be knots (no interpolation)."""
    if t2 < t1:
        raise ValueError("increment needs t1 <= t2")
    return float(path.values[path.knot_index(t2)] - path.values[path.knot_index(t1)])
