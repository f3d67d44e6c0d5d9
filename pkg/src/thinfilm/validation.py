"""Quick invariant self-test on a small grid (backs the ``validate`` subcommand)."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .deterministic import DetStepConfig, deterministic_substep
from .diagnostics import sobolev_constant
from .grid import TorusGrid, dx, dxx, inner, l2_norm, mean
from .mobility import MobilityModel
from .reference import dense_newton_step
from .splitting import SplittingConfig, run_splitting
from .stochastic import spectral_dx, stochastic_shift
from .wiener import refine, sample_path


class Check(NamedTuple):
    name: str
    passed: bool
    value: float
    tolerance: float


def _check(name, value, tol):
    return Check(name, bool(value <= tol), float(value), float(tol))


def run_validation(n: int = 32, seed: int = 0) -> list[Check]:
    rng = np.random.default_rng(seed)
    g = TorusGrid(1.0, n)
    out = []

    f, h_ = g.field(rng.standard_normal(n)), g.field(rng.standard_normal(n))
    out.append(_check("summation by parts", abs(inner(dx(f), h_) + inner(f, dx(h_))), 1e-12))
    out.append(_check("dxx self-adjoint", abs(inner(dxx(f), h_) - inner(f, dxx(h_))) / n**2, 1e-12))

    w = g.sample(lambda x: 1 + 0.3 * np.sin(2 * np.pi * x) + 0.1 * np.cos(6 * np.pi * x))
    iso = 0.0
    for a in rng.uniform(-3, 3, 20):
        s = stochastic_shift(w, a)
        iso = max(
            iso,
            abs(l2_norm(s) - l2_norm(w)),
            abs(l2_norm(spectral_dx(s)) - l2_norm(spectral_dx(w))) / l2_norm(spectral_dx(w)),
            abs(mean(s) - mean(w)),
        )
    out.append(_check("spectral shift isometry", iso, 1e-12))

    T, N = 2e-3, 32
    u0 = g.sample(lambda x: 0.5 + 0.5 * np.sin(2 * np.pi * x))
    traj = run_splitting(u0, SplittingConfig(T, N, 0.01), sample_path(seed, T, N))
    d = traj.diagnostics
    mass = np.array([r.mass for r in d])
    J = np.array([r.energy_J for r in d])
    S = np.array([r.entropy for r in d])
    c2 = np.array([r.cum_d2 for r in d])
    out.append(_check("mass conservation", np.max(np.abs(mass - mass[0])) / mass[0], 1e-10))
    out.append(_check("energy non-increasing", max(np.max(np.diff(J)), 0.0) / J[0], 1e-10))
    out.append(_check("entropy bound", max(np.max(S + c2 - S[0]), 0.0) / abs(S[0]), 1e-6))
    out.append(Check("positivity", bool(min(r.min_u for r in d) > 0), min(r.min_u for r in d), 0.0))
    C = sobolev_constant(g)
    chain = max(r.sup_dev**2 - C * 2 * r.energy_J for r in d)
    out.append(_check("sup deviation <= Sobolev bound", max(chain, 0.0), 1e-12))

    g12 = TorusGrid(1.0, 12, pow2=False)
    worst = 0.0
    m = MobilityModel(0.01)
    for _ in range(10):
        v = 1 + 0.3 * rng.uniform(-1, 1, 12)
        tau = 10 ** rng.uniform(-6, -4.5)
        ours = deterministic_substep(g12.field(v), m, DetStepConfig(), tau).field.values
        worst = max(worst, float(np.max(np.abs(ours - dense_newton_step(v, m.epsilon, tau, g12.h)))))
    out.append(_check("dense Newton oracle (n=12)", worst, 1e-9))

    p = sample_path(seed, 1.0, 16)
    r = refine(p)
    out.append(_check("bridge keeps coarse knots", float(np.max(np.abs(r.values[::2] - p.values))), 0.0))
    return out


def format_table(checks: list[Check]) -> str:
    width = max(len(c.name) for c in checks)
    lines = [f"{'check':<{width}}  result  value       tolerance"]
    for c in checks:
        lines.append(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL':<6}  {c.value:<10.3e}  {c.tolerance:.1e}")
    return "\n".join(lines)
