"""Implicit flux-form solver for the deterministic thin-film flow ``v_t = -(f(v) v_xxx)_x``.

One backward-Euler substep solves, for the unknown ``w``,

    (w_j - v_j) / tau = -(F_{j+1/2} - F_{j-1/2}) / h,
    F_{j+1/2} = M(w_j, w_{j+1}) * (w_{j+2} - 3 w_{j+1} + 3 w_j - w_{j-1}) / h^3,

with damped Newton iterations.  The edge-centred third difference is the
forward difference of the compact second difference, so summation by parts
gives, for converged solves,

* mass:    sum(w) == sum(v) (the flux telescopes);
* energy:  J[w] + tau h sum M (D3 w)^2 <= J[v], with J = h/2 sum (D+ w)^2;
* entropy: S[w] + tau h sum (D2 w)^2 <= S[v] when M is the entropy-consistent
  average, because then M (G'(w_{j+1}) - G'(w_j)) == w_{j+1} - w_j exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .banded import solve_cyclic_banded
from .errors import (
    NewtonDivergence,
    NonPositiveHeight,
    PositivityLoss,
    StepCollapse,
    StepFailure,
)
from .grid import Field
from .mobility import MobilityModel, f_eps, f_eps_prime

AVERAGING_RULES = ("entropy_consistent", "arithmetic", "harmonic")


@dataclass(frozen=True)
class DetStepConfig:
    """Settings of the implicit deterministic solver.

    ``dt_internal`` caps the inner step; ``None`` lets one step span a whole
    call to :func:`run_deterministic`.  ``newton_tol`` bounds the normwise
    backward error ``|R| / (|J| |w|)`` of the Newton residual.
    """

    dt_internal: float | None = None
    averaging: str = "entropy_consistent"
    newton_tol: float = 1e-12
    newton_max_iter: int = 40
    linear_solver_tol: float = 1e-8
    max_line_search: int = 20

    def __post_init__(self):
        if self.dt_internal is not None and not self.dt_internal > 0:
            raise ValueError("dt_internal must be positive")
        if self.averaging not in AVERAGING_RULES:
            raise ValueError(f"averaging must be one of {AVERAGING_RULES}, got {self.averaging!r}")
        if not (self.newton_tol > 0 and self.linear_solver_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.newton_max_iter < 1:
            raise ValueError("newton_max_iter must be >= 1")


def default_dt_internal(v: Field, m: MobilityModel) -> float:
    """Explicit-stability scale ``h^4 / (8 max f(v))``; only a rough initial step guess."""
    return v.grid.h**4 / (8.0 * max(float(np.max(f_eps(m, v.values))), 1e-300))


def _edge_mobility_with_derivs(eps: float, a, b, rule: str):
    """Edge mobility M(a, b) and its partial derivatives."""
    if rule == "entropy_consistent":
        # (b - a) / (G'(b) - G'(a)) with the difference quotient cancelled analytically
        a2, b2, ab = a * a, b * b, a * b
        num = 3.0 * a2 * a * b2 * b
        den = eps * (a2 + ab + b2) + 3.0 * a2 * b2
        M = num / den
        Ma = (9.0 * a2 * b2 * b * den - num * (eps * (2.0 * a + b) + 6.0 * a * b2)) / den**2
        Mb = (9.0 * b2 * a2 * a * den - num * (eps * (2.0 * b + a) + 6.0 * b * a2)) / den**2
        return M, Ma, Mb
    m = MobilityModel(eps) if eps > 0 else MobilityModel(0.0)
    fa, fb = f_eps(m, a), f_eps(m, b)
    dfa, dfb = f_eps_prime(m, a), f_eps_prime(m, b)
    if rule == "arithmetic":
        return 0.5 * (fa + fb), 0.5 * dfa, 0.5 * dfb
    if rule == "harmonic":
        s = fa + fb
        return 2.0 * fa * fb / s, 2.0 * fb * fb * dfa / s**2, 2.0 * fa * fa * dfb / s**2
    raise ValueError(f"unknown averaging rule {rule!r}")


def edge_mobility(m: MobilityModel, vL, vR, rule: str = "entropy_consistent"):
    """Mobility at the edge between nodes with heights ``vL`` and ``vR``.

    ``entropy_consistent`` is ``(vR - vL) / (G'(vR) - G'(vL))``, which
    equals ``3 a^3 b^3 / (eps (a^2 + ab + b^2) + 3 a^2 b^2)`` and reduces to
    ``f(c)`` for ``vL == vR == c``.
    """
    a = np.asarray(vL, dtype=float)
    b = np.asarray(vR, dtype=float)
    if np.any(a <= 0) or np.any(b <= 0):
        raise NonPositiveHeight("edge mobility needs strictly positive heights")
    M = _edge_mobility_with_derivs(m.epsilon, a, b, rule)[0]
    return float(M) if np.ndim(M) == 0 else M


def _third_diff(w, h):
    # edge j+1/2
    return (np.roll(w, -2) - 3.0 * np.roll(w, -1) + 3.0 * w - np.roll(w, 1)) / h**3


def _second_diff(w, h):
    return (np.roll(w, -1) - 2.0 * w + np.roll(w, 1)) / h**2


def _residual(w, v_old, eps, rule, tau, h):
    M = _edge_mobility_with_derivs(eps, w, np.roll(w, -1), rule)[0]
    F = M * _third_diff(w, h)
    return w - v_old + (tau / h) * (F - np.roll(F, 1))


def _residual_and_jacobian(w, v_old, eps, rule, tau, h):
    """Residual and the Jacobian as cyclic diagonals (offsets -2..2)."""
    M, Ma, Mb = _edge_mobility_with_derivs(eps, w, np.roll(w, -1), rule)
    D3 = _third_diff(w, h)
    F = M * D3
    R = w - v_old + (tau / h) * (F - np.roll(F, 1))

    h3 = h**3
    # dF_j / dw_{j+k}, k = -1..2
    dFm1 = -M / h3
    dF0 = Ma * D3 + 3.0 * M / h3
    dF1 = Mb * D3 - 3.0 * M / h3
    dF2 = M / h3

    def prev(x):
        return np.roll(x, 1)

    c = tau / h
    diags = np.empty((5, w.size))
    diags[0] = -c * prev(dFm1)
    diags[1] = c * (dFm1 - prev(dF0))
    diags[2] = 1.0 + c * (dF0 - prev(dF1))
    diags[3] = c * (dF1 - prev(dF2))
    diags[4] = c * dF2
    return R, diags


class SubstepResult(NamedTuple):
    field: Field
    dissipation: float
    entropy_production: float
    newton_iterations: int


def deterministic_substep(v: Field, m: MobilityModel, cfg: DetStepConfig, tau: float) -> SubstepResult:
    """One backward-Euler step of length ``tau`` for the flux-form system.

    Raises :class:`PositivityLoss` if no damped Newton iterate stays strictly
    positive, :class:`NewtonDivergence` if the residual cannot be driven below
    ``cfg.newton_tol`` and :class:`LinearSolveFailure` from the linear solve.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    v_old = v.values
    if np.any(v_old <= 0):
        raise PositivityLoss("deterministic step started from a non-positive state")
    h, eps, rule = v.grid.h, m.epsilon, cfg.averaging

    w = v_old.copy()
    iterations = 0
    converged = False
    for iterations in range(cfg.newton_max_iter + 1):
        R, diags = _residual_and_jacobian(w, v_old, eps, rule, tau, h)
        jnorm = np.abs(diags).sum(axis=0).max()
        rnorm = np.max(np.abs(R))
        r2norm = np.linalg.norm(R)
        if rnorm <= cfg.newton_tol * jnorm * np.max(np.abs(w)):
            converged = True
            break
        if iterations == cfg.newton_max_iter:
            break
        delta = solve_cyclic_banded(diags, -R, rtol=cfg.linear_solver_tol)
        lam = 1.0
        saw_positive = False
        for _ in range(cfg.max_line_search):
            trial = w + lam * delta
            if np.all(trial > 0):
                saw_positive = True
                if np.linalg.norm(_residual(trial, v_old, eps, rule, tau, h)) < r2norm:
                    w = trial
                    break
            lam *= 0.5
        else:
            if not saw_positive:
                raise PositivityLoss("every damped Newton iterate had a non-positive node")
            raise NewtonDivergence(f"line search failed to reduce residual {rnorm:.3e}")
    if not converged:
        raise NewtonDivergence(
            f"Newton did not converge in {cfg.newton_max_iter} iterations (residual {rnorm:.3e})"
        )
    if np.any(w <= 0):
        raise PositivityLoss("accepted state has a non-positive node")

    M = _edge_mobility_with_derivs(eps, w, np.roll(w, -1), rule)[0]
    D3 = _third_diff(w, h)
    dissipation = float(tau * h * np.sum(M * D3 * D3))
    entropy_production = float(tau * h * np.sum(_second_diff(w, h) ** 2))
    return SubstepResult(Field(v.grid, w), dissipation, entropy_production, iterations)


@dataclass
class DetTelemetry:
    accepted: int = 0
    rejected: int = 0
    newton_iterations: int = 0
    dissipation: float = 0.0
    entropy_production: float = 0.0
    min_value: float = np.inf
    last_tau: float = np.nan

    def merge(self, other: "DetTelemetry") -> None:
        self.accepted += other.accepted
        self.rejected += other.rejected
        self.newton_iterations += other.newton_iterations
        self.dissipation += other.dissipation
        self.entropy_production += other.entropy_production
        self.min_value = min(self.min_value, other.min_value)
        self.last_tau = other.last_tau


GROWTH_FACTOR = 1.2
GROWTH_AFTER = 5


def run_deterministic(
    v: Field,
    m: MobilityModel,
    cfg: DetStepConfig,
    duration: float,
    tau0: float | None = None,
) -> tuple[Field, DetTelemetry]:
    """Advance by ``duration`` with adaptive backward-Euler substeps.

    The step is halved after a failed substep and grown by 1.2 after five
    consecutive successes, never exceeding ``cfg.dt_internal``.
    """
    if not duration > 0:
        raise ValueError("duration must be positive")
    cap = duration if cfg.dt_internal is None else min(cfg.dt_internal, duration)
    tau = cap if tau0 is None else min(tau0, cap)
    floor = duration * 1e-12
    tel = DetTelemetry(min_value=float(v.values.min()))
    t = 0.0
    streak = 0
    while duration - t > floor:
        step = min(tau, duration - t)
        try:
            res = deterministic_substep(v, m, cfg, step)
        except StepFailure:
            tel.rejected += 1
            streak = 0
            tau = 0.5 * step
            if tau < floor:
                raise StepCollapse(f"step size collapsed to {tau:.3e} at t={t:.6e}") from None
            continue
        v = res.field
        t += step
        tel.accepted += 1
        tel.newton_iterations += res.newton_iterations
        tel.dissipation += res.dissipation
        tel.entropy_production += res.entropy_production
        tel.min_value = min(tel.min_value, v.min())
        streak += 1
        if streak >= GROWTH_AFTER:
            tau = min(GROWTH_FACTOR * tau, cap)
            streak = 0
    tel.last_tau = tau
    return v, tel
