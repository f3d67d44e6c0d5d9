"""Trotter-Kato splitting of the regularized stochastic thin-film equation.

``[0, T]`` is cut into ``N + 1`` intervals of length ``delta``.  On each
interval the deterministic flow runs for ``delta`` and its output is shifted by
the Wiener increment over the interval.  In the concatenated trajectory the
deterministic output is labelled ``(j - 1/2) delta`` and the shifted state
``j delta``, which reproduces the endpoint values of the usual time-compressed
concatenation.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field, replace

import numpy as np

from .deterministic import DetStepConfig, DetTelemetry, run_deterministic
from .diagnostics import DiagnosticsRecord, make_record
from .errors import NotAKnot, PathGridMismatch, PositivityLoss
from .grid import Field, mean
from .mobility import DEFAULT_THETA, MobilityModel, lift_initial
from .stochastic import SHIFT_METHODS, stochastic_shift
from .wiener import WienerPath, increment, refine


@dataclass(frozen=True)
class SplittingConfig:
    horizon: float
    intervals: int
    epsilon: float
    theta: float = DEFAULT_THETA
    record_every: int = 1
    seed: int = 0
    shift_method: str = "spectral"
    det: DetStepConfig = field(default_factory=DetStepConfig)

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if int(self.intervals) != self.intervals or self.intervals < 1:
            raise ValueError("intervals must be a positive integer")
        if not self.epsilon > 0:
            raise ValueError("the splitting scheme needs epsilon > 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.shift_method not in SHIFT_METHODS:
            raise ValueError(f"shift_method must be one of {SHIFT_METHODS}")
        MobilityModel(self.epsilon, self.theta)

    @property
    def delta(self) -> float:
        return self.horizon / self.intervals

    @property
    def mobility(self) -> MobilityModel:
        return MobilityModel(self.epsilon, self.theta)


@dataclass
class SplitTelemetry:
    det: DetTelemetry = field(default_factory=DetTelemetry)
    cubic_fallbacks: int = 0
    intervals: int = 0


@dataclass
class Trajectory:
    """Recorded states of a splitting run.

    ``snapshots[i]`` is the state at ``times[i]`` and ``diagnostics[i]`` its
    record.  The last entry is always the final state of the run.
    """

    config: SplittingConfig
    ref_mean: float
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    telemetry: SplitTelemetry = field(default_factory=SplitTelemetry)
    cum_dissipation: float = 0.0
    cum_d2: float = 0.0
    events: int = 0

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    @property
    def t_end(self) -> float:
        return self.times[-1]

    def _record(self, u: Field, t: float) -> DiagnosticsRecord:
        rec = make_record(u, self.config.mobility, t, self.ref_mean, self.cum_dissipation, self.cum_d2)
        self.times.append(float(t))
        self.snapshots.append(u)
        self.diagnostics.append(rec)
        return rec

    def state_at(self, t: float, rtol: float = 1e-9) -> Field:
        times = np.asarray(self.times)
        i = int(np.argmin(np.abs(times - t)))
        if abs(times[i] - t) > rtol * max(1.0, abs(t)):
            raise KeyError(f"no snapshot recorded at t={t}")
        return self.snapshots[i]


def _shift(u: Field, db: float, method: str, tel: SplitTelemetry) -> Field:
    w = stochastic_shift(u, db, method)
    if w.min() > 0:
        return w
    if method == "spectral":
        tel.cubic_fallbacks += 1
        w = stochastic_shift(u, db, "cubic")
        if w.min() > 0:
            return w
    raise PositivityLoss(f"shift by {db:.4g} produced a non-positive state (min {w.min():.3e})")


def _advance(traj: Trajectory, u: Field, path: WienerPath, n_intervals: int, t0: float) -> None:
    cfg = traj.config
    m = cfg.mobility
    delta = cfg.delta
    every = cfg.record_every
    tau = traj.telemetry.det.last_tau
    tau = None if not np.isfinite(tau) else tau
    for j in range(1, n_intervals + 1):
        try:
            db = increment(path, (j - 1) * delta, j * delta)
        except NotAKnot as exc:
            raise PathGridMismatch(
                f"path has no knots at the splitting grid ({(j - 1) * delta}, {j * delta})"
            ) from exc
        # (D)
        u, tel = run_deterministic(u, m, cfg.det, delta, tau0=tau)
        tau = tel.last_tau
        traj.telemetry.det.merge(tel)
        traj.cum_dissipation += tel.dissipation
        traj.cum_d2 += tel.entropy_production
        traj.events += 1
        if traj.events % every == 0:
            traj._record(u, t0 + (j - 0.5) * delta)
        # (S)
        u = _shift(u, db, cfg.shift_method, traj.telemetry)
        traj.telemetry.intervals += 1
        traj.events += 1
        last = j == n_intervals
        if traj.events % every == 0 or last:
            traj._record(u, t0 + j * delta)


def run_splitting(u0: Field, cfg: SplittingConfig, path: WienerPath) -> Trajectory:
    """Lift ``u0`` by ``eps**theta`` and run ``cfg.intervals`` (D)+(S) intervals.

    The path must have knots at every multiple of ``cfg.delta`` up to the horizon.
    """
    m = cfg.mobility
    u = lift_initial(m, u0)
    traj = Trajectory(config=cfg, ref_mean=mean(u))
    traj._record(u, 0.0)
    _advance(traj, u, path, cfg.intervals, 0.0)
    return traj


def continue_run(traj: Trajectory, extra_T: float, path_extension: WienerPath) -> Trajectory:
    """Restart from the final state of ``traj`` and run ``extra_T`` more time.

    ``path_extension`` is an independent path starting at 0 on the same
    ``delta`` grid; its increments drive the new intervals.  Cumulative
    dissipation counters continue across the seam.
    """
    if not traj.snapshots:
        raise ValueError("cannot continue an empty trajectory")
    if extra_T < 0:
        raise ValueError("extra_T must be non-negative")
    if extra_T == 0:
        return traj
    delta = traj.config.delta
    k = extra_T / delta
    n_more = int(round(k))
    if n_more < 1 or abs(k - n_more) > 1e-9 * max(1.0, k):
        raise PathGridMismatch(f"extra_T={extra_T} is not a multiple of delta={delta}")
    new = Trajectory(
        config=traj.config,
        ref_mean=traj.ref_mean,
        times=list(traj.times),
        snapshots=list(traj.snapshots),
        diagnostics=list(traj.diagnostics),
        telemetry=copy.deepcopy(traj.telemetry),
        cum_dissipation=traj.cum_dissipation,
        cum_d2=traj.cum_d2,
        events=traj.events,
    )
    _advance(new, traj.final, path_extension, n_more, traj.t_end)
    return new


def splitting_self_convergence(
    u0: Field, cfg: SplittingConfig, path: WienerPath, doublings: int
) -> list[tuple[int, float]]:
    """Cauchy test of the splitting in the number of intervals.

    Runs ``cfg.intervals * 2**i`` intervals for ``i = 0..doublings`` on
    bridge-refined copies of ``path`` and returns, for each consecutive pair,
    ``(coarser interval count, max over coarse grid times of the sup-norm gap)``.
    """
    if doublings < 1:
        raise ValueError("doublings must be >= 1")
    if path.steps != cfg.intervals:
        raise PathGridMismatch(f"path has {path.steps} steps, config has {cfg.intervals} intervals")
    coarse_times = [j * cfg.delta for j in range(cfg.intervals + 1)]
    runs = []
    p = path
    for i in range(doublings + 1):
        c = replace(cfg, intervals=cfg.intervals * 2**i, record_every=1)
        traj = run_splitting(u0, c, p)
        runs.append((c.intervals, [traj.state_at(t).values for t in coarse_times]))
        p = refine(p)
    out = []
    for (n_a, states_a), (_, states_b) in zip(runs, runs[1:]):
        gap = max(float(np.max(np.abs(a - b))) for a, b in zip(states_a, states_b))
        out.append((n_a, gap))
    return out


def observed_order(gaps: list[tuple[int, float]], horizon: float) -> float:
    """Slope of ``log gap`` against ``log delta`` for the output of :func:`splitting_self_convergence`."""
    d = np.log([horizon / n for n, _ in gaps])
    g = np.log([gap for _, gap in gaps])
    return float(np.polyfit(d, g, 1)[0])
