"""Monte Carlo ensembles over Wiener paths and sweeps over the regularization.

Replica ``i`` is driven by the path seeded with ``derive_seed(base_seed, i)``,
so results do not depend on worker count or completion order; aggregation
always reduces in replica-index order.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .diagnostics import decay_correction_term, decay_fit
from .errors import EnsembleFailure, ThinFilmError
from .io import fmt, read_trajectory_csv, write_trajectory_csv
from .splitting import run_splitting
from .wiener import derive_seed

log = logging.getLogger(__name__)

WORKERS_ENV = "THINFILM_WORKERS"
MAX_FAILURE_FRACTION = 0.1
ENSEMBLE_COLUMNS = ("t", "J_mean", "J_q05", "J_q95", "supdev_mean", "supdev_max", "fraction_decayed")


@dataclass
class EnsembleStats:
    times: np.ndarray
    J_mean: np.ndarray
    J_q05: np.ndarray
    J_q95: np.ndarray
    supdev_mean: np.ndarray
    supdev_max: np.ndarray
    fraction_decayed: np.ndarray
    n_paths: int = 0
    failures: dict = field(default_factory=dict)
    records: dict = field(default_factory=dict, repr=False)

    def columns(self):
        return [self.times] + [getattr(self, c) for c in ENSEMBLE_COLUMNS[1:]]


def replica_seed(base_seed: int, index: int) -> int:
    return derive_seed(base_seed, index)


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def run_replica(cfg: RunConfig, index: int, epsilon: float | None = None):
    """Run replica ``index`` of ``cfg``; returns the trajectory."""
    seed = replica_seed(cfg.seed, index)
    scfg = cfg.splitting_config(epsilon=epsilon, seed=seed)
    return run_splitting(cfg.initial_field(), scfg, cfg.path(seed))


def _replica_job(args):
    cfg, index = args
    try:
        return index, run_replica(cfg, index).diagnostics, None
    except ThinFilmError as exc:
        return index, None, f"{type(exc).__name__}: {exc}"


def aggregate(records_by_path: dict, decay_tol: float) -> EnsembleStats:
    """Pathwise statistics from ``{replica index: list of DiagnosticsRecord}``."""
    if not records_by_path:
        raise EnsembleFailure("no successful paths to aggregate")
    order = sorted(records_by_path)
    first = records_by_path[order[0]]
    times = np.array([r.t for r in first])
    J = np.array([[r.energy_J for r in records_by_path[i]] for i in order])
    sd = np.array([[r.sup_dev for r in records_by_path[i]] for i in order])
    if J.shape[1] != times.size:
        raise EnsembleFailure("paths recorded different numbers of snapshots")
    q05, q95 = np.quantile(J, [0.05, 0.95], axis=0)
    return EnsembleStats(
        times=times,
        J_mean=J.mean(axis=0),
        J_q05=q05,
        J_q95=q95,
        supdev_mean=sd.mean(axis=0),
        supdev_max=sd.max(axis=0),
        fraction_decayed=(sd < decay_tol).mean(axis=0),
        n_paths=len(order),
        records=dict(records_by_path),
    )


def write_ensemble(stats: EnsembleStats, output_dir) -> None:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, recs in sorted(stats.records.items()):
        write_trajectory_csv(out / f"path_{i:04d}.csv", recs)
    cols = stats.columns()
    lines = [",".join(ENSEMBLE_COLUMNS)]
    lines += [",".join(fmt(c[k]) for c in cols) for k in range(stats.times.size)]
    (out / "ensemble.csv").write_text("\n".join(lines) + "\n")
    if stats.failures:
        (out / "failures.txt").write_text(
            "".join(f"{i}\t{msg}\n" for i, msg in sorted(stats.failures.items()))
        )


def aggregate_from_dir(output_dir, decay_tol: float) -> EnsembleStats:
    """Recompute ensemble statistics from the per-path CSV files in ``output_dir``."""
    recs = {}
    for p in sorted(Path(output_dir).glob("path_*.csv")):
        recs[int(p.stem.split("_")[1])] = read_trajectory_csv(p)
    return aggregate(recs, decay_tol)


def run_ensemble(cfg: RunConfig, workers: int | None = None) -> EnsembleStats:
    """Run ``cfg.ensemble_size`` independent replicas and aggregate them.

    Individual path failures are recorded in ``stats.failures``; the whole
    ensemble fails only if more than 10% of the paths fail.
    """
    workers = resolve_workers(workers if workers is not None else cfg.workers)
    jobs = [(cfg, i) for i in range(cfg.ensemble_size)]
    if workers == 1 or cfg.ensemble_size == 1:
        results = [_replica_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, cfg.ensemble_size)) as pool:
            results = list(pool.map(_replica_job, jobs))
    ok = {i: recs for i, recs, err in results if err is None}
    failures = {i: err for i, _, err in results if err is not None}
    for i, err in sorted(failures.items()):
        log.warning("replica %d failed: %s", i, err)
    if len(failures) > MAX_FAILURE_FRACTION * cfg.ensemble_size:
        raise EnsembleFailure(f"{len(failures)} of {cfg.ensemble_size} paths failed: {failures}")
    stats = aggregate(ok, cfg.decay_tol)
    stats.failures = failures
    if cfg.output_dir:
        write_ensemble(stats, cfg.output_dir)
    return stats


@dataclass
class SweepReport:
    epsilons: list
    gaps: list
    floors: list
    rates: list
    correction_terms: list
    K_bound: float
    trajectories: list = field(default_factory=list, repr=False)

    @property
    def gaps_shrink(self) -> bool:
        return all(b < a for a, b in zip(self.gaps, self.gaps[1:]))

    @property
    def floors_decrease(self) -> bool:
        return all(b < a for a, b in zip(self.floors, self.floors[1:]))

    @property
    def corrections_decrease(self) -> bool:
        return all(b < a for a, b in zip(self.correction_terms, self.correction_terms[1:]))


def _trajectory_gap(a, b) -> float:
    if len(a.times) != len(b.times) or not np.allclose(a.times, b.times, rtol=1e-12, atol=0):
        raise ValueError("trajectories were recorded at different times")
    return max(float(np.max(np.abs(x.values - y.values))) for x, y in zip(a.snapshots, b.snapshots))


def epsilon_sweep(cfg: RunConfig) -> SweepReport:
    """Run the same Wiener path for every epsilon of ``cfg.epsilon_sweep`` (decreasing).

    Reports consecutive sup-norm trajectory gaps, the lowest height seen in
    each run, the fitted energy decay rate (``nan`` when the fit is not
    possible) and the dissipation correction ``sqrt(eps) K_eps int int u_xx^2``
    evaluated with one common height bound (the largest height over all runs).
    """
    eps = list(cfg.epsilon_sweep)
    if not eps:
        raise ValueError("epsilon_sweep is empty")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon_sweep must be strictly decreasing")
    u0 = cfg.initial_field()
    path = cfg.path()
    trajs = [run_splitting(u0, cfg.splitting_config(epsilon=e), path) for e in eps]
    gaps = [_trajectory_gap(a, b) for a, b in zip(trajs, trajs[1:])]
    floors = [min(r.min_u for r in tr.diagnostics) for tr in trajs]
    K_bound = max(max(r.max_u for r in tr.diagnostics) for tr in trajs)
    rates = []
    for tr in trajs:
        try:
            rates.append(decay_fit(tr, cfg.t_start)[0])
        except ThinFilmError:
            rates.append(float("nan"))
    corr = [decay_correction_term(e, cfg.theta, K_bound, tr.cum_d2) for e, tr in zip(eps, trajs)]
    return SweepReport(eps, gaps, floors, rates, corr, K_bound, trajs)
