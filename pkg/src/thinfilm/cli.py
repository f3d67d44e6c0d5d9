"""Command-line interface: ``thinfilm <subcommand> [--config FILE] [--seed S] [--out DIR] [--quiet]``.

Exit status is 0 on success, 1 when ``validate`` finds a failing invariant or a
run fails, and 2 on usage errors (including a missing config file).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path


from .config import ConfigError, RunConfig, dump_config, load_config
from .diagnostics import decay_fit
from .ensemble import ENSEMBLE_COLUMNS, epsilon_sweep, run_ensemble
from .errors import ThinFilmError
from .io import fmt, read_trajectory_csv, write_snapshot, write_trajectory_csv
from .splitting import observed_order, run_splitting, splitting_self_convergence
from .validation import format_table, run_validation

log = logging.getLogger("thinfilm")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", default=argparse.SUPPRESS, help="key = value config file")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="base seed")
    p.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p.add_argument("--workers", type=int, default=argparse.SUPPRESS, help="parallel replicas")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="thinfilm", description="Stochastic thin-film splitting simulator", parents=[common])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="one path: trajectory CSV and snapshots")
    sub.add_parser("ensemble", parents=[common], help="independent paths, aggregate statistics")
    sub.add_parser("converge-split", parents=[common], help="splitting self-convergence in N")
    sub.add_parser("converge-eps", parents=[common], help="epsilon sweep on one path")
    p = sub.add_parser("decay-fit", parents=[common], help="fit ln J(t) of a stored trajectory CSV")
    p.add_argument("csv")
    p.add_argument("--t-start", type=float, default=None)
    sub.add_parser("validate", parents=[common], help="run the invariant self-test")
    return parser


def _load(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            cfg = load_config(args.config)
        except FileNotFoundError as exc:
            raise UsageError(str(exc)) from exc
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        overrides["output_dir"] = args.out
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    return dataclasses.replace(cfg, **overrides)


def _out_dir(cfg: RunConfig, default: str) -> Path:
    out = Path(cfg.output_dir or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(cfg: RunConfig) -> int:
    out = _out_dir(cfg, "thinfilm_out")
    traj = run_splitting(cfg.initial_field(), cfg.splitting_config(), cfg.path())
    write_trajectory_csv(out / "trajectory.csv", traj.diagnostics)
    snaps = out / "snapshots"
    for k, (t, u) in enumerate(zip(traj.times, traj.snapshots)):
        write_snapshot(snaps / f"snap_{k:05d}.csv", u, t, cfg.epsilon)
    (out / "config.txt").write_text(dump_config(cfg))
    last = traj.diagnostics[-1]
    tel = traj.telemetry
    log.info(
        "t=%.6g  J=%.6e  min_u=%.6e  sup_dev=%.3e  steps=%d rejected=%d cubic_fallbacks=%d",
        last.t, last.energy_J, last.min_u, last.sup_dev, tel.det.accepted, tel.det.rejected, tel.cubic_fallbacks,
    )
    log.info("wrote %s", out / "trajectory.csv")
    return 0


def cmd_ensemble(cfg: RunConfig) -> int:
    out = _out_dir(cfg, "thinfilm_ensemble")
    stats = run_ensemble(dataclasses.replace(cfg, output_dir=str(out)))
    log.info(
        "%d paths (%d failed); final J_mean=%.4e  supdev_max=%.3e  fraction_decayed=%.3f",
        stats.n_paths, len(stats.failures), stats.J_mean[-1], stats.supdev_max[-1], stats.fraction_decayed[-1],
    )
    log.info("columns: %s -> %s", ",".join(ENSEMBLE_COLUMNS), out / "ensemble.csv")
    return 0


def cmd_converge_split(cfg: RunConfig) -> int:
    out = _out_dir(cfg, "thinfilm_converge")
    gaps = splitting_self_convergence(
        cfg.initial_field(), cfg.splitting_config(), cfg.path(), max(cfg.n_doublings, 1)
    )
    lines = ["intervals,delta,max_gap"] + [f"{n},{fmt(cfg.T / n)},{fmt(g)}" for n, g in gaps]
    (out / "converge_split.csv").write_text("\n".join(lines) + "\n")
    for n, g in gaps:
        log.info("N+1=%5d  gap=%.4e", n, g)
    if len(gaps) >= 2:
        log.info("observed order %.3f", observed_order(gaps, cfg.T))
    return 0


def cmd_converge_eps(cfg: RunConfig) -> int:
    out = _out_dir(cfg, "thinfilm_converge_eps")
    rep = epsilon_sweep(cfg)
    lines = ["epsilon,floor,rate,correction,gap_to_next"]
    for i, e in enumerate(rep.epsilons):
        gap = rep.gaps[i] if i < len(rep.gaps) else float("nan")
        lines.append(",".join(fmt(x) for x in (e, rep.floors[i], rep.rates[i], rep.correction_terms[i], gap)))
    (out / "converge_eps.csv").write_text("\n".join(lines) + "\n")
    for line in lines:
        log.info(line)
    log.info("gaps shrink: %s  floors decrease: %s", rep.gaps_shrink, rep.floors_decrease)
    return 0


def cmd_decay_fit(args, cfg: RunConfig) -> int:
    records = read_trajectory_csv(args.csv)
    rate, r2 = decay_fit(records, args.t_start)
    print(f"rate={rate!r} r_squared={r2!r}")
    return 0


def cmd_validate(cfg: RunConfig, quiet: bool) -> int:
    checks = run_validation(seed=cfg.seed)
    if not quiet:
        print(format_table(checks))
    return 0 if all(c.passed for c in checks) else 1


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        quiet = getattr(args, "quiet", False)
        logging.basicConfig(level=logging.WARNING if quiet else logging.INFO, format="%(message)s")
        cfg = _load(args)
    except (UsageError, ConfigError) as exc:
        print(f"thinfilm: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "ensemble":
            return cmd_ensemble(cfg)
        if args.command == "converge-split":
            return cmd_converge_split(cfg)
        if args.command == "converge-eps":
            return cmd_converge_eps(cfg)
        if args.command == "decay-fit":
            return cmd_decay_fit(args, cfg)
        if args.command == "validate":
            return cmd_validate(cfg, quiet)
    except (ThinFilmError, OSError) as exc:
        print(f"thinfilm: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 2


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
