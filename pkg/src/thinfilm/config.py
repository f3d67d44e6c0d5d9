"""Run configuration and the flat ``key = value`` config-file format.

Example file::

    # sine bump, one path
    L = 1.0
    n = 128
    T = 0.004
    intervals = 512
    epsilon = 0.01
    initial_condition = sine_bump
    mean_level = 1.0
    amplitude = 0.3
    epsilon_sweep = 0.1, 0.01, 0.001

Keys are the field names of :class:`RunConfig`; ``#`` starts a comment.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .deterministic import AVERAGING_RULES, DetStepConfig
from .errors import ConfigError
from .grid import Field, TorusGrid
from .io import read_snapshot
from .mobility import DEFAULT_THETA
from .splitting import SplittingConfig
from .stochastic import SHIFT_METHODS
from .wiener import WienerPath, sample_path

INITIAL_CONDITIONS = ("constant", "sine_bump", "gaussian_bump", "from_file")


@dataclass(frozen=True)
class RunConfig:
    L: float = 1.0
    n: int = 128
    T: float = 0.004
    intervals: int = 512
    epsilon: float = 0.01
    theta: float = DEFAULT_THETA
    record_every: int = 1
    seed: int = 0
    shift_method: str = "spectral"
    dt_internal: float | None = None
    averaging: str = "entropy_consistent"
    newton_tol: float = 1e-12
    newton_max_iter: int = 40
    linear_solver_tol: float = 1e-8
    initial_condition: str = "sine_bump"
    mean_level: float = 1.0
    amplitude: float = 0.3
    width: float = 0.1
    ic_file: str | None = None
    output_dir: str | None = None
    ensemble_size: int = 8
    epsilon_sweep: tuple = (0.1, 0.01, 0.001)
    n_doublings: int = 3
    decay_tol: float = 1e-3
    t_start: float | None = None
    workers: int | None = None

    def __post_init__(self):
        if self.initial_condition not in INITIAL_CONDITIONS:
            raise ConfigError(f"initial_condition must be one of {INITIAL_CONDITIONS}")
        if self.initial_condition == "from_file" and not self.ic_file:
            raise ConfigError("initial_condition = from_file needs ic_file")
        if self.shift_method not in SHIFT_METHODS:
            raise ConfigError(f"shift_method must be one of {SHIFT_METHODS}")
        if self.averaging not in AVERAGING_RULES:
            raise ConfigError(f"averaging must be one of {AVERAGING_RULES}")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size must be >= 1")
        if any(e <= 0 for e in self.epsilon_sweep):
            raise ConfigError("epsilon_sweep entries must be positive")
        if self.n_doublings < 0:
            raise ConfigError("n_doublings must be >= 0")
        object.__setattr__(self, "epsilon_sweep", tuple(float(e) for e in self.epsilon_sweep))

    def grid(self) -> TorusGrid:
        return TorusGrid(self.L, self.n)

    def initial_field(self) -> Field:
        g = self.grid()
        x = g.x
        if self.initial_condition == "constant":
            v = np.full(g.n, self.mean_level)
        elif self.initial_condition == "sine_bump":
            v = self.mean_level + self.amplitude * np.sin(2 * np.pi * x / self.L)
        elif self.initial_condition == "gaussian_bump":
            v = self.mean_level + self.amplitude * np.exp(-(((x - 0.5 * self.L) / (self.width * self.L)) ** 2))
        else:
            u, meta = read_snapshot(self.ic_file)
            if u.grid.n != g.n or abs(u.grid.length - g.length) > 1e-12 * g.length:
                raise ConfigError(f"{self.ic_file}: grid (L={u.grid.length}, n={u.grid.n}) does not match config")
            v = u.values
        if np.min(v) < 0:
            raise ConfigError(f"initial condition is negative somewhere (min {np.min(v):.3e})")
        return Field(g, v)

    def det_config(self) -> DetStepConfig:
        return DetStepConfig(
            dt_internal=self.dt_internal,
            averaging=self.averaging,
            newton_tol=self.newton_tol,
            newton_max_iter=self.newton_max_iter,
            linear_solver_tol=self.linear_solver_tol,
        )

    def splitting_config(self, epsilon: float | None = None, seed: int | None = None) -> SplittingConfig:
        return SplittingConfig(
            horizon=self.T,
            intervals=self.intervals,
            epsilon=self.epsilon if epsilon is None else epsilon,
            theta=self.theta,
            record_every=self.record_every,
            seed=self.seed if seed is None else seed,
            shift_method=self.shift_method,
            det=self.det_config(),
        )

    def path(self, seed: int | None = None) -> WienerPath:
        return sample_path(self.seed if seed is None else seed, self.T, self.intervals)


def _optional(conv):
    def parse(s):
        return None if s.strip().lower() in ("", "none") else conv(s)

    return parse


def _float_list(s):
    return tuple(float(p) for p in s.replace(";", ",").split(",") if p.strip())


_PARSERS = {
    "L": float,
    "n": int,
    "T": float,
    "intervals": int,
    "epsilon": float,
    "theta": float,
    "record_every": int,
    "seed": int,
    "shift_method": str,
    "dt_internal": _optional(float),
    "averaging": str,
    "newton_tol": float,
    "newton_max_iter": int,
    "linear_solver_tol": float,
    "initial_condition": str,
    "mean_level": float,
    "amplitude": float,
    "width": float,
    "ic_file": _optional(str),
    "output_dir": _optional(str),
    "ensemble_size": int,
    "epsilon_sweep": _float_list,
    "n_doublings": int,
    "decay_tol": float,
    "t_start": _optional(float),
    "workers": _optional(int),
}


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    cp = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None
    )
    cp.optionxform = str
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for key, raw in cp["run"].items():
        if key not in _PARSERS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            values[key] = _PARSERS[key](raw.strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    try:
        return dataclasses.replace(base or RunConfig(), **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    return parse_config_text(p.read_text(), base)


def dump_config(cfg: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ", ".join(repr(x) for x in v)
        lines.append(f"{f.name} = {'none' if v is None else v}")
    return "\n".join(lines) + "\n"
