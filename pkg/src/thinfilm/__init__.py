"""Stochastic thin-film simulator built on Trotter-Kato splitting.

The deterministic flow ``u_t = -(f_eps(u) u_xxx)_x`` is advanced by an
implicit, entropy-consistent finite-volume step; the Stratonovich transport
noise ``(u o dbeta)_x`` is applied exactly as a random translation.
"""

from .config import RunConfig, load_config, parse_config_text
from .deterministic import DetStepConfig, deterministic_substep, edge_mobility, run_deterministic
from .diagnostics import (
    DiagnosticsRecord,
    decay_correction_term,
    decay_fit,
    energy_J,
    k_epsilon,
    sobolev_constant,
    sobolev_constant_estimate,
    sup_deviation,
)
from .ensemble import EnsembleStats, epsilon_sweep, run_ensemble
from .errors import *  # noqa: F401,F403
from .grid import Field, TorusGrid, dx, dxx, dxxx, forward_diff, inner, integrate, l2_norm, mean
from .mobility import (
    MobilityModel,
    entropy_functional,
    entropy_G,
    entropy_G_prime,
    entropy_G_second,
    f_eps,
    f_eps_prime,
    lift_initial,
)
from .splitting import (
    SplittingConfig,
    Trajectory,
    continue_run,
    observed_order,
    run_splitting,
    splitting_self_convergence,
)
from .stochastic import phi_integral_check, spectral_dx, stochastic_shift
from .wiener import WienerPath, derive_seed, increment, refine, sample_path

__version__ = "0.1.0"
