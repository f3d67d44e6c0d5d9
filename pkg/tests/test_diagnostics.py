import numpy as np
import pytest

from thinfilm.diagnostics import (
    RECORD_COLUMNS,
    DiagnosticsRecord,
    decay_correction_term,
    decay_fit,
    energy_J,
    k_epsilon,
    lemma_ratio_estimates,
    make_record,
    sobolev_constant,
    sobolev_constant_estimate,
    sup_deviation,
)
from thinfilm.errors import EnergyUnderflow, InsufficientData, InvalidBound, NonPositiveHeight
from thinfilm.grid import TorusGrid
from thinfilm.mobility import MobilityModel, lift_initial
from thinfilm.splitting import SplittingConfig, run_splitting
from thinfilm.wiener import sample_path

G = TorusGrid(1.0, 128)


def rec(t, J):
    return DiagnosticsRecord(t, 1.0, J, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0)


def test_energy_examples():
    assert energy_J(G.constant(2.0)) == 0.0
    a = 0.3
    u = G.sample(lambda x: a * np.sin(2 * np.pi * x))
    assert energy_J(u) == pytest.approx(a * a * np.pi**2, rel=1e-3)
    assert energy_J(u * 2) == pytest.approx(4 * energy_J(u), rel=1e-14)


def test_sup_deviation_examples():
    assert sup_deviation(G.constant(1.3), 1.3) == 0.0
    m = MobilityModel(0.01)
    lifted = lift_initial(m, G.constant(0.7))
    assert sup_deviation(lifted, 0.7) == pytest.approx(0.01**0.3, abs=1e-14)


def test_sobolev_constant_closed_form():
    for n, L in ((16, 1.0), (128, 1.0), (64, 3.0)):
        g = TorusGrid(L, n)
        assert sobolev_constant(g) == pytest.approx(L * (n * n - 1) / (12 * n * n), rel=1e-12)


def test_sobolev_estimate_is_sharp_lower_bound():
    g = TorusGrid(1.0, 64)
    est, exact = sobolev_constant_estimate(g), sobolev_constant(g)
    assert est <= exact * (1 + 1e-12)
    assert est >= 0.99 * exact


def test_sobolev_chain_on_random_fields():
    rng = np.random.default_rng(0)
    C = sobolev_constant(G)
    for _ in range(500):
        u = G.field(rng.standard_normal(128).cumsum())
        ref = u.values.mean()
        assert sup_deviation(u, ref) ** 2 <= C * 2 * energy_J(u) * (1 + 1e-12)


def test_k_epsilon():
    pi2, c = np.pi**2, 16 * (np.pi + 1) ** 2
    k, lim = k_epsilon(1.0, 0.3, 1.0)
    assert k == pytest.approx(pi2 * 9 / (c * np.sqrt(2)), rel=1e-14)
    assert k == pytest.approx(0.228861379348, rel=1e-11)
    assert lim == pytest.approx(pi2 / c, rel=1e-14)
    k0, lim0 = k_epsilon(0.0, 0.3, 2.0)
    assert k0 == pytest.approx(lim0, rel=1e-14) and lim0 == pytest.approx(pi2 / (c * 2.0))
    assert k_epsilon(1e-30, 0.3, 2.0)[0] == pytest.approx(lim0, rel=1e-8)
    assert k_epsilon(0.01, 0.3, 3.0)[0] < k_epsilon(0.01, 0.3, 2.0)[0]
    for bad in (0.0, -1.0, np.inf, np.nan):
        with pytest.raises(InvalidBound):
            k_epsilon(0.01, 0.3, bad)


def test_decay_correction_term():
    assert decay_correction_term(0.01, 0.3, 2.0, 5.0) == pytest.approx(0.1 * k_epsilon(0.01, 0.3, 2.0)[0] * 5.0)
    assert decay_correction_term(0.0, 0.3, 2.0, 5.0) == 0.0


def test_decay_fit_exact_exponential():
    t = np.linspace(0, 2, 50)
    rate, r2 = decay_fit([rec(s, 2.5 * np.exp(-3 * s)) for s in t])
    assert rate == pytest.approx(3.0, abs=1e-9)
    assert r2 == pytest.approx(1.0, abs=1e-12)


def test_decay_fit_noisy():
    rng = np.random.default_rng(1)
    t = np.linspace(0, 2, 200)
    J = np.exp(-3 * t) * (1 + rng.uniform(-0.01, 0.01, t.size))
    rate, r2 = decay_fit([rec(s, j) for s, j in zip(t, J)])
    assert rate == pytest.approx(3.0, rel=0.05) and r2 > 0.99


def test_decay_fit_window():
    t = np.linspace(0, 1, 40)
    J = np.where(t < 0.5, np.exp(-10 * t), np.exp(-5) * np.exp(-2 * (t - 0.5)))
    rate, _ = decay_fit([rec(s, j) for s, j in zip(t, J)], t_start=0.5)
    assert rate == pytest.approx(2.0, abs=1e-9)


def test_decay_fit_errors():
    with pytest.raises(InsufficientData):
        decay_fit([rec(s, 1.0) for s in range(5)])
    with pytest.raises(InsufficientData):
        decay_fit([])
    with pytest.raises(EnergyUnderflow) as info:
        decay_fit([rec(s, 1.0 if s < 12 else 0.0) for s in range(20)])
    assert info.value.t_hit == 12.0


def test_decay_fit_constant_run_underflows():
    g = TorusGrid(1.0, 16)
    tr = run_splitting(g.constant(1.0), SplittingConfig(1e-3, 16, 0.01), sample_path(0, 1e-3, 16))
    with pytest.raises(EnergyUnderflow):
        decay_fit(tr)


def test_lemma_ratios():
    m = MobilityModel(0.01)
    assert lemma_ratio_estimates(G.constant(1.0), m, 0.5) == (np.inf, np.inf)
    r_weighted, r_mass = lemma_ratio_estimates(G.sample(lambda x: 1 + 0.1 * np.sin(2 * np.pi * x)), m, 0.5)
    assert 0 < r_weighted < np.inf and 0 < r_mass < np.inf
    with pytest.raises(NonPositiveHeight):
        lemma_ratio_estimates(G.constant(0.0), m, 0.5)


def test_lemma_ratios_along_a_run():
    g = TorusGrid(1.0, 64)
    u0 = g.sample(lambda x: 1 + 0.3 * np.sin(2 * np.pi * x))
    tr = run_splitting(u0, SplittingConfig(1e-3, 16, 0.01), sample_path(1, 1e-3, 16))
    m = tr.config.mobility
    ratios = np.array([lemma_ratio_estimates(u, m, 0.5) for u in tr.snapshots])
    assert np.all(np.isfinite(ratios)) and ratios.min() > 0


def test_make_record_columns():
    m = MobilityModel(0.01)
    u = G.sample(lambda x: 1 + 0.2 * np.cos(2 * np.pi * x))
    r = make_record(u, m, 0.5, 1.0, 0.1, 0.2)
    assert tuple(r.as_row()) == tuple(getattr(r, c) for c in RECORD_COLUMNS)
    assert RECORD_COLUMNS == (
        "t", "mass", "energy_J", "entropy", "min_u", "max_u", "sup_dev", "cum_dissipation", "cum_d2",
    )
    assert r.sup_dev == pytest.approx(0.2, abs=1e-12)
    assert np.isnan(make_record(u, MobilityModel(0.0), 0.0, 1.0, 0.0, 0.0).entropy)
