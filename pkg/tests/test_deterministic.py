import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinfilm.deterministic import (
    AVERAGING_RULES,
    DetStepConfig,
    default_dt_internal,
    deterministic_substep,
    edge_mobility,
    run_deterministic,
)
from thinfilm.diagnostics import energy_J
from thinfilm.errors import NonPositiveHeight, PositivityLoss
from thinfilm.grid import TorusGrid, integrate
from thinfilm.mobility import MobilityModel, entropy_functional, f_eps
from thinfilm.reference import dense_newton_step, dense_residual, edge_mobility_quotient

M01 = MobilityModel(0.01)
CFG = DetStepConfig()


def bump(n, amp=0.5, L=1.0):
    g = TorusGrid(L, n)
    return g.sample(lambda x: 1 + amp * np.sin(2 * np.pi * x / L))


def test_config_validation():
    for bad in (dict(dt_internal=0.0), dict(averaging="geometric"), dict(newton_tol=0.0), dict(newton_max_iter=0)):
        with pytest.raises(ValueError):
            DetStepConfig(**bad)


@pytest.mark.parametrize("rule", AVERAGING_RULES)
def test_edge_mobility_consistency(rule):
    for c in (0.05, 0.7, 3.0):
        assert edge_mobility(M01, c, c, rule) == pytest.approx(f_eps(M01, c), rel=1e-14)


def test_entropy_consistent_mobility_is_a_mean_value():
    rng = np.random.default_rng(4)
    a, b = 10 ** rng.uniform(-2, 1, (2, 2000))
    M = edge_mobility(M01, a, b)
    lo, hi = np.minimum(f_eps(M01, a), f_eps(M01, b)), np.maximum(f_eps(M01, a), f_eps(M01, b))
    assert np.all(M >= lo * (1 - 1e-13)) and np.all(M <= hi * (1 + 1e-13))


def test_entropy_consistent_mobility_matches_difference_quotient():
    rng = np.random.default_rng(5)
    a, b = rng.uniform(0.1, 2.0, (2, 500))
    assert np.allclose(edge_mobility(M01, a, b), edge_mobility_quotient(0.01, a, b), rtol=1e-9)


def test_arithmetic_mobility_monotone():
    s = np.linspace(0.01, 3, 200)
    assert np.all(np.diff(edge_mobility(M01, s, 1.0, "arithmetic")) > 0)
    assert np.all(np.diff(edge_mobility(M01, 1.0, s, "arithmetic")) > 0)


def test_edge_mobility_rejects_non_positive():
    with pytest.raises(NonPositiveHeight):
        edge_mobility(M01, 0.0, 1.0)


def test_constant_state_is_fixed():
    v = TorusGrid(1.0, 32).constant(0.8)
    res = deterministic_substep(v, M01, CFG, 1e-3)
    assert np.array_equal(res.field.values, v.values)
    assert res.dissipation == 0.0 and res.entropy_production == 0.0


@pytest.mark.parametrize("rule", AVERAGING_RULES)
def test_single_step_invariants(rule):
    v = bump(64)
    res = deterministic_substep(v, M01, DetStepConfig(averaging=rule), 1e-5)
    w = res.field
    assert abs(integrate(w) - integrate(v)) <= 1e-12 * integrate(v)
    assert energy_J(w) < energy_J(v)
    assert energy_J(w) + res.dissipation <= energy_J(v) + 1e-10
    assert w.min() > 0


def test_entropy_inequality_entropy_consistent():
    v = bump(64)
    res = deterministic_substep(v, M01, CFG, 1e-5)
    S0 = entropy_functional(M01, v)
    assert entropy_functional(M01, res.field) + res.entropy_production <= S0 + 1e-8 * abs(S0)


def test_single_step_matches_dense_oracle_n64():
    v = bump(64)
    ours = deterministic_substep(v, M01, CFG, 1e-5).field.values
    ref = dense_newton_step(v.values, 0.01, 1e-5, v.grid.h)
    assert np.max(np.abs(ours - ref)) < 1e-9
    # residual is small relative to the scale of the stiff operator
    stiff = 1 + 16 * 1e-5 * np.max(f_eps(M01, ours)) / v.grid.h**4
    assert np.max(np.abs(dense_residual(ours, v.values, 0.01, 1e-5, v.grid.h))) < 1e-12 * stiff * ours.max()


@pytest.mark.parametrize("rule", ["arithmetic", "harmonic"])
def test_other_rules_match_dense_oracle(rule):
    g = TorusGrid(1.0, 12, pow2=False)
    v = g.sample(lambda x: 1 + 0.3 * np.cos(2 * np.pi * x))
    ours = deterministic_substep(v, M01, DetStepConfig(averaging=rule), 2e-5).field.values
    assert np.max(np.abs(ours - dense_newton_step(v.values, 0.01, 2e-5, g.h, rule))) < 1e-9


def test_substeps_conserve_mass():
    v = bump(64)
    w, tel = run_deterministic(v, M01, DetStepConfig(dt_internal=1e-5), 1e-4)
    assert tel.accepted == 10 and tel.rejected == 0
    assert abs(integrate(w) - integrate(v)) <= 1e-11 * integrate(v)
    assert energy_J(w) + tel.dissipation <= energy_J(v) + 1e-10


def test_run_deterministic_single_step_when_uncapped():
    v = bump(32)
    _, tel = run_deterministic(v, M01, CFG, 1e-6)
    assert tel.accepted == 1 and tel.last_tau == pytest.approx(1e-6)


def test_step_rejection_and_recovery():
    # a rough, nearly touching state with a long step forces halving
    g = TorusGrid(1.0, 32)
    v = g.sample(lambda x: 0.02 + np.where(np.abs(x - 0.5) < 0.2, 1.0, 0.0))
    w, tel = run_deterministic(v, MobilityModel(1e-3), CFG, 1e-3)
    assert w.min() > 0
    assert abs(integrate(w) - integrate(v)) <= 1e-11 * integrate(v)
    assert tel.accepted >= 1


def test_non_positive_start_raises():
    v = TorusGrid(1.0, 16).sample(lambda x: np.sin(2 * np.pi * x))
    with pytest.raises(PositivityLoss):
        deterministic_substep(v, M01, CFG, 1e-6)


def test_default_dt_internal_scale():
    v = bump(64)
    assert default_dt_internal(v, M01) == pytest.approx(v.grid.h**4 / (8 * f_eps(M01, 1.5)), rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.floats(-6, -4.5),
    st.floats(-3, -1),
)
def test_energy_and_entropy_on_random_states(seed, log_tau, log_eps):
    rng = np.random.default_rng(seed)
    g = TorusGrid(1.0, 16)
    m = MobilityModel(10.0**log_eps)
    v = g.field(1 + 0.3 * rng.uniform(-1, 1, 16))
    res = deterministic_substep(v, m, CFG, 10.0**log_tau)
    assert abs(integrate(res.field) - integrate(v)) <= 1e-12 * integrate(v)
    assert energy_J(res.field) + res.dissipation <= energy_J(v) * (1 + 1e-10)
    S0 = entropy_functional(m, v)
    assert entropy_functional(m, res.field) + res.entropy_production <= S0 + 1e-8 * abs(S0)
