import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import free_gaussian
from pathslice import (ActionExpansion, ConfigurationError, CosinePotential, TimeOrderError, WaveFunction,
                       WindowError, ZeroPotential, apply_short_time_propagator, build_step, free_propagate,
                       gaussian_packet, l2_distance, make_grid, make_low_regularity_potential,
                       random_bandlimited_state)
from pathslice.oio import fresnel_prefactor, operator_norm

G = make_grid()


@pytest.fixture(scope="module")
def cos1():
    return ActionExpansion(CosinePotential(1.0, 1.0), 1, grid=G)


def test_free_identity_limit(packet):
    assert l2_distance(free_propagate(packet, 1e-6, 1.0), packet) <= 1e-4


def test_free_norm(packet):
    assert free_propagate(packet, 0.7, 1.0).norm() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("hbar", [1.0, 0.5])
def test_free_closed_form(hbar):
    g = make_grid(12, 1024)
    f = gaussian_packet(g, hbar=hbar)
    out = free_propagate(f, 1.0, hbar)
    exact = WaveFunction(g, free_gaussian(g.x, 1.0, hbar))
    assert l2_distance(out, exact) <= 1e-8
    # |psi|^2 spreads with variance (1 + (hbar t)^2) / 2
    var = g.spacing * np.sum(g.x ** 2 * np.abs(out.values) ** 2)
    assert var == pytest.approx((1 + hbar ** 2) / 2, abs=1e-8)


def test_free_time_order(packet):
    with pytest.raises(TimeOrderError):
        free_propagate(packet, 0.0)
    with pytest.raises(TimeOrderError):
        free_propagate(packet, -0.1)


def test_free_group_property(packet):
    half = free_propagate(free_propagate(packet, 0.15), 0.15)
    assert l2_distance(half, free_propagate(packet, 0.3)) <= 1e-10


def test_prefactor_branch():
    assert fresnel_prefactor(1.0, 1.0) == pytest.approx(np.exp(-0.25j * np.pi) / np.sqrt(2 * np.pi))
    # (2 pi i a)^(-1/2) squared must give 1 / (2 pi i a)
    assert fresnel_prefactor(0.3, 0.5) ** 2 == pytest.approx(1 / (2j * np.pi * 0.15))


@pytest.mark.parametrize("dt", [1 / 4, 1 / 32, 1e-3])
def test_dense_matches_spectral_for_zero_potential(dt, packet):
    e = ActionExpansion(ZeroPotential(), 2, grid=G)
    dense = apply_short_time_propagator(e, packet, dt)
    assert l2_distance(dense, free_propagate(packet, dt)) <= 1e-8


@pytest.mark.parametrize("dt", [1 / 8, 1 / 4, 1.0])
def test_sampled_chirp_agrees_when_unaliased(dt, packet, cos1):
    spectral = apply_short_time_propagator(cos1, packet, dt)
    chirp = apply_short_time_propagator(cos1, packet, dt, method="chirp")
    assert l2_distance(spectral, chirp) <= 1e-8


def test_sampled_chirp_refuses_aliasing(packet, cos1):
    with pytest.raises(ConfigurationError, match="aliases"):
        apply_short_time_propagator(cos1, packet, 1 / 32, method="chirp")


def test_window_and_time_errors(packet, cos1):
    with pytest.raises(WindowError):
        apply_short_time_propagator(cos1, packet, 1.5)
    with pytest.raises(TimeOrderError):
        apply_short_time_propagator(cos1, packet, 0.0)
    # a wider window admits the step
    assert apply_short_time_propagator(cos1, packet, 1.5, T=2.0).norm() > 0


@given(a=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       b=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       seed=st.integers(0, 10 ** 6))
def test_linearity(a, b, seed, cos1):
    rng = np.random.default_rng(seed)
    f, g = random_bandlimited_state(G, rng), random_bandlimited_state(G, rng)
    step = build_step(cos1, 0.125, G)
    lhs = step.apply(a * f + b * g)
    rhs = a * step.apply(f) + b * step.apply(g)
    assert l2_distance(lhs, rhs) <= 1e-12 * (1 + abs(a) + abs(b))


def test_identity_limit(packet, cos1):
    errs = [l2_distance(apply_short_time_propagator(cos1, packet, eps), packet) for eps in (1e-2, 1e-3, 1e-4)]
    assert errs[1] <= 0.01
    assert errs[0] > errs[1] > errs[2]


def test_boundedness_witness(cos1):
    rng = np.random.default_rng(2024)
    ratios = []
    for _ in range(32):
        f = random_bandlimited_state(G, rng)
        for dt in (1 / 32, 1 / 16, 1 / 8, 1 / 4):
            ratios.append(apply_short_time_propagator(cos1, f, dt).norm())
    assert max(ratios) <= 2


def test_operator_norm_bounded():
    g = make_grid(12, 256)
    e = ActionExpansion(make_low_regularity_potential(1), 1, grid=g)
    for dt in (1 / 4, 1.0):
        assert operator_norm(build_step(e, dt, g)) <= 2


def test_resolution_warnings(cos1):
    f = gaussian_packet(G, center=7.0)
    out = apply_short_time_propagator(cos1, f, 1e-4)
    warnings = out.meta["warnings"]
    assert any("chirp" in w for w in warnings) and any("mass" in w for w in warnings)
    assert "warnings" not in apply_short_time_propagator(cos1, gaussian_packet(G), 0.25).meta
