import numpy as np
import pytest

from pathslice import (ActionExpansion, CosinePotential, DegenerateFitError, HarmonicPotential, LinearPotential,
                       TimeModulatedPotential, ZeroPotential, eval_g_N, eval_S_N, gaussian_packet, make_grid,
                       make_low_regularity_potential, parametrix_norm_scan, residual_field, single_step_study)

G = make_grid()
DTS = [1 / 4, 1 / 8, 1 / 16, 1 / 32]


def test_zero_potential():
    e = ActionExpansion(ZeroPotential(), 2, grid=G)
    assert residual_field(e, 0.5, G).sup_norm() == 0


def test_linear_n3_exact():
    e = ActionExpansion(LinearPotential(1.0), 3, grid=G)
    for t in (0.1, 0.5, 1.0):
        assert residual_field(e, t, G).sup_norm() <= 1e-12
    with pytest.raises(DegenerateFitError):
        parametrix_norm_scan(LinearPotential(1.0), 3, 0.0, DTS, grid=G, expansion=e)


def test_harmonic_closed_form():
    e = ActionExpansion(HarmonicPotential(1.0), 1)
    x = np.array([0.0, 1.0, -2.5, 3.0])
    y = np.array([0.0, 2.0, 1.5, -3.0])
    for dt in (0.1, 0.7):
        expected = -0.5 * ((2 * x + y) / 6) ** 2 * dt ** 2 - 1j / 6 * dt
        assert np.max(np.abs(eval_g_N(e, dt, x, y) - expected)) <= 1e-12


def test_field_matches_pointwise():
    e = ActionExpansion(CosinePotential(1.0, 1.0), 2, grid=G)
    field = residual_field(e, 0.3, G).values
    i, j = np.array([10, 300, 900]), np.array([512, 40, 700])
    assert np.max(np.abs(eval_g_N(e, 0.3, G.x[i], G.x[j]) - field[i, j])) <= 1e-12


def _hj_defect(e, t, x, y, step=1e-3):
    """-(d_t S + (d_x S)^2 / 2 + V - (i hbar / 2)(d_x^2 S - 1/(t - s))) by finite differences of S_N."""
    c = np.array([1 / 12, -2 / 3, 0, 2 / 3, -1 / 12]) / step
    offs = np.arange(-2, 3) * step
    St = sum(ci * eval_S_N(e, t + o, x, y) for ci, o in zip(c, offs))
    Sx = sum(ci * eval_S_N(e, t, x + o, y) for ci, o in zip(c, offs))
    c2 = np.array([-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12]) / step ** 2
    Sxx = sum(ci * eval_S_N(e, t, x + o, y) for ci, o in zip(c2, offs))
    V = e.model(t, x)
    return -(St + 0.5 * Sx ** 2 + V - 0.5j * e.hbar * (Sxx - 1 / (t - e.s)))


@pytest.mark.parametrize("model, N, s", [
    (CosinePotential(1.0, 1.0), 1, 0.0),
    (CosinePotential(1.0, 1.0), 2, 0.0),
    (TimeModulatedPotential(CosinePotential(1.0, 1.0)), 2, 0.2),
    (TimeModulatedPotential(CosinePotential(0.5, 2.0), envelope=(1.0, 0.3, -0.2, 0.4)), 3, 0.1),
], ids=["cos1", "cos2", "tm2", "tm3"])
def test_defect_of_modified_hamilton_jacobi(model, N, s):
    e = ActionExpansion(model, N, s=s, hbar=0.7)
    x = np.array([-1.3, 0.4, 2.2])
    y = np.array([0.8, -0.9, 1.7])
    t = s + 0.6
    assert np.max(np.abs(eval_g_N(e, t, x, y) - _hj_defect(e, t, x, y))) <= 1e-6


@pytest.mark.parametrize("N, lo, hi", [(1, 0.8, 1.4), (2, 1.7, 2.6)])
def test_scan_slopes_cosine(N, lo, hi):
    rep = parametrix_norm_scan(CosinePotential(1.0, 1.0), N, 0.0, DTS, grid=G)
    assert lo <= rep.fitted_order <= hi and rep.passed


@pytest.mark.parametrize("N", [1, 2])
def test_scan_slopes_low_regularity(N):
    rep = parametrix_norm_scan(make_low_regularity_potential(N), N, 0.0, DTS, grid=G)
    assert rep.fitted_order >= N - 0.3


def test_scan_modulation_norm():
    rep = parametrix_norm_scan(CosinePotential(1.0, 1.0), 1, 0.0, DTS[:3], norm="modulation")
    assert rep.fitted_order >= 0.7


def test_hbar_linear_part():
    model = CosinePotential(1.0, 1.0)
    e1, e2 = ActionExpansion(model, 1, hbar=1.0), ActionExpansion(model, 1, hbar=0.5)
    x = np.array([-2.0, 0.3, 1.9])
    y = np.array([1.0, 0.0, -0.6])
    dt = 0.4
    diff = eval_g_N(e1, dt, x, y) - eval_g_N(e2, dt, x, y)
    expected = 0.5j * (1.0 - 0.5) * e1.W(1, 2, x, y) * dt
    assert np.max(np.abs(diff - expected)) <= 1e-10


@pytest.mark.parametrize("N", [1, 2])
def test_duhamel_order_relation(N, packet):
    model = CosinePotential(1.0, 1.0)
    step = single_step_study(model, N, packet, 0.0, DTS).fitted_order
    amp = parametrix_norm_scan(model, N, 0.0, DTS, grid=G).fitted_order
    assert 0.7 <= step - amp <= 1.3
