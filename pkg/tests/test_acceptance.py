"""The acceptance suite: one test per criterion at its stated tolerance.

Desk-scale configuration throughout: grid(12, 1024), hbar = 1, T = 1, a unit
Gaussian packet, cos(x) and the low-regularity Fourier series.  Each test
prints (and registers for the end-of-run summary) a single PASS/FAIL line.
"""

import math

import numpy as np
import pytest

import conftest
from pathslice import (ActionExpansion, CosinePotential, HarmonicPotential, LinearPotential, PhaseSpaceLattice,
                       ReferenceConfig, ZeroPotential, apply_short_time_propagator, apply_time_sliced,
                       convergence_study, dilation_constant, free_propagate, frozen_amplitude_norm,
                       gaussian_packet, l2_distance, make_grid, make_low_regularity_potential, make_subdivision,
                       modulation_norm, parametrix_norm_scan, random_bandlimited_state, residual_field,
                       single_step_study, stft, transport_residual, wigner_ambiguity_check)
from pathslice.cli import FROZEN_NORM_CAP, main
from pathslice.reference import self_refinement_ratios, strang_propagate

G = make_grid(12, 1024)
F0 = gaussian_packet(G)
ORDERS = (1, 2)
POTENTIALS = {"cosine": lambda N: CosinePotential(1.0, 1.0),
              "low_regularity": lambda N: make_low_regularity_potential(N, 64)}
DT_LADDER = [1 / 4, 1 / 8, 1 / 16, 1 / 32]


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    conftest.ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_criterion_01_composed_convergence():
    parts, ok = [], True
    for name, make in POTENTIALS.items():
        for N in ORDERS:
            rep = convergence_study(make(N), N, F0, 0.0, 1.0, [4, 8, 16, 32])
            e = rep.errors
            monotone = all(b <= 1.05 * a for a, b in zip(e[:-1], e[1:]))
            ok &= rep.fitted_order >= N - 0.3 and monotone
            parts.append(f"{name}/N={N} order {rep.fitted_order:.3f}")
    verdict(1, ok, "composed order >= N - 0.3; " + ", ".join(parts))


def test_criterion_02_single_step_order():
    parts, ok = [], True
    for name, make in POTENTIALS.items():
        for N in ORDERS:
            rep = single_step_study(make(N), N, F0, 0.0, DT_LADDER)
            ok &= rep.fitted_order >= N + 0.7
            parts.append(f"{name}/N={N} order {rep.fitted_order:.3f}")
    verdict(2, ok, "single-step order >= N + 0.7; " + ", ".join(parts))


def test_criterion_03_parametrix_scaling():
    parts, ok = [], True
    for name, make in POTENTIALS.items():
        for N in ORDERS:
            rep = parametrix_norm_scan(make(N), N, 0.0, DT_LADDER, grid=G)
            ok &= rep.fitted_order >= N - 0.3
            parts.append(f"{name}/N={N} slope {rep.fitted_order:.3f}")
    e = ActionExpansion(LinearPotential(1.0), 3, grid=G)
    g3 = max(residual_field(e, dt, G).sup_norm() for dt in DT_LADDER)
    ok &= g3 <= 1e-12
    verdict(3, ok, "sup-norm slope >= N - 0.3; " + ", ".join(parts) + f"; linear N=3 ||g_3|| = {g3:.1e}")


def test_criterion_04_closed_form_coefficients():
    rng = np.random.default_rng(0)
    x, y = rng.uniform(-4, 4, 64), rng.uniform(-4, 4, 64)
    lin = ActionExpansion(LinearPotential(1.0), 3)
    har = ActionExpansion(HarmonicPotential(1.0), 2)
    devs = [
        np.max(np.abs(lin.W(1, 0, x, y) + (x + y) / 2)),
        np.max(np.abs(lin.W(2, 0, x, y))),
        np.max(np.abs(lin.W(3, 0, x, y) + 1 / 24)),
        np.max(np.abs(har.W(1, 0, x, y) + (x * x + x * y + y * y) / 6)),
        np.max(np.abs(har.W(2, 0, x, y) + 1j / 12)),
    ]
    verdict(4, max(devs) <= 1e-10, f"max deviation from closed forms {max(devs):.1e} (tol 1e-10)")


def test_criterion_05_transport_identity():
    worst = 0.0
    for make in POTENTIALS.values():
        for N in ORDERS:
            e = ActionExpansion(make(N), N, grid=G)
            worst = max(worst, *(transport_residual(e, k, G) for k in range(1, N + 1)))
    verdict(5, worst <= 1e-6, f"max transport residual {worst:.1e} (tol 1e-6)")


def test_criterion_06_free_exactness():
    omegas = [make_subdivision(0.0, 1.0, L) for L in (1, 3, 8)]
    omegas += [make_subdivision(0.0, 1.0, 8, "random", seed=s) for s in (0, 1)]
    omegas += [make_subdivision(0.25, 2.0, 4, "random", seed=2)]
    f = gaussian_packet(G, center=0.5, momentum=1.0)
    worst = 0.0
    for N in (1, 2, 3):
        for om in omegas:
            approx = apply_time_sliced(ZeroPotential(), N, f, om)
            worst = max(worst, l2_distance(approx, free_propagate(f, om.t - om.s)))
    verdict(6, worst <= 1e-8, f"max L2 error against exact free flow {worst:.1e} (tol 1e-8)")


def test_criterion_07_reference_solver():
    drift = []
    strang_propagate(CosinePotential(1.0, 1.0), F0, 0.0, 1.0, 512,
                     callback=lambda j, u: drift.append(abs(math.sqrt(G.spacing * np.sum(np.abs(u) ** 2)) - 1)))
    unitarity = max(drift)
    f = gaussian_packet(G, center=1.5, momentum=0.5)
    revival = l2_distance(strang_propagate(HarmonicPotential(1.0), f, 0.0, 2 * np.pi,
                                           ReferenceConfig().count(0.0, 2 * np.pi)), -1 * f)
    ratio = min(self_refinement_ratios(CosinePotential(1.0, 1.0), F0, 0.0, 1.0))
    ok = unitarity <= 1e-12 and revival <= 1e-6 and ratio >= 3.5
    verdict(7, ok, f"unitarity drift {unitarity:.1e}, revival {revival:.1e}, refinement ratio {ratio:.3f}")


def test_criterion_08_identity_limit():
    parts, ok = [], True
    for name, make in POTENTIALS.items():
        for N in ORDERS:
            e = ActionExpansion(make(N), N, grid=G)
            errs = [l2_distance(apply_short_time_propagator(e, F0, eps), F0) for eps in (1e-2, 1e-3, 1e-4)]
            ok &= errs[1] <= 0.01 and errs[0] > errs[1] > errs[2]
            parts.append(f"{name}/N={N} {errs[1]:.1e}")
    verdict(8, ok, "||E f - f|| at eps = 1e-3 <= 0.01 and decreasing; " + ", ".join(parts))


def test_criterion_09_boundedness():
    rng = np.random.default_rng(2024)
    states = [random_bandlimited_state(G, rng) for _ in range(32)]
    lattice = PhaseSpaceLattice.default(G)
    ratio, frozen = 0.0, 0.0
    for make in POTENTIALS.values():
        for N in ORDERS:
            e = ActionExpansion(make(N), N, grid=G)
            for dt in DT_LADDER[::-1]:
                ratio = max(ratio, *(apply_short_time_propagator(e, f, dt).norm() / f.norm() for f in states))
            for dt in np.geomspace(1e-3, 1.0, 7):
                frozen = max(frozen, *(frozen_amplitude_norm(e, dt, y0, lattice) for y0 in (-2.0, 0.0, 2.0)))
    ok = ratio <= 2 and frozen <= FROZEN_NORM_CAP
    verdict(9, ok, f"max ||E f||/||f|| {ratio:.4f} (cap 2), max frozen (inf,1) norm {frozen:.3f} "
                   f"(cap {FROZEN_NORM_CAP})")


def test_criterion_10_time_frequency():
    lattice = PhaseSpaceLattice.default(G)
    rng = np.random.default_rng(10)
    moyal = max(abs(modulation_norm(stft(f, lattice), 2, 2) - 1.0)
                for f in [F0] + [random_bandlimited_state(G, rng) for _ in range(4)])
    wa = 0.0
    for f in (lattice.window, random_bandlimited_state(G, rng)):
        rep = wigner_ambiguity_check(f, lattice.window, lattice)
        wa = max(wa, rep["ambiguity_residual"], rep["wigner_residual"])
    data = stft(lattice.window, lattice)
    X, W = np.meshgrid(G.x, lattice.frequencies, indexing="ij")
    gauss = np.max(np.abs(np.abs(data.values) - np.exp(-np.pi * (X ** 2 + W ** 2) / 2)))
    consts = dilation_constant([[1.0]]) == math.sqrt(2) and dilation_constant([[2.0]]) == pytest.approx(
        math.sqrt(5), abs=1e-15)
    ok = moyal <= 1e-6 and wa <= 1e-6 and gauss <= 1e-8 and consts
    verdict(10, ok, f"Moyal {moyal:.1e}, Wigner/ambiguity {wa:.1e}, Gaussian STFT {gauss:.1e}, "
                    f"constants sqrt2/sqrt5 {'exact' if consts else 'wrong'}")


def test_criterion_11_determinism(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[potential]\nkind = cosine\na = 1\nb = 1\n"
                   "[experiment]\nn = 2\nscheme = random\nseed = 11\n")
    for name in ("a", "b"):
        main(["converge", "--config", str(cfg), "--out", str(tmp_path / name)])
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    same = all((tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes() for n in files)
    om = make_subdivision(0.0, 1.0, 16, "random", seed=5)
    model = make_low_regularity_potential(2)
    u1, u2 = (apply_time_sliced(model, 2, F0, om).values for _ in range(2))
    same &= u1.tobytes() == u2.tobytes()
    verdict(11, same and len(files) == 4, f"{len(files)} output files byte-identical across runs: {same}")
