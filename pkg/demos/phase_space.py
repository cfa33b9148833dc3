"""
Phase-space checks with the short-time Fourier transform.

The Gaussian window is its own best friend: its STFT magnitude is the
Gaussian e^{-pi(x^2+w^2)/2}.  Any state keeps its L2 norm on the lattice
(Moyal), the modulation norm of a dilated state is controlled by the
explicit constant of the dilation lemma, and the amplitude e^{iR/hbar}
of the parametrix stays in M^{inf,1} with a norm that hardly moves as
t - s runs over (0, 1].
"""

import numpy as np

from pathslice import (ActionExpansion, PhaseSpaceLattice, dilate, dilation_constant, frozen_amplitude_norm,
                       gaussian_packet, make_grid, make_low_regularity_potential, modulation_norm,
                       random_bandlimited_state, stft, wigner_ambiguity_check)

grid = make_grid(12, 1024)
lattice = PhaseSpaceLattice.default(grid)
g = lattice.window

data = stft(g, lattice)
X, W = np.meshgrid(grid.x, lattice.frequencies, indexing="ij")
print("Gaussian STFT magnitude error:", np.abs(np.abs(data.values) - np.exp(-np.pi * (X**2 + W**2) / 2)).max())

rng = np.random.default_rng(0)
f = random_bandlimited_state(grid, rng)
print("Moyal: ||V_g f|| =", modulation_norm(stft(f, lattice), 2, 2), " ||f|| =", f.norm())
print("Wigner/ambiguity residuals:", wigner_ambiguity_check(f, g, lattice))

packet = gaussian_packet(grid, width=0.8, momentum=1.0)
base = modulation_norm(stft(packet, lattice), np.inf, 1)
print("\ndilations of a packet, ratio to the lemma bound")
for lam in (0.5, 1.0, 2.0, 4.0):
    d = dilate(packet, lam, normalized=False)
    ratio = modulation_norm(stft(d, lattice), np.inf, 1) / (dilation_constant([[lam]]) * base)
    print(f"  lambda = {lam:4.1f}: {ratio:.3f}")

exp = ActionExpansion(make_low_regularity_potential(2), 2)
print("\nfrozen amplitude norms, y0 = 0")
for dt in (1e-3, 1 / 32, 1 / 4, 1.0):
    print(f"  t - s = {dt:7.4f}: {frozen_amplitude_norm(exp, dt, 0.0, lattice):.4f}")
