"""
Convergence of the time-sliced parametrix.

A unit Gaussian packet evolves for one unit of time under V(x) = cos(x).
The interval is cut into L equal slices and the order-N short-time
propagator is applied on each slice.  The error against a resolved
split-step reference should fall like (1/L)^N, while a single step of
width dt should be off by about dt^(N+1).

Run with ``python3 demos/convergence.py``; it takes about half a minute.
"""

import numpy as np

from pathslice import (CosinePotential, convergence_study, gaussian_packet, make_grid,
                       make_low_regularity_potential, single_step_study)

grid = make_grid(12, 1024)
packet = gaussian_packet(grid, center=0.0, momentum=0.5)

# the smooth model and a Fourier series with just enough decay for order N
models = {
    "cos(x)": lambda N: CosinePotential(1.0, 1.0),
    "low-regularity": lambda N: make_low_regularity_potential(N, 64),
}

print("composed operator on [0, 1], uniform slices")
for name, make in models.items():
    for N in (1, 2):
        rep = convergence_study(make(N), N, packet, 0.0, 1.0, [4, 8, 16, 32])
        errs = "  ".join(f"{e:.2e}" for e in rep.errors)
        print(f"  {name:15s} N={N}  errors {errs}  order {rep.fitted_order:.3f}")

print("\none step of width dt")
for name, make in models.items():
    for N in (1, 2):
        rep = single_step_study(make(N), N, packet, 0.0, [1 / 4, 1 / 8, 1 / 16, 1 / 32])
        print(f"  {name:15s} N={N}  order {rep.fitted_order:.3f} (expected {N + 1})")

# halving the mesh buys a factor of 2^N
rep = convergence_study(CosinePotential(1.0, 1.0), 2, packet, 0.0, 1.0, [4, 8, 16, 32])
print("\nsuccessive error ratios for N = 2:", np.round(np.divide(rep.errors[:-1], rep.errors[1:]), 3))
