"""
The short-time action expansion in closed form and on a grid.

For a linear potential V(x) = x the expansion stops after three terms,
W_1 = -(x+y)/2, W_2 = 0 and W_3 = -1/24, and the residual g_3 of the
parametrix vanishes identically.  For the harmonic potential x^2/2 the
first two coefficients are -(x^2+xy+y^2)/6 and -i hbar/12.  For cos(x) no
closed form is at hand, so the transport equation itself is the check.
"""

import numpy as np

from pathslice import (ActionExpansion, CosinePotential, HarmonicPotential, LinearPotential, make_grid,
                       residual_field, transport_residual)

grid = make_grid(12, 1024)
x = np.array([-2.0, -0.5, 0.0, 1.0, 3.0])
y = np.array([1.0, 2.0, -1.0, 0.5, -3.0])

lin = ActionExpansion(LinearPotential(1.0), 3)
print("linear potential")
print("  W_1 + (x+y)/2 :", np.abs(lin.W(1, 0, x, y) + (x + y) / 2).max())
print("  W_2           :", np.abs(lin.W(2, 0, x, y)).max())
print("  W_3 + 1/24    :", np.abs(lin.W(3, 0, x, y) + 1 / 24).max())
lin_grid = ActionExpansion(LinearPotential(1.0), 3, grid=grid)
print("  sup |g_3| at t - s = 1/4:", residual_field(lin_grid, 0.25, grid).sup_norm())

har = ActionExpansion(HarmonicPotential(1.0), 2)
print("\nharmonic potential")
print("  W_1 + (x^2+xy+y^2)/6 :", np.abs(har.W(1, 0, x, y) + (x * x + x * y + y * y) / 6).max())
print("  W_2                  :", har.W(2, 0, 0.3, -1.1))

cos = ActionExpansion(CosinePotential(1.0, 1.0), 3, grid=grid)
print("\ncos(x): transport residuals on the inner half of the grid")
for k in (1, 2, 3):
    print(f"  k = {k}: {transport_residual(cos, k, grid):.1e}")

# from k = 2 on the hbar term gives the coefficients an imaginary part
table = cos.table(grid, 2)
print("\nmax |Im W_2| on the grid:", np.abs(table.imag).max())
