"""Hold an isothermal atmosphere at rest with the balanced and the unbalanced scheme.

The balanced scheme keeps the discrete equilibrium to round-off; the
unbalanced one drifts by the truncation error of the reconstruction.
"""

import numpy as np

from wbeuler import CartesianGrid, Scheme, evolve, isothermal_pair

pair = isothermal_pair("x2", T_eq=1.0)
grid = CartesianGrid(0.0, 1.0, 40)

for mode in ("wb", "unb"):
    for order in (3, 5):
        s = Scheme(grid, pair, order=order, mode=mode)
        U0 = s.initial_state()
        res = evolve(s, U0, 2.0)
        inner = s.grid.interior
        v = (res.state[1] / res.state[0])[inner]
        print(f"{mode:>3} q={order}: {res.steps:4d} steps, max |v| = {np.max(np.abs(v)):.2e}")
