"""Scalar double well on [-10, 10]: compare the flow limit with tanh(x / sqrt 2)."""

import numpy as np

from equiflow import FlowConfig, catalog_homomorphism, discretize, init_field, make_problem, orbit_product_potential, run_flow
from equiflow.analysis import decay_profile_and_fit

f = catalog_homomorphism("identity", group="Dn", n=1, dim=1)
W = orbit_product_potential(f.target, [1.0], scale="auto")
grid = discretize({"kind": "ball", "R": 10.0, "dim": 1}, 0.05)
P = make_problem(grid, f, W)
res = run_flow(P, init_field(P), FlowConfig(tol_rate=1e-8))

x = grid.coords[:, 0]
u = res.field.values[:, 0]
fit = decay_profile_and_fit(res.field, W.a, P.regions.D, curvature=W.curvature_at_minimum())
print(f"steps            {res.iterations}")
print(f"sup |u - tanh|   {np.abs(u - np.tanh(x / np.sqrt(2))).max():.2e}")
print(f"energy           {grid.energy(res.field.values, W, P.scale_c):.6f}  (exact {2 * np.sqrt(2) / 3:.6f})")
print(f"decay rate       {fit.k:.4f}  (linearization {np.sqrt(2):.4f})")
