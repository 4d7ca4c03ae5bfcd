"""
The rearrangement argument, step by step
=========================================

For a field u put f = |(-Delta)^(s/2) u|, U = I_s f and V = I_s f*. The
argument needs U >= |u| (positivity of the kernel), U < V (Riesz
rearrangement) and ||f*|| = ||f|| (equimeasurability). All three are checked
on the grid here, for a random field and for a computed minimizer.
"""
import warnings

import numpy as np

from hslab import (Field, DecayWarning, gradient_flow_minimize, make_exponents, make_grid,
                   make_plan, proof_chain_check)
from hslab.solver import default_init

cfg = make_exponents(1, 0.3, 3.0)
grid = make_grid(1, 2048, 20.0)
plan = make_plan(grid)

rng = np.random.default_rng(1)
x = grid.axis
u = Field(grid, sum(rng.uniform(-1, 1) * np.exp(-(x - rng.uniform(-4, 4)) ** 2 / rng.uniform(0.5, 3))
                    for _ in range(3)))
rep = proof_chain_check(u, cfg, plan)
print("random signed field:")
print(f"  min(U - |u|)            = {rep.step1_min_gap:.3e}")
print(f"  U < V                   = {rep.step2_majorization.holds}")
print(f"  | ||f*|| - ||f|| |/||f|| = {rep.step2_norm_gap:.1e}")
print(f"  max|V - U| / max U      = {np.max(np.abs(rep.V.values - rep.U.values)) / rep.U.values.max():.3f}")

# A minimizer has U = V up to how far it is from its own rearrangement.
big = make_grid(1, 4096, 40.0)
bplan = make_plan(big)
m = gradient_flow_minimize(default_init(big), cfg, bplan).minimizer
with warnings.catch_warnings():
    warnings.simplefilter("ignore", DecayWarning)  # minimizers decay only like |x|^(2s-n)
    rep = proof_chain_check(m, cfg, bplan)
print("minimizer:")
print(f"  all checks pass         = {rep.all_ok}")
print(f"  max|V - U| / max U      = {np.max(np.abs(rep.V.values - rep.U.values)) / rep.U.values.max():.2e}")
