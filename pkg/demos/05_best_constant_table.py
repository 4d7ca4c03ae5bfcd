"""
A table of best constants
=========================

Away from the critical exponent the best constant has no closed form. This
tabulates grid estimates of S_q in 1D over a few (s, q), with the
Euler-Lagrange residual of each minimizer. Written to sq_table.csv.
"""
import csv

import numpy as np

from hslab import gradient_flow_minimize, make_exponents, make_grid, make_plan
from hslab.solver import default_init

grid = make_grid(1, 8192, 60.0)
plan = make_plan(grid)
rows = []
for s in (0.2, 0.3, 0.4):
    qc = 2 / (1 - 2 * s)
    for q in np.linspace(2.25, qc - 0.25, 4):
        cfg = make_exponents(1, s, q)
        rep = gradient_flow_minimize(default_init(grid), cfg, plan)
        rows.append((s, round(q, 4), cfg.beta, rep.s_q_estimate, rep.residual, rep.converged))
        print(f"s={s:.2f} q={q:6.3f} beta={cfg.beta:.4f}  S_q ~ {rep.s_q_estimate:.6f}  "
              f"residual {rep.residual:.1e}")

with open("sq_table.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["s", "q", "beta", "S_q", "residual", "converged"])
    w.writerows(rows)
