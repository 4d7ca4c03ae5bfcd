"""
Majorization and its two characterizations
===========================================

f < g means every centered ball holds at least as much of g* as of f*. A
wide low bump is majorized by a narrow tall one of the same mass, though
neither lies below the other. The convex-function and the ball-indicator
tests give the same verdicts.
"""
import numpy as np

from hslab import (Field, check_convex_characterization, check_sd_characterization, majorizes,
                   make_grid)

grid = make_grid(1, 256, 8.0)
x = grid.axis
f = np.exp(-x ** 2 / 8)
g = np.exp(-x ** 2 / 0.5)
g *= f.sum() / g.sum()
f, g = Field(grid, f), Field(grid, g)

print("f <= g pointwise:", bool(np.all(f.values <= g.values)))
for a, b, name in ((f, g, "f < g"), (g, f, "g < f")):
    rep = majorizes(a, b)
    print(f"{name}: majorizes={rep.holds}  balls={check_sd_characterization(a, b).holds}  "
          f"convex={check_convex_characterization(a, b).holds}  worst gap={rep.worst_violation:.3e}")

# random pairs on a small 2D grid: the three verdicts never disagree
rng = np.random.default_rng(0)
g2 = make_grid(2, 8, 1.0)
agree = held = 0
for _ in range(200):
    a = rng.random(g2.shape) ** rng.uniform(0.5, 4)
    b = rng.random(g2.shape) ** rng.uniform(0.5, 4)
    b *= a.sum() / b.sum() * rng.uniform(0.98, 1.3)
    A, B = Field(g2, a), Field(g2, b)
    h = majorizes(A, B).holds
    held += h
    agree += h == check_sd_characterization(A, B).holds and (not h or check_convex_characterization(A, B).holds)
print(f"random pairs: {held} hold, verdicts consistent on {agree}/200")
