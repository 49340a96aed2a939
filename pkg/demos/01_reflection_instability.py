"""Reflection in one and two dimensions.

``D_H X = -X`` on intervals: the midpoint decays but the length grows like
``e^t``.  In the plane, a reflection ``F`` keeps a nondegenerate body
growing too, so two nearby starts never come together in absolute terms.
Run with ``python demos/01_reflection_instability.py``.
"""

# %%
import numpy as np

from setflow.body2d import Interval1D, LinearOp2, disk, minkowski_sum, from_polygon
from setflow.geomfun import hausdorff, shape_metric
from setflow.sde import evolve, solve_reflection_1d

# %% [markdown]
# Interval solutions in closed form.

# %%
X0 = Interval1D(0.5, 1.0)
for t in (0.0, 1.0, 2.0, 4.0):
    X = solve_reflection_1d(X0, t)
    print(f"t={t:3.1f}  [{X.lo:+9.4f}, {X.hi:+9.4f}]  length={X.diameter:8.4f}  e^t*0.5={0.5 * np.exp(t):8.4f}")

# %% [markdown]
# A planar body under a reflection.  The Hausdorff gap between two
# solutions grows, while their shape distance stays bounded.

# %%
F = LinearOp2.reflection(np.pi / 4)  # maps the direction grid onto itself
sq = from_polygon([[0, 0], [1, 0], [1, 1], [0, 1]])
X0 = minkowski_sum(sq, disk(0.2))
Y0 = minkowski_sum(sq, disk(0.25))
times = np.linspace(0, 3, 7)
# the spectral solver handles rotations only, so step the grid with RK4
tx, ty = evolve(X0, F, times, "rk4"), evolve(Y0, F, times, "rk4")
for t, X, Y in zip(times, tx.bodies, ty.bodies):
    print(f"t={t:3.1f}  hausdorff={hausdorff(X, Y):9.4f}  rho={shape_metric(X, Y)[0]:.5f}")
