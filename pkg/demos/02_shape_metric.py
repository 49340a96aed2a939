"""The shape distance ``rho``.

``rho`` compares unit-area representatives after the best translation, so
it ignores scale and position.  A square against the disk gives
``sqrt(2)/2 - 1/sqrt(pi)``.
"""

# %%
import numpy as np

from setflow.body2d import LinearOp2, apply_op, disk, from_polygon, scale_translate
from setflow.geomfun import deficit, inradius_circumradius, shape_metric
from setflow.lab import random_body

# %%
sq = from_polygon([[0, 0], [1, 0], [1, 1], [0, 1]])
ball = disk(1.0)
rho, shift = shape_metric(sq, ball)
print(f"rho(square, disk) = {rho:.10f}  (closed form {np.sqrt(2) / 2 - 1 / np.sqrt(np.pi):.10f})")
print("optimal translation", np.round(shift, 6))

# %% [markdown]
# Invariance under homothety, and sensitivity to rotation.

# %%
big = scale_translate(sq, 3.7, (-2.0, 5.0))
print("rho(square, 3.7 square + b) =", f"{shape_metric(sq, big)[0]:.2e}")
for a in (np.pi / 16, np.pi / 8, np.pi / 4):
    print(f"rho(square, R({a:.3f}) square) = {shape_metric(sq, apply_op(LinearOp2.rotation(a), sq))[0]:.5f}")

# %% [markdown]
# Radii and the isoperimetric-type deficit for a random smooth body.

# %%
X = random_body(seed=7, roughness=0.1)
r, R, _, _ = inradius_circumradius(X)
d = deficit(X, ball)
print(f"r={r:.5f} R={R:.5f} V={d.VX:.5f} delta={d.delta:.3e} rho={shape_metric(X, ball)[0]:.5f}")
