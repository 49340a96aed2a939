"""Generic rotations round bodies off.

For a rotation by an angle that is not a rational turn, each Fourier mode
of the unit-area representative decays like ``exp(-t (1 - cos p alpha))``,
so the shape distance to the disk decreases.  Exploratory only.
"""

# %%
import numpy as np

from setflow.lab import GOLDEN_ANGLE, random_body, run_hypothesis_probe

X0 = random_body(seed=11, roughness=0.1)
times = np.linspace(0, 20, 11)
rep = run_hypothesis_probe(GOLDEN_ANGLE, X0, times)
print("rational warning:", rep.rational_warning, " monotone:", rep.monotone)
for t, rho in zip(rep.times, rep.rho_ball):
    print(f"t={t:5.1f}  rho(X, disk)={rho:.3e}")

# %% [markdown]
# A rational turn leaves the modes with ``cos(p alpha) = 1`` in place.

# %%
rep = run_hypothesis_probe(2 * np.pi / 3, X0, times)
print("rational warning:", rep.rational_warning, f" rho(T)={rep.rho_ball[-1]:.3e}  rho(0)={rep.rho_ball[0]:.3e}")
