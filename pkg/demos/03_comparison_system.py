"""Cross mixed areas through the linear comparison system.

For ``A`` a rotation of order ``m`` the vector
``xi_k = (S[X, A^k X*] + S[X*, A^k X]) / 2`` obeys ``xi' = Omega xi``.
The matrix exponential, the closed form and direct geometry agree.
"""

# %%
import numpy as np

from setflow.body2d import LinearOp2, disk
from setflow.compsys import (
    asymptotic_S,
    build_omega,
    closed_form_S,
    cross_terms,
    evolve_xi,
    predicted_spectrum,
    spectrum,
    xi_from_bodies,
)
from setflow.geomfun import mixed_area
from setflow.lab import random_body
from setflow.sde import evolve

# %%
for m in (3, 4, 5, 6, 8):
    print(f"m={m}  spectrum {np.round(spectrum(build_omega(m)), 6)}  predicted {np.round(predicted_spectrum(m), 6)}")

# %%
m = 5
A = LinearOp2.rotation_order(m)
X0, Xs = random_body(3, roughness=0.1), disk(1.0)
s0, cross = cross_terms(X0, Xs, A, m)
sys = build_omega(m)
times = [0.0, 0.5, 1.0, 2.0]
traj, trajs = evolve(X0, A, times), evolve(Xs, A, times)
for t, X, Y in zip(times, traj.bodies, trajs.bodies):
    via_expm = evolve_xi(sys, xi_from_bodies(X0, Xs, A, m), t).s0
    print(
        f"t={t:3.1f}  closed form {closed_form_S(m, s0, cross, t):12.6f}"
        f"  expm {via_expm:12.6f}  geometry {mixed_area(X, Y):12.6f}"
    )
print("asymptotic e^{2t} coefficient:", f"{asymptotic_S(m, s0, cross):.6f}")
