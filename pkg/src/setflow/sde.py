"""Integrators for the linear set differential equation ``D_H X = A X``.

The solution of ``D_H X = A X, X(0) = X0`` for an orthogonal ``A`` has support
function ``H(theta, t)`` solving ``dH/dt (theta) = H(A^T u(theta))``.  Three
independent routes are provided:

``solve_spectral``
    Rotations only.  The Fourier mode ``p`` is multiplied by
    ``exp(t exp(-i p alpha))``.
``solve_rk4``
    Classical RK4 on support samples; ``A^T`` must permute the grid.
``solve_picard``
    Successive approximations ``X_k(t) = X0 + int_0^t A X_{k-1}(s) ds`` with
    cumulative Simpson quadrature on a uniform time grid.

Polygon summands are carried exactly when ``A^m = I``: the solution is the
Minkowski combination ``sum_k w_k(t) A^k X0`` where ``w`` solves the cyclic
system ``dw_k/dt = w_{k-1}``, and each integrator applies its own scheme to
``w``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import gammainc

from .body2d import (
    Body2D,
    Interval1D,
    LinearOp2,
    _coeffs_from_samples,
    apply_op,
    minkowski_combination,
    unit,
)
from .errors import (
    ConvexityViolation,
    GridIncompatible,
    InvalidInput,
    InvariantViolation,
    NegativeTime,
    NotRotation,
    NotStableOperator,
)
from .geomfun import diameter

log = logging.getLogger(__name__)

RK4_STEP = 1.0 / 256


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    bodies: list
    integrator: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if len(t) != len(self.bodies):
            raise InvalidInput("times and bodies differ in length")
        if np.any(np.diff(t) <= 0):
            raise InvalidInput("trajectory times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def __getitem__(self, i):
        return self.times[i], self.bodies[i]

    @property
    def final(self) -> Body2D:
        return self.bodies[-1]


@dataclass(frozen=True)
class PicardConfig:
    horizon: float
    iterations: int = 20
    steps: int = 256
    sample_every: int = 32

    def __post_init__(self):
        if not self.horizon > 0:
            raise InvalidInput("Picard horizon must be positive")
        if self.iterations < 1 or self.steps < 2:
            raise InvalidInput("Picard needs iterations >= 1 and steps >= 2")


def check_trajectory(traj: Trajectory, check_diameter: bool = True) -> Trajectory:
    """Assert convexity at every output step and a nondecreasing diameter."""
    prev = -np.inf
    for t, X in zip(traj.times, traj.bodies):
        if not X.is_convex():
            raise ConvexityViolation(
                f"{traj.integrator}: curvature {X.curvature_samples.min():.3e} at t={t:g}"
            )
        if check_diameter:
            d = diameter(X)
            if d < prev - 1e-10 * max(1.0, abs(prev)):
                raise InvariantViolation(f"diameter decreased at t={t:g}: {prev} -> {d}")
            prev = d
    return traj


# --------------------------------------------------------------------------
# helpers


def _check_times(times) -> np.ndarray:
    t = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(t < 0):
        raise NegativeTime("times must be nonnegative")
    if np.any(np.diff(t) <= 0):
        raise InvalidInput("times must be strictly increasing")
    return t


def cyclic_weights(m: int, t: float) -> np.ndarray:
    """``w_k(t) = sum_{j = k mod m} t^j / j!``, the exact solution of ``dw_k/dt = w_{k-1}``."""
    q = np.arange(m)
    w = np.exp(2j * np.pi * q / m)
    k = np.arange(m)
    phase = np.exp(-2j * np.pi * np.outer(k, q) / m)
    return np.real(phase @ np.exp(t * w)) / m


def _shift(w: np.ndarray) -> np.ndarray:
    return np.roll(w, 1, axis=-1)


def _polygon_period(A: LinearOp2, X0: Body2D) -> int | None:
    if not X0.has_polygon:
        return None
    m = A.period()
    if m is None:
        raise InvalidInput("polygon summands need an operator with A^m = I")
    return m


def _polygon_body(A: LinearOp2, P0: Body2D, w: np.ndarray) -> Body2D:
    """Polygon summand ``sum_k w_k A^k P0`` (Fourier part of P0 ignored)."""
    P = Body2D(0.0, np.zeros(P0.N, dtype=complex), P0.grid_M, P0.vertices)
    terms = [apply_op(A.power(k), P) for k in range(len(w))]
    return minkowski_combination(np.maximum(w, 0.0), terms)


def _combine(fourier: Body2D, poly: Body2D | None) -> Body2D:
    if poly is None:
        return fourier
    return Body2D(fourier.H0, fourier.coeffs, fourier.grid_M, poly.vertices)


def grid_permutation(A: LinearOp2, M: int) -> np.ndarray:
    """Index map ``sigma`` with ``A^T u(theta_j) = u(theta_sigma(j))``."""
    if not A.is_orthogonal(1e-10):
        raise InvalidInput("grid integrators need an orthogonal operator")
    th = 2 * np.pi * np.arange(M) / M
    v = unit(th) @ A.entries  # rows are A^T u_j
    idx = np.mod(np.arctan2(v[:, 1], v[:, 0]), 2 * np.pi) * M / (2 * np.pi)
    k = np.rint(idx)
    if np.max(np.abs(idx - k)) > 1e-8:
        raise GridIncompatible(f"A^T does not permute a grid of {M} directions")
    return k.astype(int) % M


def compatible_grid(m: int, M: int = 128) -> int:
    """Smallest multiple of ``m`` that is at least ``M``."""
    return m * int(np.ceil(M / m))


# --------------------------------------------------------------------------
# spectral


def _as_rotation(A) -> LinearOp2:
    if isinstance(A, LinearOp2):
        if A.kind != "rotation":
            raise NotRotation(f"spectral solver needs a rotation, got {A.kind}")
        return A
    return LinearOp2.rotation(float(A))


def solve_spectral(X0: Body2D, A, t: float) -> Body2D:
    """Exact solution at time ``t`` for a rotation ``A`` (or rotation angle)."""
    A = _as_rotation(A)
    if t < 0:
        raise NegativeTime("t must be nonnegative")
    p = np.arange(1, X0.N + 1)
    coeffs = X0.coeffs * np.exp(t * np.exp(-1j * p * A.angle))
    F = Body2D(np.exp(t) * X0.H0, coeffs, X0.grid_M)
    m = _polygon_period(A, X0)
    poly = None if m is None else _polygon_body(A, X0, cyclic_weights(m, t))
    return _combine(F, poly)


def spectral_trajectory(X0: Body2D, A, times, check: bool = True) -> Trajectory:
    times = _check_times(times)
    traj = Trajectory(times, [solve_spectral(X0, A, t) for t in times], "spectral")
    return check_trajectory(traj) if check else traj


# --------------------------------------------------------------------------
# RK4


def _rk4_step(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def solve_rk4(
    X0: Body2D, A: LinearOp2, t_grid, h: float = RK4_STEP, check: bool = True
) -> Trajectory:
    """Fixed-step RK4 on support samples, reported at the times in ``t_grid``.

    Steps of size at most ``h`` are taken between consecutive output times so
    that each output time is hit exactly.
    """
    times = _check_times(t_grid)
    sigma = grid_permutation(A, X0.grid_M)
    m = _polygon_period(A, X0)

    def f(y):
        return y[sigma]

    y = X0.fourier_samples.copy()
    w = None if m is None else np.eye(m)[0]
    t_cur = 0.0
    bodies = []
    nsteps = 0
    for t_out in times:
        span = t_out - t_cur
        n = int(np.ceil(span / h - 1e-12)) if span > 0 else 0
        for _ in range(n):
            y = _rk4_step(f, y, span / n)
            if w is not None:
                w = _rk4_step(_shift, w, span / n)
        nsteps += n
        t_cur = t_out
        H0, c = _coeffs_from_samples(y, X0.N)
        F = Body2D(H0, c, X0.grid_M)
        bodies.append(_combine(F, None if w is None else _polygon_body(A, X0, w)))
    traj = Trajectory(times, bodies, "rk4", {"h": h, "steps": nsteps})
    return check_trajectory(traj) if check else traj


# --------------------------------------------------------------------------
# Picard


def picard_tail_bound(X0: Body2D, T: float, iterations: int) -> float:
    """``sup|H_X0| * sum_{l > k} T^l / l!``: distance of the k-th iterate to the solution."""
    hmax = float(np.max(np.abs(X0.samples)))
    return hmax * float(np.exp(T) * gammainc(iterations + 1, T))


def solve_picard(X0: Body2D, A: LinearOp2, cfg: PicardConfig, check: bool = True) -> Trajectory:
    """The ``cfg.iterations``-th successive approximation on ``[0, cfg.horizon]``."""
    sigma = grid_permutation(A, X0.grid_M)
    m = _polygon_period(A, X0)
    n = cfg.steps
    dt = cfg.horizon / n
    F0 = X0.fourier_samples
    Y = np.tile(F0, (n + 1, 1))
    W = None if m is None else np.tile(np.eye(m)[0], (n + 1, 1))
    for _ in range(cfg.iterations):
        Y = F0 + cumulative_simpson(Y[:, sigma], dx=dt, axis=0, initial=0.0)
        if W is not None:
            W = W[0] + cumulative_simpson(_shift(W), dx=dt, axis=0, initial=0.0)
    idx = list(range(0, n + 1, max(1, cfg.sample_every)))
    if idx[-1] != n:
        idx.append(n)
    bodies = []
    for i in idx:
        H0, c = _coeffs_from_samples(Y[i], X0.N)
        F = Body2D(H0, c, X0.grid_M)
        bodies.append(_combine(F, None if W is None else _polygon_body(A, X0, W[i])))
    meta = {
        "iterations": cfg.iterations,
        "steps": n,
        "tail_bound": picard_tail_bound(X0, cfg.horizon, cfg.iterations),
    }
    traj = Trajectory(np.arange(n + 1)[idx] * dt, bodies, "picard", meta)
    return check_trajectory(traj) if check else traj


# --------------------------------------------------------------------------
# dispatch


def evolve(X0: Body2D, A: LinearOp2, times, integrator: str = "spectral", **kw) -> Trajectory:
    """Trajectory of ``X0`` sampled at ``times`` with the chosen integrator."""
    times = _check_times(times)
    if integrator == "spectral":
        return spectral_trajectory(X0, A, times, **kw)
    if integrator == "rk4":
        return solve_rk4(X0, A, times, **kw)
    if integrator == "picard":
        steps = kw.pop("steps", 256)
        iterations = kw.pop("iterations", 20)
        T = float(times[-1])
        if T <= 0:
            return Trajectory(times, [X0], "picard")
        dt = T / steps
        k = np.rint(times / dt)
        if np.max(np.abs(k * dt - times)) > 1e-9 * max(T, 1.0):
            raise InvalidInput("Picard output times must lie on the quadrature grid")
        traj = solve_picard(X0, A, PicardConfig(T, iterations, steps, 1), **kw)
        keep = k.astype(int)
        return Trajectory(traj.times[keep], [traj.bodies[i] for i in keep], "picard", traj.meta)
    raise InvalidInput(f"unknown integrator {integrator!r}")


# --------------------------------------------------------------------------
# one-dimensional reflection


def solve_reflection_1d(X0: Interval1D, t: float) -> Interval1D:
    """Solution of ``D_H X = -X`` on intervals.

    ``[x1 cosh t - x2 sinh t, x2 cosh t - x1 sinh t]``; the diameter grows
    like ``e^t`` while the midpoint decays like ``e^{-t}``.
    """
    if t < 0:
        raise NegativeTime("t must be nonnegative")
    ch, sh = np.cosh(t), np.sinh(t)
    if X0.lo == X0.hi:
        x = X0.lo * np.exp(-t)
        return Interval1D(x, x)
    return Interval1D(X0.lo * ch - X0.hi * sh, X0.hi * ch - X0.lo * sh)


# --------------------------------------------------------------------------
# stable operators


def conjugate_to_orthogonal(A: LinearOp2, tol: float = 1e-10) -> tuple[LinearOp2, LinearOp2]:
    """Find ``T`` and an orthogonal ``A1 = T^-1 A T``.

    Raises NotStableOperator unless every eigenvalue has modulus one and is
    semisimple (equivalently ``sup_k ||A^k|| < inf`` over all integers ``k``).
    """
    if A.is_orthogonal():
        return LinearOp2.identity(), A
    a = A.entries
    lam, vec = np.linalg.eig(a)
    mods = np.abs(lam)
    if np.any(mods > 1 + tol):
        raise NotStableOperator(f"spectral radius {mods.max():.6g} > 1")
    if np.any(mods < 1 - tol):
        raise NotStableOperator(f"eigenvalue of modulus {mods.min():.6g} < 1; A^-k is unbounded")
    if abs(lam[0].imag) > tol:
        # A v = e^{i a} v with v = x + i y  =>  T = [x, y], T^-1 A T = R(-a)
        v = vec[:, 0]
        T = np.column_stack([v.real, v.imag])
    else:
        l1, l2 = lam.real
        if abs(l1 - l2) <= 1e-7:
            # repeated eigenvalue +-1 and not orthogonal: a nontrivial Jordan block
            raise NotStableOperator("unit-modulus eigenvalue is defective")
        T = np.real(vec)
    if abs(np.linalg.det(T)) < 1e-14:
        raise NotStableOperator("eigenvectors are degenerate")
    A1 = np.linalg.solve(T, a @ T)
    if np.max(np.abs(A1.T @ A1 - np.eye(2))) > tol:
        raise NotStableOperator("conjugate is not orthogonal to tolerance")
    return LinearOp2.from_matrix(T), LinearOp2.from_matrix(A1, tol)
