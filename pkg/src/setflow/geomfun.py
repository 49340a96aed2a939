"""Geometric functionals of planar convex bodies.

Areas and mixed areas are exact: the Fourier parts are integrated by the
trapezoid rule on the body grid (exact for trigonometric polynomials of
degree below ``grid_M``), and polygon parts enter through the edge formula
``S[P, K] = 1/2 sum_i len_i h_K(n_i)``.

Radii are computed by three-variable linear programs refined with cutting
planes, so they are the radii of the true body and not of its sampled
polygonal outer approximation.  The Hausdorff distance and the shape metric
are sup-norms over the direction grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from .body2d import Body2D, _check_grids, _fourier_grid, grid, scale_translate, unit
from .errors import DegenerateBody, LPInfeasible

UNIT_BALL_AREA = np.pi


def _fourier_mixed(X: Body2D, Y: Body2D) -> float:
    # 1/2 int F_X (F_Y + F_Y'') dtheta, trapezoid rule on the grid
    return 0.5 * (2 * np.pi / X.grid_M) * float(np.dot(X.fourier_samples, Y.curvature_samples))


def _poly_against(P: Body2D, K_support) -> float:
    lengths, normals = P.edges
    return 0.5 * float(np.dot(lengths, K_support(normals)))


def mixed_area(X: Body2D, Y: Body2D) -> float:
    """Minkowski mixed area ``S[X, Y]``; ``S[X, X]`` is the area."""
    _check_grids(X, Y)
    s = _fourier_mixed(X, Y)
    if Y.has_polygon:
        s += _poly_against(Y, X.support)
    if X.has_polygon:
        s += _poly_against(X, Y.fourier_support)
    return s


def area(X: Body2D) -> float:
    return mixed_area(X, X)


@dataclass(frozen=True)
class DeficitReport:
    V1: float
    VX: float
    VY: float
    delta: float

    def to_json(self) -> dict:
        return {"V1": self.V1, "VX": self.VX, "VY": self.VY, "delta": self.delta}


def deficit(X: Body2D, Y: Body2D) -> DeficitReport:
    """Brunn-Minkowski deficit ``S[X,Y]^2 / (V[X] V[Y]) - 1``."""
    s = mixed_area(X, Y)
    vx, vy = area(X), area(Y)
    if vx <= 0 or vy <= 0:
        raise DegenerateBody("deficit needs bodies with positive area")
    return DeficitReport(s, vx, vy, s * s / (vx * vy) - 1.0)


def normalize(X: Body2D) -> Body2D:
    """Rescale to unit area (the shape representative ``X / sqrt(V[X])``)."""
    v = area(X)
    if v <= 0:
        raise DegenerateBody("cannot normalize a body with zero area")
    return scale_translate(X, 1.0 / np.sqrt(v))


@dataclass(frozen=True)
class ShapeRep:
    body: Body2D
    source_volume: float


def shape_rep(X: Body2D) -> ShapeRep:
    return ShapeRep(normalize(X), area(X))


def hausdorff(X: Body2D, Y: Body2D) -> float:
    """Sup-norm of the support difference over the direction grid."""
    _check_grids(X, Y)
    return float(np.max(np.abs(X.samples - Y.samples)))


def diameter(X: Body2D) -> float:
    """Largest width ``H(theta) + H(theta + pi)`` over the grid."""
    th = X.theta
    return float(np.max(X.samples + X.support(th + np.pi)))


# --------------------------------------------------------------------------
# linear programs


_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _lp(c, A_ub, b_ub):
    res = linprog(
        c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * 3, method="highs", options=_HIGHS
    )
    if res.status != 0:
        raise LPInfeasible(f"linear program failed: {res.message}")
    return res


def _minimax_translation(d: np.ndarray, u: np.ndarray, lexicographic: bool = True):
    """min over x of max_j |d_j - <x, u_j>|; variables (x1, x2, eps).

    Ties between optimal translations go to the lexicographically smallest.
    """
    ones = np.ones((len(d), 1))
    A = np.vstack([np.hstack([-u, -ones]), np.hstack([u, -ones])])
    b = np.concatenate([-d, d])
    res = _lp(np.array([0.0, 0.0, 1.0]), A, b)
    x = res.x[:2]
    eps = float(np.max(np.abs(d - u @ x)))
    if lexicographic:
        slack = 1e-12 * max(1.0, float(np.max(np.abs(d)))) + 1e-14
        A2 = np.vstack([A, [0.0, 0.0, 1.0]])
        b2 = np.append(b, eps + slack)
        x1 = float(_lp(np.array([1.0, 0.0, 0.0]), A2, b2).x[0])
        A3 = np.vstack([A2, [1.0, 0.0, 0.0]])
        b3 = np.append(b2, x1 + slack)
        x = _lp(np.array([0.0, 1.0, 0.0]), A3, b3).x[:2]
        eps = float(np.max(np.abs(d - u @ x)))
    return eps, np.asarray(x, dtype=float)


def _refine_extremum(f, theta0: float, h: float, sign: float) -> tuple[float, float]:
    """Local refinement of ``sign * f`` minimum near ``theta0``."""
    r = minimize_scalar(
        lambda t: sign * float(f(np.array([t]))[0]),
        bounds=(theta0 - h, theta0 + h),
        method="bounded",
        options={"xatol": 1e-13},
    )
    return float(r.x), sign * float(r.fun)


def _radius_lp(X: Body2D, inner: bool, max_iter: int = 60):
    scale = max(abs(X.mean_support), 1e-300)
    tol = 1e-12 * scale
    th = list(X.theta)
    if X.has_polygon:
        th.extend(X.edges[1])
    dense = grid(16 * X.grid_M)
    h = 2 * np.pi / len(dense)
    u_dense = unit(dense)
    H_dense = _fourier_grid(X.H0, X.coeffs, len(dense)) + X.polygon_support(dense)
    sign = 1.0 if inner else -1.0
    for _ in range(max_iter):
        t = np.asarray(th)
        u = unit(t)
        H = X.support(t)
        ones = np.ones((len(t), 1))
        if inner:
            # max r : <c,u> + r <= H
            res = _lp(np.array([0.0, 0.0, -1.0]), np.hstack([u, ones]), H)
        else:
            # min R : H - <c,u> <= R
            res = _lp(np.array([0.0, 0.0, 1.0]), np.hstack([-u, -ones]), -H)
        c, rad = res.x[:2], float(res.x[2])

        def gap(s, c=c):
            return X.support(s) - unit(s) @ c

        g = sign * (H_dense - u_dense @ c)
        # at the optimum several basins are nearly level, so refine every
        # discrete local extremum close to the dense optimum
        loc = np.flatnonzero((g <= np.roll(g, 1)) & (g <= np.roll(g, -1)))
        loc = loc[np.argsort(g[loc])][:16]
        cands = [dense[i] for i in loc if g[i] <= g[loc[0]] + 1e-6 * scale]
        if X.has_polygon:
            cands.extend(X.edges[1])
        best_t, best = None, None
        for t0 in cands:
            ts, val = _refine_extremum(gap, t0, h, sign)
            if best is None or sign * val < sign * best:
                best_t, best = ts, val
        # the ball centred at c with the exact radius best is always admissible
        if sign * (rad - best) <= tol or best_t in th:
            return best, c
        th.append(best_t)
    return best, c


def inradius_circumradius(X: Body2D):
    """``(r, R, incenter, circumcenter)`` of the inscribed and circumscribed balls."""
    r, cin = _radius_lp(X, inner=True)
    R, cout = _radius_lp(X, inner=False)
    if not r > 0:
        raise LPInfeasible(f"inradius {r:.3e} is not positive; body violates interior invariant")
    return r, R, cin, cout


def shape_metric(X: Body2D, Y: Body2D, lexicographic: bool = True):
    """Homothety-quotient distance ``rho`` and the witness translation.

    Both bodies are rescaled to unit area; ``rho`` is then the smallest
    grid sup-norm of ``H_X~ - H_(Y~ + x)`` over translations ``x``.
    """
    _check_grids(X, Y)
    vx, vy = area(X), area(Y)
    if vx <= 0 or vy <= 0:
        raise DegenerateBody("shape metric needs bodies with positive area")
    d = X.samples / np.sqrt(vx) - Y.samples / np.sqrt(vy)
    return _minimax_translation(d, unit(X.theta), lexicographic)
