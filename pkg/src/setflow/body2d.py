"""Planar convex bodies represented by support functions.

A :class:`Body2D` is the Minkowski sum of two summands:

* a *Fourier part* whose support function is the real trigonometric
  polynomial ``H0 + sum_{p=1..N} 2 Re(H_p exp(i p theta))``;
* an optional *polygon part* given by its vertices (counter-clockwise).

Smooth bodies live entirely in the Fourier part.  Polygons are kept exact,
because a truncated Fourier series of a polygon's support function is not
convex (the curvature measure is a sum of Dirac masses) and its area is off
by O(1/N).  Every operation below acts on both summands separately, which is
legitimate because support functions add under Minkowski sums.

Directions are parametrised by ``u(theta) = (cos theta, sin theta)`` and the
sampling grid is ``theta_j = 2 pi j / grid_M``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateInput,
    GridMismatch,
    InvalidInput,
    NonConvexInput,
    NonPositiveScale,
    SingularOperator,
)

DEFAULT_N = 32
DEFAULT_M = 128
CONVEX_RTOL = 1e-9
_ORTHO_TOL = 1e-12


def grid(M: int) -> np.ndarray:
    """Uniform grid of ``M`` directions on the circle."""
    return 2.0 * np.pi * np.arange(M) / M


def unit(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


# --------------------------------------------------------------------------
# linear operators


@dataclass(frozen=True, eq=False)
class LinearOp2:
    """A 2x2 real operator acting on bodies by ``h_{AX}(p) = h_X(A^T p)``.

    ``kind`` is ``"rotation"`` (``angle`` is the rotation angle),
    ``"reflection"`` (``angle`` is the angle of the mirror axis) or
    ``"general"`` (``angle`` is None).
    """

    entries: np.ndarray
    kind: str = "general"
    angle: float | None = None

    def __post_init__(self):
        a = np.array(self.entries, dtype=float).reshape(2, 2)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        if self.kind not in ("rotation", "reflection", "general"):
            raise InvalidInput(f"unknown operator kind {self.kind!r}")

    @classmethod
    def rotation(cls, alpha: float) -> "LinearOp2":
        c, s = np.cos(alpha), np.sin(alpha)
        return cls(np.array([[c, -s], [s, c]]), "rotation", float(alpha))

    @classmethod
    def rotation_order(cls, m: int) -> "LinearOp2":
        """Rotation by ``2 pi / m`` in the positive direction."""
        return cls.rotation(2.0 * np.pi / m)

    @classmethod
    def reflection(cls, phi: float) -> "LinearOp2":
        """Reflection across the line through the origin at angle ``phi``."""
        c, s = np.cos(2 * phi), np.sin(2 * phi)
        return cls(np.array([[c, s], [s, -c]]), "reflection", float(phi))

    @classmethod
    def identity(cls) -> "LinearOp2":
        return cls.rotation(0.0)

    @classmethod
    def from_matrix(cls, a, tol: float = _ORTHO_TOL) -> "LinearOp2":
        """Wrap a matrix, recognising rotations and reflections."""
        a = np.array(a, dtype=float).reshape(2, 2)
        if np.max(np.abs(a.T @ a - np.eye(2))) <= tol:
            ang = float(np.arctan2(a[1, 0], a[0, 0]))
            if np.linalg.det(a) > 0:
                return cls(a, "rotation", ang)
            return cls(a, "reflection", ang / 2.0)
        return cls(a, "general", None)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))

    def is_orthogonal(self, tol: float = _ORTHO_TOL) -> bool:
        a = self.entries
        return bool(np.max(np.abs(a.T @ a - np.eye(2))) <= tol)

    def __matmul__(self, other: "LinearOp2") -> "LinearOp2":
        if self.kind == "rotation" and other.kind == "rotation":
            return LinearOp2.rotation(self.angle + other.angle)
        return LinearOp2.from_matrix(self.entries @ other.entries)

    def power(self, k: int) -> "LinearOp2":
        if self.kind == "rotation":
            return LinearOp2.rotation(k * self.angle)
        if k < 0:
            return LinearOp2.from_matrix(np.linalg.matrix_power(np.linalg.inv(self.entries), -k))
        return LinearOp2.from_matrix(np.linalg.matrix_power(self.entries, k))

    def inverse(self) -> "LinearOp2":
        if self.kind == "rotation":
            return LinearOp2.rotation(-self.angle)
        if self.kind == "reflection":
            return self
        if abs(self.det) <= 1e-14:
            raise SingularOperator("operator is singular")
        return LinearOp2.from_matrix(np.linalg.inv(self.entries))

    def period(self, max_order: int = 720, tol: float = 1e-10) -> int | None:
        """Smallest ``m >= 1`` with ``A^m = I`` (within ``tol``), else None."""
        if self.kind == "rotation":
            x = self.angle / (2 * np.pi)
            for m in range(1, max_order + 1):
                if abs(m * x - round(m * x)) * 2 * np.pi <= tol:
                    return m
            return None
        if self.kind == "reflection":
            return 2
        p = np.eye(2)
        for m in range(1, max_order + 1):
            p = p @ self.entries
            if np.max(np.abs(p - np.eye(2))) <= tol:
                return m
        return None

    def to_json(self) -> dict:
        if self.kind == "general":
            return {"kind": "general", "matrix": self.entries.tolist()}
        return {"kind": self.kind, "angle": self.angle}

    @classmethod
    def from_json(cls, d: dict) -> "LinearOp2":
        kind = d.get("kind", "rotation")
        if kind == "rotation":
            if "m" in d:
                return cls.rotation_order(int(d["m"]))
            return cls.rotation(float(d["angle"]))
        if kind == "reflection":
            return cls.reflection(float(d["angle"]))
        if kind == "general":
            return cls.from_matrix(d["matrix"])
        raise InvalidInput(f"unknown operator kind {kind!r}")


# --------------------------------------------------------------------------
# polygons


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Strictly convex hull (counter-clockwise, collinear points dropped)."""
    arr = np.asarray(points, dtype=float)
    pts = sorted(set(map(tuple, arr.tolist())))
    if len(pts) <= 2:
        return np.array(pts, dtype=float).reshape(-1, 2)
    # turns smaller than this count as collinear (floating-point sums of polygons)
    eps = 1e-12 * float(np.ptp(arr, axis=0).max()) ** 2
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= eps:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= eps:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=float)


def polygon_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_edges(vertices: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Edge lengths and outward normal angles of a CCW polygon."""
    e = np.roll(vertices, -1, axis=0) - vertices
    lengths = np.hypot(e[:, 0], e[:, 1])
    normals = np.arctan2(-e[:, 0], e[:, 1])
    return lengths, normals


def _polygon_minkowski(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    sums = (v1[:, None, :] + v2[None, :, :]).reshape(-1, 2)
    return convex_hull(sums)


# --------------------------------------------------------------------------
# bodies


def _fourier_eval(H0: float, coeffs: np.ndarray, theta, deriv: int = 0) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    p = np.arange(1, len(coeffs) + 1)
    c = coeffs * (1j * p) ** deriv
    ph = np.exp(1j * np.multiply.outer(theta, p))
    val = 2.0 * np.real(ph @ c)
    if deriv == 0:
        val = val + H0
    return val


def _fourier_grid(H0: float, coeffs: np.ndarray, M: int) -> np.ndarray:
    spec = np.zeros(M // 2 + 1, dtype=complex)
    spec[0] = H0
    spec[1 : len(coeffs) + 1] = coeffs
    return M * np.fft.irfft(spec, n=M)


def _coeffs_from_samples(samples: np.ndarray, N: int) -> tuple[float, np.ndarray]:
    M = len(samples)
    spec = np.fft.rfft(samples) / M
    return float(spec[0].real), spec[1 : N + 1].copy()


@dataclass(frozen=True, eq=False)
class Body2D:
    """Convex compact in the plane (see module docstring)."""

    H0: float
    coeffs: np.ndarray
    grid_M: int = DEFAULT_M
    vertices: np.ndarray | None = field(default=None)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex).reshape(-1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "H0", float(self.H0))
        object.__setattr__(self, "grid_M", int(self.grid_M))
        if self.vertices is not None:
            v = np.array(self.vertices, dtype=float).reshape(-1, 2)
            v.setflags(write=False)
            object.__setattr__(self, "vertices", v)
        if self.grid_M < 2 * self.N + 2:
            raise InvalidInput(f"grid_M={self.grid_M} < 2N+2 with N={self.N}")

    @property
    def N(self) -> int:
        return len(self.coeffs)

    @property
    def has_polygon(self) -> bool:
        return self.vertices is not None

    @cached_property
    def theta(self) -> np.ndarray:
        return grid(self.grid_M)

    @cached_property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        if self.vertices is None:
            return np.zeros(0), np.zeros(0)
        return polygon_edges(self.vertices)

    def fourier_support(self, theta, deriv: int = 0) -> np.ndarray:
        return _fourier_eval(self.H0, self.coeffs, theta, deriv)

    def polygon_support(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.vertices is None:
            return np.zeros_like(theta)
        return np.max(unit(theta) @ self.vertices.T, axis=-1)

    def support(self, theta) -> np.ndarray:
        """``H(theta)`` at arbitrary directions."""
        return self.fourier_support(theta) + self.polygon_support(theta)

    @cached_property
    def fourier_samples(self) -> np.ndarray:
        return _fourier_grid(self.H0, self.coeffs, self.grid_M)

    @cached_property
    def samples(self) -> np.ndarray:
        """Support values on the body's direction grid."""
        s = self.fourier_samples
        if self.vertices is not None:
            s = s + self.polygon_support(self.theta)
        s.setflags(write=False)
        return s

    @cached_property
    def curvature_samples(self) -> np.ndarray:
        """Curvature radius ``F + F''`` of the Fourier part on the grid."""
        p = np.arange(1, self.N + 1)
        return _fourier_grid(self.H0, self.coeffs * (1 - p**2), self.grid_M)

    @property
    def perimeter(self) -> float:
        per = 2 * np.pi * self.H0
        if self.vertices is not None:
            per += float(np.sum(self.edges[0]))
        return per

    @property
    def mean_support(self) -> float:
        return self.perimeter / (2 * np.pi)

    @property
    def tol_convex(self) -> float:
        return CONVEX_RTOL * abs(self.mean_support)

    def is_convex(self) -> bool:
        return bool(self.curvature_samples.min() >= -self.tol_convex)

    def translation_part(self) -> np.ndarray:
        """Translation carried by the first Fourier mode."""
        if self.N == 0:
            return np.zeros(2)
        h1 = self.coeffs[0]
        return np.array([2 * h1.real, -2 * h1.imag])

    def __repr__(self):
        poly = "" if self.vertices is None else f", polygon={len(self.vertices)} vertices"
        return f"Body2D(H0={self.H0:.6g}, N={self.N}, grid_M={self.grid_M}{poly})"


def _arc_integral(k: int, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``int_a^b exp(i k theta) dtheta`` elementwise."""
    if k == 0:
        return (b - a).astype(complex)
    return (np.exp(1j * k * b) - np.exp(1j * k * a)) / (1j * k)


def fourier_coefficients(X: Body2D, pmax: int) -> np.ndarray:
    """Exact coefficients ``c_p = (1/2pi) int H(theta) e^{-i p theta}``, ``p = 0..pmax``.

    The polygon part is integrated vertex by vertex over its normal cone,
    where the support function equals ``<v, u(theta)>``.
    """
    out = np.zeros(pmax + 1, dtype=complex)
    out[0] = X.H0
    n = min(pmax, X.N)
    out[1 : n + 1] = X.coeffs[:n]
    if X.vertices is None:
        return out
    v = X.vertices
    _, normals = X.edges
    lo = np.roll(normals, 1)  # normal of the edge ending at vertex i
    hi = lo + np.mod(normals - lo, 2 * np.pi)
    z = v[:, 0] - 1j * v[:, 1]
    for p in range(pmax + 1):
        # <v, u> = (z e^{i theta} + conj(z) e^{-i theta}) / 2
        terms = z * _arc_integral(1 - p, lo, hi) + np.conj(z) * _arc_integral(-1 - p, lo, hi)
        out[p] += np.sum(terms) / (4 * np.pi)
    return out


def _fourier_area(H0: float, coeffs: np.ndarray) -> float:
    p = np.arange(1, len(coeffs) + 1)
    return float(np.pi * (H0**2 + 2 * np.sum((1 - p**2) * np.abs(coeffs) ** 2)))


def validate(X: Body2D) -> Body2D:
    """Check the convexity and nonempty-interior invariants; return ``X``."""
    if not X.is_convex():
        raise NonConvexInput(
            f"curvature radius {X.curvature_samples.min():.3e} below -{X.tol_convex:.1e}"
        )
    if X.vertices is None and _fourier_area(X.H0, X.coeffs) <= 0:
        raise DegenerateInput("body has empty interior")
    return X


def from_fourier(H0: float, coeffs, grid_M: int = DEFAULT_M, vertices=None) -> Body2D:
    return validate(Body2D(H0, coeffs, grid_M, vertices))


def zero(N: int = DEFAULT_N, grid_M: int = DEFAULT_M) -> Body2D:
    """The point ``{0}``; the identity for Minkowski addition (not a valid body)."""
    return Body2D(0.0, np.zeros(N, dtype=complex), grid_M)


def point(b, N: int = DEFAULT_N, grid_M: int = DEFAULT_M) -> Body2D:
    c = np.zeros(N, dtype=complex)
    c[0] = (b[0] - 1j * b[1]) / 2
    return Body2D(0.0, c, grid_M)


def disk(
    radius: float = 1.0, center=(0.0, 0.0), N: int = DEFAULT_N, grid_M: int = DEFAULT_M
) -> Body2D:
    if radius <= 0:
        raise NonPositiveScale("radius must be positive")
    c = np.zeros(N, dtype=complex)
    if N:
        c[0] = (center[0] - 1j * center[1]) / 2
    return Body2D(float(radius), c, grid_M)


def from_polygon(vertices, N: int = DEFAULT_N, grid_M: int = DEFAULT_M) -> Body2D:
    """Body with exact polygonal support ``max_v <v, u(theta)>``.

    Raises NonConvexInput if the vertices are not in strictly convex position
    (collinear triples included) and DegenerateInput for fewer than three
    vertices or zero area.  Use :func:`fourier_projection` to obtain the
    degree-``N`` truncation and its residual.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3 or not np.all(np.isfinite(v)):
        raise DegenerateInput("need at least three finite planar vertices")
    hull = convex_hull(v)
    if len(hull) != len(v):
        raise NonConvexInput(f"{len(v) - len(hull)} vertices not in strictly convex position")
    if polygon_area(hull) <= 0:
        raise DegenerateInput("polygon has zero area")
    return Body2D(0.0, np.zeros(N, dtype=complex), grid_M, hull)


def _check_grids(X: Body2D, Y: Body2D):
    if X.grid_M != Y.grid_M or X.N != Y.N:
        raise GridMismatch(f"(N, M) = ({X.N}, {X.grid_M}) vs ({Y.N}, {Y.grid_M})")


def minkowski_sum(X: Body2D, Y: Body2D) -> Body2D:
    _check_grids(X, Y)
    if X.vertices is None:
        v = Y.vertices
    elif Y.vertices is None:
        v = X.vertices
    else:
        v = _polygon_minkowski(X.vertices, Y.vertices)
    return Body2D(X.H0 + Y.H0, X.coeffs + Y.coeffs, X.grid_M, v)


def minkowski_combination(weights, bodies) -> Body2D:
    """``sum_k w_k X_k`` for nonnegative weights."""
    out = None
    for w, X in zip(weights, bodies):
        if w < 0:
            raise NonPositiveScale("Minkowski combination needs nonnegative weights")
        term = _scale(X, float(w))
        out = term if out is None else minkowski_sum(out, term)
    return out


def _scale(X: Body2D, lam: float) -> Body2D:
    v = None if X.vertices is None else lam * X.vertices
    if v is not None and lam == 0:
        v = None
    return Body2D(lam * X.H0, lam * X.coeffs, X.grid_M, v)


def scale_translate(X: Body2D, lam: float, b=(0.0, 0.0)) -> Body2D:
    """Homothety ``lam X + b``."""
    if not lam > 0:
        raise NonPositiveScale(f"scale must be positive, got {lam}")
    b = np.asarray(b, dtype=float)
    Y = _scale(X, float(lam))
    if not np.any(b):
        return Y
    if Y.vertices is not None:
        return Body2D(Y.H0, Y.coeffs, Y.grid_M, Y.vertices + b)
    if Y.N == 0:
        raise InvalidInput("translation needs N >= 1")
    c = Y.coeffs.copy()
    c[0] += (b[0] - 1j * b[1]) / 2
    return Body2D(Y.H0, c, Y.grid_M)


def _rotate_coeffs(coeffs: np.ndarray, alpha: float) -> np.ndarray:
    p = np.arange(1, len(coeffs) + 1)
    return coeffs * np.exp(-1j * p * alpha)


def _reflect_coeffs(coeffs: np.ndarray, phi: float) -> np.ndarray:
    p = np.arange(1, len(coeffs) + 1)
    return np.conj(coeffs) * np.exp(-2j * p * phi)


def _project(fun, N: int, M: int, oversample: int = 64) -> tuple[float, np.ndarray, float]:
    L = oversample * M
    H0, c = _coeffs_from_samples(fun(grid(L)), N)
    th = grid(M)
    resid = float(np.max(np.abs(fun(th) - _fourier_eval(H0, c, th))))
    return H0, c, resid


def apply_op(A: LinearOp2, X: Body2D) -> Body2D:
    """Image ``A X``; exact for orthogonal ``A``.

    For a non-orthogonal ``A`` the Fourier part is resampled through
    ``|A^T u| H(arg A^T u)`` and projected back to degree ``N``; the result
    is re-validated.
    """
    if abs(A.det) <= 1e-14:
        raise SingularOperator("operator is singular")
    v = None
    if X.vertices is not None:
        v = X.vertices @ A.entries.T
        if A.det < 0:
            v = v[::-1].copy()
    if A.kind == "rotation":
        return Body2D(X.H0, _rotate_coeffs(X.coeffs, A.angle), X.grid_M, v)
    if A.kind == "reflection":
        return Body2D(X.H0, _reflect_coeffs(X.coeffs, A.angle), X.grid_M, v)
    if v is not None:
        v = convex_hull(v)

    def fun(th):
        w = unit(th) @ A.entries
        return np.hypot(w[:, 0], w[:, 1]) * X.fourier_support(np.arctan2(w[:, 1], w[:, 0]))

    H0, c, _ = _project(fun, X.N, X.grid_M)
    return validate(Body2D(H0, c, X.grid_M, v))


def fourier_projection(X: Body2D, N: int | None = None) -> tuple[Body2D, float]:
    """Degree-``N`` Fourier truncation of ``X`` and its sup residual on the grid.

    The truncation of a body with a polygon part is generally not convex; the
    returned body is not validated.
    """
    N = X.N if N is None else N
    if X.vertices is None and N >= X.N:
        c = np.zeros(N, dtype=complex)
        c[: X.N] = X.coeffs
        return Body2D(X.H0, c, max(X.grid_M, 2 * N + 2)), 0.0
    H0, c, resid = _project(X.support, N, X.grid_M)
    return Body2D(H0, c, max(X.grid_M, 2 * N + 2)), resid


# --------------------------------------------------------------------------
# JSON


def to_json(X: Body2D) -> dict:
    if X.vertices is not None and X.H0 == 0 and not np.any(X.coeffs):
        return {"type": "polygon", "vertices": X.vertices.tolist()}
    d = {
        "type": "fourier",
        "H0": X.H0,
        "coeffs": [[z.real, z.imag] for z in X.coeffs],
        "grid_M": X.grid_M,
    }
    if X.vertices is not None:
        d["polygon"] = X.vertices.tolist()
    return d


def from_json(d: dict, N: int | None = None, grid_M: int | None = None) -> Body2D:
    """Parse a body spec.

    Besides ``fourier`` and ``polygon`` this accepts ``{"type": "disk",
    "radius": r, "center": [x, y]}``.
    """
    kind = d.get("type")
    M = grid_M or d.get("grid_M") or DEFAULT_M
    if kind == "polygon":
        return from_polygon(d["vertices"], N or DEFAULT_N, M)
    if kind == "disk":
        return disk(float(d.get("radius", 1.0)), d.get("center", (0.0, 0.0)), N or DEFAULT_N, M)
    if kind == "fourier":
        raw = np.array([complex(re, im) for re, im in d.get("coeffs", [])], dtype=complex)
        n = len(raw) if N is None else N
        if len(raw) > n and np.any(raw[n:]):
            raise GridMismatch(f"body has {len(raw)} modes, N={n}")
        c = np.zeros(n, dtype=complex)
        c[: min(n, len(raw))] = raw[:n]
        v = d.get("polygon")
        if v is not None:
            v = from_polygon(v, n, M).vertices
        return from_fourier(float(d["H0"]), c, M, v)
    raise InvalidInput(f"unknown body type {kind!r}")


# --------------------------------------------------------------------------
# one-dimensional bodies


@dataclass(frozen=True)
class Interval1D:
    """Convex compact ``[lo, hi]`` of the real line (``lo == hi`` is a point)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi >= self.lo:
            raise InvalidInput(f"interval needs lo <= hi, got [{self.lo}, {self.hi}]")

    @property
    def diameter(self) -> float:
        return self.hi - self.lo
