"""Comparison system for cross mixed areas under a periodic planar rotation.

For solutions ``X(t), X*(t)`` of ``D_H X = A X`` with ``A^m = I`` the vector

    xi_k(t) = (S[X, A^k X*] + S[X*, A^k X]) / 2,   k = 0..m-1

solves ``dxi/dt = Omega xi`` with the m x m matrix built by :func:`build_omega`.
``xi_0`` is the mixed area ``S[X(t), X*(t)]``; :func:`closed_form_S` gives it
in closed form and :func:`evolve_xi` through a matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .body2d import Body2D, LinearOp2, apply_op, minkowski_combination
from .errors import BadOrder, NegativeTime
from .geomfun import mixed_area


@dataclass(frozen=True, eq=False)
class ComparisonSystem:
    m: int
    omega: np.ndarray

    @property
    def parity(self) -> str:
        return "odd" if self.m % 2 else "even"


@dataclass(frozen=True, eq=False)
class XiState:
    xi: np.ndarray

    @property
    def s0(self) -> float:
        return float(self.xi[0])

    @property
    def cross(self) -> np.ndarray:
        """``S[X, A^p X*] + S[X*, A^p X]`` for ``p = 1..m-1``."""
        return 2.0 * self.xi[1:]


def _check_order(m: int):
    if int(m) != m or m < 3:
        raise BadOrder(f"comparison system needs an integer m >= 3, got {m}")


def build_omega(m: int) -> ComparisonSystem:
    _check_order(m)
    om = np.zeros((m, m))
    i = np.arange(m - 1)
    om[i, i + 1] = 1.0
    om[i + 1, i] = 1.0
    om[0, 1] = 2.0
    om[m - 1, 0] = 1.0
    om.setflags(write=False)
    return ComparisonSystem(m, om)


def spectrum(sys: ComparisonSystem, cluster_tol: float = 1e-4) -> np.ndarray:
    """Distinct eigenvalues of ``Omega`` in decreasing order.

    ``Omega`` has 2x2 Jordan blocks, whose eigenvalues a dense solver only
    resolves to ``sqrt(eps)``.  The mean of a cluster is the trace of the
    spectral projection divided by its rank, which is well conditioned, so
    clusters are averaged.
    """
    ev = np.sort(np.linalg.eigvals(sys.omega).real)[::-1]
    groups = [[ev[0]]]
    for x in ev[1:]:
        if abs(groups[-1][-1] - x) <= cluster_tol:
            groups[-1].append(x)
        else:
            groups.append([x])
    return np.array([np.mean(g) for g in groups])


def predicted_spectrum(m: int) -> np.ndarray:
    q = np.arange(m // 2 + 1)
    return 2 * np.cos(2 * np.pi * q / m)


# --------------------------------------------------------------------------
# matrix exponential


def _pade_coeffs(q: int) -> np.ndarray:
    return np.array(
        [
            factorial(2 * q - k) * factorial(q) / (factorial(2 * q) * factorial(k) * factorial(q - k))
            for k in range(q + 1)
        ]
    )


_PADE6 = _pade_coeffs(6)


def expm(a: np.ndarray) -> np.ndarray:
    """Scaling and squaring with a diagonal [6/6] Pade approximant.

    The matrix is scaled until its 1-norm is at most 1/2, where the [6/6]
    truncation error is below 1e-16, then squared back.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    norm = np.linalg.norm(a, 1)
    s = max(0, int(np.ceil(np.log2(norm / 0.5)))) if norm > 0 else 0
    b = a / 2.0**s
    num = np.zeros_like(b)
    den = np.zeros_like(b)
    pk = np.eye(n)
    for k, c in enumerate(_PADE6):
        num += c * pk
        den += (-1) ** k * c * pk
        pk = pk @ b
    e = np.linalg.solve(den, num)
    for _ in range(s):
        e = e @ e
    return e


def evolve_xi(sys: ComparisonSystem, xi0, t: float) -> XiState:
    xi0 = xi0.xi if isinstance(xi0, XiState) else np.asarray(xi0, dtype=float)
    if t < 0:
        raise NegativeTime("t must be nonnegative")
    return XiState(expm(sys.omega * t) @ xi0)


# --------------------------------------------------------------------------
# bodies -> xi


def xi_from_bodies(X: Body2D, Xs: Body2D, A: LinearOp2, m: int) -> XiState:
    xi = np.empty(m)
    for k in range(m):
        Ak = A.power(k)
        xi[k] = 0.5 * (mixed_area(X, apply_op(Ak, Xs)) + mixed_area(Xs, apply_op(Ak, X)))
    return XiState(xi)


def cross_terms(X0: Body2D, X0s: Body2D, A: LinearOp2, m: int) -> tuple[float, np.ndarray]:
    """``(S[X0, X0*], [S[X0, A^p X0*] + S[X0*, A^p X0] for p = 1..m-1])``."""
    st = xi_from_bodies(X0, X0s, A, m)
    return st.s0, st.cross


def rotational_sum(X: Body2D, A: LinearOp2, m: int) -> Body2D:
    """``sum_{k<m} A^k X``."""
    return minkowski_combination(np.ones(m), [apply_op(A.power(k), X) for k in range(m)])


# --------------------------------------------------------------------------
# closed forms


def closed_form_S(m: int, s0: float, cross, t: float) -> float:
    """Mixed area ``S[X(t), X*(t)]`` from initial data.

    The even-``m`` leading term multiplies ``S[X0, X0*]`` (``s0``), as in the
    odd case; the matrix-exponential route confirms this reading.
    """
    _check_order(m)
    cross = np.asarray(cross, dtype=float)
    if cross.shape != (m - 1,):
        raise BadOrder(f"need {m - 1} cross terms, got {cross.shape}")
    even = m % 2 == 0
    qmax = (m - 2) // 2 if even else m // 2
    q = np.arange(1, qmax + 1)
    ang = 2 * np.pi * q / m
    eq = np.exp(2 * t * np.cos(ang))

    lead = np.exp(2 * t) + 2 * eq.sum()
    if even:
        lead += np.exp(-2 * t)
    total = lead * s0 / m

    for p in range(1, m):
        c = (m - p) * np.exp(2 * t)
        if even:
            c += (m - p) * (-1) ** p * np.exp(-2 * t)
        osc = (m - p) * np.cos(p * ang) + 2 * t * np.sin(p * ang) * np.sin(ang)
        c += 2 * np.sum(osc * eq)
        total += c * cross[p - 1] / m**2
    return float(total)


def asymptotic_S(m: int, s0: float, cross) -> float:
    """Coefficient of ``e^{2t}`` in ``S[X(t), X*(t)]`` as ``t -> inf``."""
    _check_order(m)
    cross = np.asarray(cross, dtype=float)
    if cross.shape != (m - 1,):
        raise BadOrder(f"need {m - 1} cross terms, got {cross.shape}")
    p = np.arange(1, m)
    return float(s0 / m + np.sum((m - p) * cross) / m**2)
