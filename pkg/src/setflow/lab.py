"""Experiment harness: random bodies, manifold membership, stability runs.

An experiment is described by an :class:`ExperimentConfig` (a JSON object),
simulates a perturbed solution ``X(t)`` next to the program solution
``X*(t)`` with the same integrator, and emits one :class:`StabilityRecord`
per sample time plus a summary dictionary.  Everything random is drawn from
``numpy.random.default_rng`` seeded by the configuration, so a run is
reproducible bit for bit.
"""

from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import brentq

from . import body2d
from .body2d import Body2D, LinearOp2, apply_op, fourier_coefficients, minkowski_combination
from .compsys import asymptotic_S, cross_terms, rotational_sum
from .errors import (
    BadOrder,
    GenerationFailed,
    InvalidInput,
    NonConvexInput,
    NotInManifold,
    NotPeriodic,
)
from .geomfun import area, deficit, diameter, inradius_circumradius, mixed_area, shape_metric
from .sde import Trajectory, compatible_grid, conjugate_to_orthogonal, evolve

log = logging.getLogger(__name__)

TOL_M = 1e-8
PERIOD_TOL = 1e-10
MAX_REJECTIONS = 1000
DEFAULT_LADDER = (1e-1, 1e-2, 1e-3, 1e-4)
FIT_WINDOW = (1e-6, 1e-2)
SEED_ENV = "SETFLOW_SEED"


# --------------------------------------------------------------------------
# random bodies


def random_body(
    seed: int,
    N: int = body2d.DEFAULT_N,
    roughness: float = 0.05,
    grid_M: int = body2d.DEFAULT_M,
) -> Body2D:
    """``H = 1 + sum_p a_p cos(p theta + phi_p)`` with ``a_p = roughness / p^2 * U[-1, 1]``.

    Draws are repeated until the curvature invariant holds.
    """
    if roughness < 0:
        raise InvalidInput("roughness must be nonnegative")
    rng = np.random.default_rng(seed)
    p = np.arange(1, N + 1)
    for _ in range(MAX_REJECTIONS):
        amp = roughness / p**2 * rng.uniform(-1.0, 1.0, N)
        phase = rng.uniform(0.0, 2 * np.pi, N)
        X = Body2D(1.0, 0.5 * amp * np.exp(1j * phase), grid_M)
        if X.is_convex():
            return X
    raise GenerationFailed(f"no convex body after {MAX_REJECTIONS} draws at roughness {roughness}")


def random_polygon(seed, n: int = 7, N: int = body2d.DEFAULT_N, grid_M: int = body2d.DEFAULT_M) -> Body2D:
    """Hull of ``n`` points on a circle with radii jittered in ``[0.7, 1.3]``.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    if n < 3:
        raise InvalidInput("a polygon needs at least three points")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(MAX_REJECTIONS):
        ang = np.sort(rng.uniform(0, 2 * np.pi, n))
        r = rng.uniform(0.7, 1.3, n)
        hull = body2d.convex_hull(np.column_stack([r * np.cos(ang), r * np.sin(ang)]))
        if len(hull) >= 3:
            return body2d.from_polygon(hull, N, grid_M)
    raise GenerationFailed("no nondegenerate polygon drawn")


def perturb(X: Body2D, modes, amplitudes, phases=None) -> Body2D:
    """Add ``a cos(p theta + phi)`` to the support function for each mode ``p``.

    Only the Fourier part changes, so it has to stay convex on its own.
    """
    modes = [int(p) for p in modes]
    amplitudes = [float(a) for a in amplitudes]
    if len(modes) != len(amplitudes):
        raise InvalidInput("modes and amplitudes differ in length")
    phases = [0.0] * len(modes) if phases is None else [float(f) for f in phases]
    if len(phases) != len(modes):
        raise InvalidInput("modes and phases differ in length")
    if any(p < 0 for p in modes):
        raise InvalidInput("mode indices must be nonnegative")
    N = max([X.N, *modes])
    if X.grid_M < 2 * N + 2:
        raise InvalidInput(f"mode {N} needs a grid of at least {2 * N + 2} directions")
    H0 = X.H0
    c = np.zeros(N, dtype=complex)
    c[: X.N] = X.coeffs
    for p, a, f in zip(modes, amplitudes, phases):
        if p == 0:
            H0 += a
        else:
            c[p - 1] += 0.5 * a * np.exp(1j * f)
    Y = Body2D(H0, c, X.grid_M, X.vertices)
    if not Y.is_convex():
        raise NonConvexInput(
            "perturbation breaks the curvature invariant of the Fourier part; lower the amplitudes"
        )
    return Y


# --------------------------------------------------------------------------
# the manifold of attraction


def _check_period(A: LinearOp2, m: int):
    if int(m) != m or m < 1:
        raise NotPeriodic(f"period must be a positive integer, got {m}")
    err = np.max(np.abs(A.power(int(m)).entries - np.eye(2)))
    if err > PERIOD_TOL:
        raise NotPeriodic(f"A^{m} differs from the identity by {err:.3e}")


def membership_in_M(
    X0: Body2D, X0s: Body2D, A: LinearOp2, m: int, tol: float = TOL_M
) -> tuple[bool, float]:
    """Whether ``sum_k A^k X0`` is a homothet of ``sum_k A^k X0*``.

    Returns the verdict and the shape distance between the two sums.
    """
    _check_period(A, m)
    if X0 is X0s:
        return True, 0.0
    rho, _ = shape_metric(rotational_sum(X0, A, m), rotational_sum(X0s, A, m), lexicographic=False)
    return bool(rho <= tol), float(rho)


def fourier_condition_check(X0: Body2D, X0s: Body2D, m: int) -> np.ndarray:
    """``|H_p(X0) - H_p(X0*)|`` for ``p = 0, m, 2m, ...`` up to the larger degree.

    These are the only modes a rotation of order ``m`` keeps in the
    rotational sum.  With equal mean width (``p = 0``) all of them vanish
    exactly when the two sums coincide.
    """
    body2d._check_grids(X0, X0s)
    if int(m) != m or m < 1:
        raise BadOrder(f"m must be a positive integer, got {m}")
    pmax = max(X0.N, X0s.N)
    diff = fourier_coefficients(X0, pmax) - fourier_coefficients(X0s, pmax)
    return np.abs(diff[:: int(m)])


def fourier_condition_holds(X0: Body2D, X0s: Body2D, m: int, tol: float = TOL_M) -> bool:
    return bool(np.all(fourier_condition_check(X0, X0s, m) <= tol))


# --------------------------------------------------------------------------
# configuration


def _default_times(T: float, n: int) -> list:
    return [float(t) for t in np.linspace(0.0, T, n)]


@dataclass
class ExperimentConfig:
    """One experiment unit.

    ``X0_star`` is a body JSON object (``fourier``, ``polygon``, ``disk``) or
    ``{"type": "random", "roughness": r}``.  ``perturbation`` holds
    ``modes``, ``amplitudes`` and optionally ``phases``; missing phases are
    drawn from ``seed``.
    """

    m: int = 4
    operator: dict | None = None
    X0_star: dict = field(default_factory=lambda: {"type": "random", "roughness": 0.05})
    perturbation: dict = field(default_factory=lambda: {"modes": [], "amplitudes": []})
    T: float = 12.0
    times: list | None = None
    n_times: int = 121
    integrator: str = "spectral"
    N: int = body2d.DEFAULT_N
    grid_M: int = body2d.DEFAULT_M
    ladder: list = field(default_factory=lambda: list(DEFAULT_LADDER))
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if not self.T > 0:
            raise InvalidInput("horizon T must be positive")
        if self.times is None:
            self.times = _default_times(self.T, self.n_times)
        t = np.asarray(self.times, dtype=float)
        if t.size == 0 or np.any(t < 0) or np.any(t > self.T + 1e-12) or np.any(np.diff(t) <= 0):
            raise InvalidInput("sample times must be increasing and lie in [0, T]")
        if self.integrator not in ("spectral", "rk4", "picard"):
            raise InvalidInput(f"unknown integrator {self.integrator!r}")

    @classmethod
    def from_json(cls, d: dict, env: dict | None = None) -> "ExperimentConfig":
        env = os.environ if env is None else env
        d = dict(d)
        d.pop("kind", None)
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInput(f"unknown config keys: {sorted(unknown)}")
        if env.get(SEED_ENV):
            try:
                d["seed"] = int(env[SEED_ENV])
            except ValueError:
                raise InvalidInput(f"{SEED_ENV} must be an integer") from None
        return cls(**d)

    def to_json(self) -> dict:
        return asdict(self)

    # resolved objects

    def op(self) -> LinearOp2:
        if self.operator is None:
            return LinearOp2.rotation_order(self.m)
        return LinearOp2.from_json(self.operator)

    def resolved_grid(self) -> int:
        if self.integrator == "rk4":
            return compatible_grid(self.m, self.grid_M)
        return self.grid_M

    def program_body(self) -> Body2D:
        spec = dict(self.X0_star)
        M = self.resolved_grid()
        if spec.get("type") == "random":
            return random_body(
                int(spec.get("seed", self.seed)),
                int(spec.get("N", self.N)),
                float(spec.get("roughness", 0.05)),
                M,
            )
        return body2d.from_json(spec, N=self.N, grid_M=M)

    def initial_bodies(self) -> tuple[Body2D, Body2D]:
        Xs = self.program_body()
        pert = self.perturbation
        modes = pert.get("modes", [])
        phases = pert.get("phases")
        if phases is None and modes:
            rng = np.random.default_rng(int(pert.get("seed", self.seed)))
            phases = rng.uniform(0.0, 2 * np.pi, len(modes))
        X = perturb(Xs, modes, pert.get("amplitudes", []), phases) if modes else Xs
        return X, Xs


@dataclass(frozen=True)
class StabilityRecord:
    t: float
    rho: float
    delta: float
    V: float
    S_cross: float


RECORD_FIELDS = ("t", "rho", "delta", "V", "S_cross")


@dataclass
class ExperimentResult:
    kind: str
    records: list
    summary: dict
    config: dict | None = None

    def write(self, csv_path, summary_path=None):
        write_records_csv(self.records, csv_path)
        summary_path = summary_path or Path(csv_path).with_suffix(".summary.json")
        write_json({"kind": self.kind, "summary": self.summary, "config": self.config}, summary_path)
        return summary_path


# --------------------------------------------------------------------------
# simulation helpers


class _Flow:
    """Solves ``D_H X = A X`` for a stable ``A`` through its orthogonal conjugate."""

    def __init__(self, A: LinearOp2, integrator: str):
        self.A = A
        self.integrator = integrator
        if A.is_orthogonal():
            self.T, self.A1 = None, A
        else:
            self.T, self.A1 = conjugate_to_orthogonal(A)
            log.info("operator conjugated to %s", self.A1.kind)

    def run(self, X0: Body2D, times) -> Trajectory:
        Y0 = X0 if self.T is None else apply_op(self.T.inverse(), X0)
        traj = evolve(Y0, self.A1, times, self.integrator)
        if self.T is None:
            return traj
        bodies = [apply_op(self.T, Y) for Y in traj.bodies]
        return Trajectory(traj.times, bodies, traj.integrator, traj.meta)


def _records(traj: Trajectory, traj_s: Trajectory) -> list:
    out = []
    for t, X, Xs in zip(traj.times, traj.bodies, traj_s.bodies):
        rep = deficit(X, Xs)
        rho, _ = shape_metric(X, Xs, lexicographic=False)
        out.append(StabilityRecord(float(t), float(rho), rep.delta, rep.VX, rep.V1))
    return out


def fit_decay_rate(t, y, window=FIT_WINDOW) -> float:
    """``-d log y / dt`` by least squares over samples with ``y`` inside ``window``.

    Returns ``nan`` when fewer than three samples fall in the window.
    """
    t, y = np.asarray(t, dtype=float), np.asarray(y, dtype=float)
    keep = (y >= window[0]) & (y <= window[1])
    if keep.sum() < 3:
        return float("nan")
    slope = np.polyfit(t[keep], np.log(y[keep]), 1)[0]
    return float(-slope)


def normalized_mode_gap(X: Body2D, Xs: Body2D, p: int) -> float:
    """``|H_p(X~) - H_p(X~*)|`` for the unit-area representatives."""
    c = fourier_coefficients(X, p)[p] / np.sqrt(area(X))
    cs = fourier_coefficients(Xs, p)[p] / np.sqrt(area(Xs))
    return float(abs(c - cs))


def _summary_common(cfg: ExperimentConfig, A: LinearOp2, records) -> dict:
    rho = np.array([r.rho for r in records])
    delta = np.array([r.delta for r in records])
    return {
        "m": cfg.m,
        "operator": A.to_json(),
        "integrator": cfg.integrator,
        "seed": cfg.seed,
        "rho0": float(rho[0]),
        "rho_final": float(rho[-1]),
        "rho_sup": float(rho.max()),
        "delta_final": float(delta[-1]),
        "delta_min": float(delta.min()),
    }


# --------------------------------------------------------------------------
# experiments


def _ladder_body(X0: Body2D, Xs: Body2D, rho0: float, rho_full: float):
    if rho0 > rho_full:
        return None, None
    if rho0 == rho_full:
        return X0, 1.0

    def gap(s):
        Y = minkowski_combination([1.0 - s, s], [Xs, X0])
        return shape_metric(Y, Xs, lexicographic=False)[0] - rho0

    s = brentq(gap, 0.0, 1.0, xtol=1e-15, rtol=1e-12)
    return minkowski_combination([1.0 - s, s], [Xs, X0]), float(s)


def run_stability(cfg: ExperimentConfig) -> ExperimentResult:
    """Trajectory records for the configured perturbation plus a ``rho0`` ladder.

    Each ladder rung uses the Minkowski combination ``(1-s) X0* + s X0``
    with ``s`` chosen so the initial shape distance equals the rung, and
    reports ``sup_t rho(t)``.  Rungs above the configured offset are marked
    unreachable.
    """
    A = cfg.op()
    flow = _Flow(A, cfg.integrator)
    X0, Xs = cfg.initial_bodies()
    traj_s = flow.run(Xs, cfg.times)
    records = _records(flow.run(X0, cfg.times), traj_s)
    summary = _summary_common(cfg, A, records)

    rho_full = records[0].rho
    ladder = []
    for rho0 in sorted(cfg.ladder, reverse=True):
        Y0, s = _ladder_body(X0, Xs, float(rho0), rho_full)
        if Y0 is None:
            ladder.append({"rho0": float(rho0), "s": None, "sup_rho": None})
            continue
        recs = _records(flow.run(Y0, cfg.times), traj_s)
        ladder.append({"rho0": float(rho0), "s": s, "sup_rho": max(r.rho for r in recs)})
    done = [r for r in ladder if r["sup_rho"] is not None]
    sups = [r["sup_rho"] for r in done]
    summary["ladder"] = ladder
    summary["ladder_monotone"] = bool(all(a >= b for a, b in zip(sups, sups[1:])))
    if len(done) >= 2:
        x = np.log([r["rho0"] for r in done])
        y = np.log(np.maximum(sups, 1e-300))
        summary["scaling_exponent"] = float(np.polyfit(x, y, 1)[0])
    else:
        summary["scaling_exponent"] = None
    return ExperimentResult("stability", records, summary, cfg.to_json())


def _period(A: LinearOp2, m: int) -> int:
    _check_period(A, m)
    return int(m)


def predicted_limits(X0: Body2D, Xs: Body2D, A: LinearOp2, m: int) -> dict:
    """Limits of ``rho`` and ``Delta`` as ``t -> inf`` for ``A^m = I``.

    The shape of ``X(t)`` tends to that of ``sum_k A^k X0``; the mixed and
    plain areas grow like ``e^{2t}`` with the coefficients of ``asymptotic_S``.
    """
    rho_inf, _ = shape_metric(
        rotational_sum(X0, A, m), rotational_sum(Xs, A, m), lexicographic=False
    )
    if m >= 3:
        S = asymptotic_S(m, *cross_terms(X0, Xs, A, m))
        V = asymptotic_S(m, *cross_terms(X0, X0, A, m))
        Vs = asymptotic_S(m, *cross_terms(Xs, Xs, A, m))
    else:
        P, Ps = rotational_sum(X0, A, m), rotational_sum(Xs, A, m)
        S, V, Vs = mixed_area(P, Ps), area(P), area(Ps)
    return {"rho_inf": float(rho_inf), "delta_inf": float(S * S / (V * Vs) - 1.0)}


def run_attraction(cfg: ExperimentConfig, require_manifold: bool = True) -> ExperimentResult:
    """Decay of the shape distance for a perturbation inside the manifold.

    With ``require_manifold=False`` perturbations outside it are allowed and
    the summary reports the predicted positive limit instead.
    """
    A = cfg.op()
    m = _period(A, cfg.m)
    X0, Xs = cfg.initial_bodies()
    inside, resid = membership_in_M(X0, Xs, A, m)
    if require_manifold and not inside:
        raise NotInManifold(f"rotational sums differ by rho = {resid:.3e} > {TOL_M:g}")
    flow = _Flow(A, cfg.integrator)
    traj, traj_s = flow.run(X0, cfg.times), flow.run(Xs, cfg.times)
    records = _records(traj, traj_s)
    summary = _summary_common(cfg, A, records)
    summary["in_manifold"] = inside
    summary["membership_residual"] = resid
    summary["fourier_condition"] = fourier_condition_check(X0, Xs, m).tolist()
    t = np.array([r.t for r in records])
    summary["rho_decay_rate"] = fit_decay_rate(t, [r.rho for r in records])
    modes = []
    alpha = A.angle if A.kind == "rotation" else None
    for p in sorted({int(p) for p in cfg.perturbation.get("modes", []) if int(p) > 0}):
        gaps = [normalized_mode_gap(X, Y, p) for X, Y in zip(traj.bodies, traj_s.bodies)]
        modes.append(
            {
                "p": p,
                "predicted_rate": None if alpha is None else float(1 - np.cos(p * alpha)),
                "fitted_rate": fit_decay_rate(t, gaps),
                "gap0": gaps[0],
                "gap_final": gaps[-1],
            }
        )
    summary["modes"] = modes
    summary.update(predicted_limits(X0, Xs, A, m))
    return ExperimentResult("attraction", records, summary, cfg.to_json())


def _is_rational_turn(alpha: float, max_den: int = 1000, tol: float = 1e-9) -> bool:
    x = alpha / (2 * np.pi)
    return abs(float(Fraction(x).limit_denominator(max_den)) - x) <= tol


GOLDEN_ANGLE = float(np.pi * (3 - np.sqrt(5)))


@dataclass
class ProbeReport:
    alpha: float
    rational_warning: bool
    times: np.ndarray
    rho_ball: np.ndarray
    mode_amplitudes: np.ndarray  # normalized |H_p|, rows = times, cols = p = 1..N
    monotone: bool

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "rational_warning": self.rational_warning,
            "times": self.times.tolist(),
            "rho_ball": self.rho_ball.tolist(),
            "monotone": self.monotone,
            "predicted_rates": (1 - np.cos(np.arange(1, self.mode_amplitudes.shape[1] + 1) * self.alpha)).tolist(),
        }


def run_hypothesis_probe(alpha: float, X0: Body2D, times, integrator: str = "spectral") -> ProbeReport:
    """Shape distance to the disk along the flow of a generic rotation.

    Exploratory: mode ``p`` of the unit-area representative decays like
    ``exp(-t (1 - cos p alpha))``; no pass/fail verdict is attached.
    """
    warn = _is_rational_turn(alpha)
    if warn:
        log.warning("alpha/2pi is close to a rational number; modes with cos(p alpha) = 1 persist")
    A = LinearOp2.rotation(alpha)
    traj = evolve(X0, A, times, integrator)
    ball = body2d.disk(1.0, N=X0.N, grid_M=X0.grid_M)
    rho = np.array([shape_metric(X, ball, lexicographic=False)[0] for X in traj.bodies])
    amps = np.array(
        [np.abs(fourier_coefficients(X, X.N)[1:]) / np.sqrt(area(X)) for X in traj.bodies]
    )
    # translation (p = 1) does not change the shape, so it is left out of the trend
    monotone = bool(np.all(np.diff(rho) <= 1e-12 * max(1.0, rho[0])))
    return ProbeReport(float(alpha), warn, traj.times, rho, amps, monotone)


def run_probe_config(cfg: ExperimentConfig) -> ExperimentResult:
    A = cfg.op()
    if A.kind != "rotation":
        raise InvalidInput("the probe needs a rotation operator")
    X0, _ = cfg.initial_bodies()
    rep = run_hypothesis_probe(A.angle, X0, cfg.times, cfg.integrator)
    ball = body2d.disk(1.0, N=X0.N, grid_M=X0.grid_M)
    traj = evolve(X0, A, cfg.times, cfg.integrator)
    records = []
    for t, X, rho in zip(traj.times, traj.bodies, rep.rho_ball):
        r = deficit(X, ball)
        records.append(StabilityRecord(float(t), float(rho), r.delta, r.VX, r.V1))
    return ExperimentResult("probe", records, rep.to_json(), cfg.to_json())


EXPERIMENTS = {
    "stability": run_stability,
    "attraction": run_attraction,
    "probe": run_probe_config,
}


def run_experiment(kind: str, cfg: ExperimentConfig) -> ExperimentResult:
    try:
        fn = EXPERIMENTS[kind]
    except KeyError:
        raise InvalidInput(f"unknown experiment {kind!r}") from None
    return fn(cfg)


def _run_unit(args):
    kind, cfg = args
    res = run_experiment(kind, cfg)
    if cfg.output:
        res.write(cfg.output)
    return res


def run_units(kind: str, cfgs, max_workers: int = 1) -> list:
    """Run independent configurations, in worker processes if ``max_workers > 1``."""
    jobs = [(kind, c) for c in cfgs]
    if max_workers <= 1:
        return [_run_unit(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=max_workers) as ex:
        return list(ex.map(_run_unit, jobs))


# --------------------------------------------------------------------------
# output


def write_records_csv(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([repr(float(getattr(r, f))) for f in RECORD_FIELDS])


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if not np.isfinite(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2)
        fh.write("\n")


def trajectory_rows(traj: Trajectory, modes: int = 0) -> tuple[list, list]:
    """Header and rows ``t, V, r, R, diam, |H_1| ...`` for a trajectory."""
    header = ["t", "V", "r", "R", "diam"] + [f"|H_{p}|" for p in range(1, modes + 1)]
    rows = []
    for t, X in zip(traj.times, traj.bodies):
        r, R, _, _ = inradius_circumradius(X)
        row = [float(t), area(X), r, R, diameter(X)]
        if modes:
            row.extend(np.abs(fourier_coefficients(X, modes)[1:]).tolist())
        rows.append(row)
    return header, rows


def write_trajectory_csv(traj: Trajectory, path, modes: int = 0):
    header, rows = trajectory_rows(traj, modes)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
