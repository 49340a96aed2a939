"""Command line interface.

Exit codes: 0 on success, 2 when a mathematical invariant is violated,
3 on bad input.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import body2d
from .body2d import LinearOp2
from .compsys import build_omega, closed_form_S, cross_terms, evolve_xi, predicted_spectrum, spectrum
from .errors import InvalidInput, InvariantViolation, SetFlowError
from .geomfun import deficit, hausdorff, mixed_area, shape_metric
from .lab import ExperimentConfig, random_body, run_attraction, run_experiment, write_json
from .lab import write_trajectory_csv
from .sde import evolve

EXIT_OK, EXIT_INVARIANT, EXIT_INPUT = 0, 2, 3

log = logging.getLogger("setflow")


def _load_json(arg: str):
    """A path to a JSON file, or an inline JSON document."""
    p = Path(arg)
    try:
        text = p.read_text() if p.is_file() else arg
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read JSON from {arg!r}: {exc}") from None


def _body(arg: str, N: int, grid_M: int):
    d = _load_json(arg)
    if isinstance(d, dict) and d.get("type") == "random":
        return random_body(int(d.get("seed", 0)), int(d.get("N", N)), float(d.get("roughness", 0.05)), grid_M)
    return body2d.from_json(d, N=N, grid_M=grid_M)


def _operator(args) -> LinearOp2:
    if args.operator:
        return LinearOp2.from_json(_load_json(args.operator))
    if args.angle is not None:
        return LinearOp2.rotation(args.angle)
    return LinearOp2.rotation_order(args.m)


def _emit(obj, out):
    if out:
        write_json(obj, out)
    else:
        from .lab import _jsonable

        json.dump(_jsonable(obj), sys.stdout, indent=2)
        sys.stdout.write("\n")


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(args):
    X0 = _body(args.body, args.N, args.grid_M)
    A = _operator(args)
    times = args.times or list(np.linspace(0.0, args.T, args.steps + 1))
    traj = evolve(X0, A, times, args.integrator)
    out = args.out or "-"
    if out == "-":
        from .lab import trajectory_rows

        header, rows = trajectory_rows(traj, args.modes)
        print(",".join(header))
        for row in rows:
            print(",".join(repr(float(v)) for v in row))
    else:
        write_trajectory_csv(traj, out, args.modes)
    return EXIT_OK


def cmd_metric(args):
    X = _body(args.x, args.N, args.grid_M)
    Y = _body(args.y, args.N, args.grid_M)
    rho, x = shape_metric(X, Y)
    rep = deficit(X, Y)
    _emit({"rho": rho, "translation": x, "deficit": rep.to_json(), "hausdorff": hausdorff(X, Y)}, args.out)
    return EXIT_OK


def cmd_spectrum(args):
    sys_ = build_omega(args.m)
    _emit(
        {
            "m": args.m,
            "eigenvalues": spectrum(sys_),
            "predicted": np.sort(predicted_spectrum(args.m))[::-1],
            "omega": sys_.omega,
        },
        args.out,
    )
    return EXIT_OK


def cmd_closed_form(args):
    X = _body(args.x, args.N, args.grid_M)
    Y = _body(args.y, args.N, args.grid_M)
    A = LinearOp2.rotation_order(args.m)
    s0, cross = cross_terms(X, Y, A, args.m)
    sys_ = build_omega(args.m)
    xi0 = np.concatenate([[s0], cross / 2])
    rows = []
    for t in args.t:
        row = {"t": t, "closed_form": closed_form_S(args.m, s0, cross, t), "expm": evolve_xi(sys_, xi0, t).s0}
        if args.geometric:
            traj = evolve(X, A, [t])
            traj_s = evolve(Y, A, [t])
            row["geometric"] = mixed_area(traj.final, traj_s.final)
        rows.append(row)
    _emit({"m": args.m, "s0": s0, "cross": cross, "values": rows}, args.out)
    return EXIT_OK


def cmd_experiment(args):
    cfg_json = _load_json(args.config)
    if not isinstance(cfg_json, dict):
        raise InvalidInput("experiment config must be a JSON object")
    cfg = ExperimentConfig.from_json(cfg_json)
    if args.kind == "attraction" and args.allow_outside:
        res = run_attraction(cfg, require_manifold=False)
    else:
        res = run_experiment(args.kind, cfg)
    out = args.out or cfg.output
    if out:
        summary = res.write(out, args.summary)
        log.info("wrote %s and %s", out, summary)
    else:
        _emit({"kind": res.kind, "summary": res.summary}, args.summary)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _add_grid(p):
    p.add_argument("--N", type=int, default=body2d.DEFAULT_N, help="Fourier degree")
    p.add_argument("--grid-M", dest="grid_M", type=int, default=body2d.DEFAULT_M, help="direction grid size")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="setflow", description="Planar set differential equations D_H X = A X.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="one trajectory to CSV")
    p.add_argument("--body", required=True, help="body JSON (file or inline)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--m", type=int, default=4, help="rotation by 2 pi / m (default)")
    g.add_argument("--angle", type=float, help="rotation angle in radians")
    g.add_argument("--operator", help="operator JSON (file or inline)")
    p.add_argument("--integrator", choices=["spectral", "rk4", "picard"], default="spectral")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10, help="number of output intervals on [0, T]")
    p.add_argument("--times", type=float, nargs="+", help="explicit output times")
    p.add_argument("--modes", type=int, default=0, help="number of |H_p| columns")
    p.add_argument("--out", help="CSV path (default stdout)")
    _add_grid(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("metric", help="shape metric and deficit of two bodies")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--out")
    _add_grid(p)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("spectrum", help="eigenvalues of the comparison matrix")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("closed-form", help="mixed area S[X(t), X*(t)] from initial data")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--t", type=float, nargs="+", required=True)
    p.add_argument("--geometric", action="store_true", help="also simulate the bodies")
    p.add_argument("--out")
    _add_grid(p)
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("experiment", help="stability, attraction or probe experiment")
    p.add_argument("kind", choices=["stability", "attraction", "probe"])
    p.add_argument("--config", required=True, help="config JSON (file or inline)")
    p.add_argument("--out", help="records CSV (overrides config output)")
    p.add_argument("--summary", help="summary JSON path")
    p.add_argument("--allow-outside", action="store_true", help="attraction: accept perturbations outside the manifold")
    p.set_defaults(func=cmd_experiment)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (InvalidInput, SetFlowError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
