"""Planar convex bodies evolving under ``D_H X = A X``.

Submodules
----------
body2d   support-function representation and Minkowski operations
geomfun  areas, mixed areas, deficits, radii and the shape metric
sde      spectral, RK4 and Picard solvers
compsys  comparison system for cross mixed areas
lab      experiment harness
"""

from .body2d import Body2D, Interval1D, LinearOp2, apply_op, disk, from_fourier, from_polygon
from .body2d import minkowski_sum, scale_translate
from .errors import InvalidInput, InvariantViolation, SetFlowError
from .geomfun import area, deficit, hausdorff, inradius_circumradius, mixed_area, shape_metric
from .sde import evolve, solve_rk4, solve_spectral

__version__ = "0.1.0"

__all__ = [
    "Body2D",
    "Interval1D",
    "LinearOp2",
    "apply_op",
    "disk",
    "from_fourier",
    "from_polygon",
    "minkowski_sum",
    "scale_translate",
    "InvalidInput",
    "InvariantViolation",
    "SetFlowError",
    "area",
    "deficit",
    "hausdorff",
    "inradius_circumradius",
    "mixed_area",
    "shape_metric",
    "evolve",
    "solve_rk4",
    "solve_spectral",
]
