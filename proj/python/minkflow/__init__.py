"""Support-function flows of convex bodies and an L_p Minkowski solver."""

from ._core import (
    Body,
    Error,
    Grid,
    flow,
    lp_residual,
    lp_solve,
    manufactured_phi,
    read_body,
    verify,
    write_body,
)

TRAJECTORY_COLUMNS = ("t", "dt", "eta", "J", "Z0", "residual", "lambda_min", "u_min", "u_max")

__all__ = [
    "Body",
    "Error",
    "Grid",
    "TRAJECTORY_COLUMNS",
    "flow",
    "lp_residual",
    "lp_solve",
    "manufactured_phi",
    "read_body",
    "verify",
    "write_body",
]
