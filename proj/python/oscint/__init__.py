"""Neural and Newton-Cotes integration of oscillatory functions."""

from ._core import (
    OscintError,
    alpha,
    bessel_j0,
    build_dataset,
    cli,
    eval,
    flop_cost,
    integrate,
    integrate_values,
    make_grid,
    memory_bytes,
    nn_flops,
    normalized_mse,
    rp_solve,
    surrogate_truth,
    train,
)

__all__ = [
    "OscintError",
    "alpha",
    "bessel_j0",
    "build_dataset",
    "cli",
    "eval",
    "flop_cost",
    "integrate",
    "integrate_values",
    "make_grid",
    "memory_bytes",
    "nn_flops",
    "normalized_mse",
    "rp_solve",
    "surrogate_truth",
    "train",
]
