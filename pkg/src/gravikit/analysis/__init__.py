"""Numerical verification: quadrature, finite differences, fits, sweeps and
the pointwise algebra of triples."""

from ..fits import FitResult, decay_fit, linear_fit
from .algebra import f0_from_triple, lambda_apply, lambda_solve, tf, wedge_coefficients
from .fd import closedness_residual, fourth_derivative_scale, laplacian_fd, laplacian_residual
from .flux import QuadratureSpec, Sphere, TorusSlice, flux
from .positivity import base_grid, positivity_min, positivity_scan, positivity_threshold
from .sweeps import annulus_points, f0_sweep, gram_error_sweep, worker_count
from .weights import WeightParams, global_weights


def f0(data, params, chart, x):
    """F(0) of the assembled triple at x, with Omega from the global weights."""
    from ..gluing import assembled_triple

    T = assembled_triple(data, params, chart, x)
    om, _, _ = global_weights(data.with_epsilon(params.epsilon), params, x)
    return f0_from_triple(T, om)


__all__ = [
    "FitResult", "QuadratureSpec", "Sphere", "TorusSlice", "WeightParams",
    "annulus_points", "base_grid", "closedness_residual", "decay_fit", "f0", "f0_from_triple",
    "f0_sweep", "flux", "fourth_derivative_scale", "global_weights", "gram_error_sweep",
    "lambda_apply", "lambda_solve", "laplacian_fd", "laplacian_residual", "linear_fit",
    "positivity_min", "positivity_scan", "positivity_threshold", "tf", "wedge_coefficients", "worker_count",
]
