"""Finite-difference residuals: the Laplacian of h and the exterior derivative
of triples."""

from __future__ import annotations

import numpy as np

from ..errors import StencilCrossesSeam, TooCloseToSingularity
from ..forms import d_of_2form_fd


def _stencil(x, step):
    x = np.asarray(x, float).reshape(-1, 3)
    offsets = np.concatenate([np.zeros((1, 3)), step * np.eye(3), -step * np.eye(3)])
    return x[:, None, :] + offsets[None]


def laplacian_fd(fun, x, step):
    """7-point stencil (sum of 6 neighbours - 6 f(x)) / step^2 for a scalar field."""
    pts = _stencil(x, step)
    vals = np.asarray(fun(pts.reshape(-1, 3))).reshape(pts.shape[:2])
    return (vals[:, 1:].sum(axis=1) - 6 * vals[:, 0]) / step**2


def laplacian_residual(data, x, step):
    """|Delta h| by the 7-point stencil; x must be > 10 step from every singularity."""
    X = np.asarray(x, float)
    d = np.min([data.lattice.distance(X, s.center) for s in data.singularities], axis=0)
    if np.any(d <= 10 * step):
        raise TooCloseToSingularity(f"point within 10 steps ({10 * step:g}) of a singularity")
    res = np.abs(laplacian_fd(data.h, X, step))
    return res.reshape(X.shape[:-1])


def fourth_derivative_scale(data, x):
    """Sum over singularities of (|k|/2) 24/d^5: the size of the fourth
    derivatives of the pole terms of h, which set the stencil error."""
    X = np.asarray(x, float)
    total = 0.0
    for s in data.singularities:
        d = data.lattice.distance(X, s.center)
        total = total + 0.5 * abs(s.charge) * 24.0 / d**5
    return total


def closedness_residual(triple_field, chart, x, step, regions=None):
    """max_i of the Euclidean norm of the FD 3-form d omega_i (4 components).

    ``triple_field`` maps points (N, 3) to (N, 3, 4, 4). If ``regions`` (a map
    from a point to a hashable region label) is given, a stencil touching two
    regions raises StencilCrossesSeam.
    """
    X = np.asarray(x, float).reshape(-1, 3)
    if chart is not None:
        chart.require(_stencil(X, step).reshape(-1, 3))
    if regions is not None:
        for pts in _stencil(X, step):
            if len({regions(p) for p in pts}) > 1:
                raise StencilCrossesSeam("finite-difference stencil straddles a region boundary")
    d = d_of_2form_fd(triple_field, X, step)  # (N, 3, 4)
    res = np.max(np.linalg.norm(d, axis=-1), axis=-1)
    return res.reshape(np.asarray(x).shape[:-1])
