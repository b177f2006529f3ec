"""Slow reference evaluations used to validate the accelerated lattice sums.

These share no code with ``greens.lattice_sums``: the rank-1 oracle is a
plain symmetric image sum extrapolated in the truncation order, and the
rank-2 oracle sums closed-form potentials of parallel lattice lines.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special


def line_image_sum(v, x, orders=(2000, 4000, 8000, 16000, 32000)):
    """Regularized image sum for a rank-1 lattice generated by ``v``.

    S_N = sum_{|n|<=N} 1/(2|x - n v|) - log(2 N a)/a, extrapolated to N -> oo
    by polynomial (Neville) extrapolation in 1/N. The log counterterm makes
    S_N converge to the Green's function normalized so that G + log(rho)/a -> 0.
    """
    v = np.asarray(v, float)
    x = np.asarray(x, float)
    a = float(np.linalg.norm(v))
    N_max = max(orders)
    n = np.arange(-N_max, N_max + 1)
    d = np.linalg.norm(x[None, :] - n[:, None] * v[None, :], axis=1)
    terms = 0.5 / d
    h, vals = [], []
    for N in orders:
        sel = np.abs(n) <= N
        # sum from the smallest terms up for accuracy
        s = math.fsum(np.sort(terms[sel]))
        h.append(1.0 / N)
        vals.append(s - math.log(2 * N * a) / a)
    return _neville_at_zero(h, vals)


def _neville_at_zero(h, vals):
    p = list(vals)
    m = len(h)
    for k in range(1, m):
        for i in range(m - k):
            p[i] = (h[i] * p[i + 1] - h[i + k] * p[i]) / (h[i] - h[i + k])
    return p[0]


def plane_line_sum(a, b, x, lines=60, terms=40):
    """Green's function of the rectangular lattice a e_1 Z + b e_2 Z (normal e_3).

    Summing the rank-1 Green's functions of the lines {y = m b, z = 0} gives
    -(1/a) log|2 sin(pi (y + i z)/b)| + (2/a) sum_m sum_k K0(k rho_m) cos(k x_1),
    which already satisfies G + (pi/A)|z| -> 0. Requires every transverse
    distance rho_m to be bounded below (the Bessel series is slow near a line).
    """
    x = np.asarray(x, float)
    s, y, z = x
    xr = math.pi * y / b
    yr = math.pi * z / b
    log_part = -0.5 * math.log(4 * (math.sin(xr) ** 2 + math.sinh(yr) ** 2)) / a
    m = np.arange(-lines, lines + 1)
    rho = np.hypot(y - m * b, z)
    k = 2 * math.pi * np.arange(1, terms + 1) / a
    bessel = special.k0(np.outer(rho, k)) * np.cos(k * s)[None, :]
    return log_part + 2 / a * math.fsum(bessel.ravel())
