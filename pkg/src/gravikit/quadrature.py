"""Gauss-Legendre rules with order doubling, and sphere/torus grids."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureNotConverged


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def integrate(fun, a=0.0, b=1.0, rtol=1e-11, atol=1e-15, n0=16, nmax=1024):
    """Integral over [a, b] of a vector-valued ``fun``.

    ``fun`` takes an array of nodes (M,) and returns (M, ...). The order is
    doubled until two consecutive rules agree to max(atol, rtol * |I|).
    """
    prev = None
    err = np.inf
    n = n0
    while n <= nmax:
        t, w = gauss_legendre(n)
        nodes = a + (b - a) * t
        vals = np.asarray(fun(nodes))
        cur = (b - a) * np.tensordot(w, vals, axes=(0, 0))
        if prev is not None:
            err = np.max(np.abs(cur - prev), initial=0.0)
            scale = np.max(np.abs(cur), initial=0.0)
            if err <= max(atol, rtol * scale):
                return cur
        prev = cur
        n *= 2
    raise QuadratureNotConverged(f"Gauss-Legendre did not converge with {nmax} nodes (last change {err:.3g})")


def sphere_grid(n_theta: int = 32, n_phi: int = 64):
    """Unit normals and area weights: Gauss-Legendre in cos(theta), trapezoid in phi.

    Exact for spherical harmonics of degree < min(2 n_theta, n_phi).
    """
    u, w = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    ct = np.repeat(u, n_phi)
    st = np.sqrt(1 - ct**2)
    ph = np.tile(phi, n_theta)
    normals = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1)
    weights = np.repeat(w, n_phi) * (2 * np.pi / n_phi)
    return normals, weights


def periodic_grid(n: int):
    """Trapezoid nodes in [0, 1) with equal weights (spectral for periodic integrands)."""
    return np.arange(n) / n, np.full(n, 1.0 / n)
