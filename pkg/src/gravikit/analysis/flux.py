"""Flux integrals -(1/2pi) of *dh over closed surfaces in the base."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import AtSingularity, QuadratureNotConverged
from ..quadrature import periodic_grid, sphere_grid


@dataclass(frozen=True)
class QuadratureSpec:
    """Sphere: Gauss-Legendre order in theta and trapezoid points in phi.
    Torus: trapezoid points per circle."""

    sphere: tuple[int, int] = (24, 48)
    torus: int = 48
    tolerance: float = 1e-10

    def __post_init__(self):
        if min(self.sphere) < 8 or self.torus < 8:
            raise ValueError("quadrature orders must be >= 8")


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float


@dataclass(frozen=True)
class TorusSlice:
    """The end surface at far coordinate ``coordinate``: a torus rho = const
    (rank 1) or a cell of the plane z = const (rank 2), oriented as the boundary
    of the end region beyond it."""

    coordinate: float


def _sphere_flux(data, surface: Sphere, n_theta, n_phi):
    normals, w = sphere_grid(n_theta, n_phi)
    c = np.asarray(surface.center, float)
    pts = c + surface.radius * normals
    d = np.min([data.lattice.distance(pts, s.center) for s in data.singularities], axis=0)
    if np.any(d < 1e-9 * surface.radius):
        raise AtSingularity("flux surface passes through a singularity")
    grad = data.grad_h(pts)
    # outward normal; *dh integrated = int grad h . n dA
    total = surface.radius**2 * np.sum(w * np.einsum("ij,ij->i", grad, normals))
    return -total / (2 * math.pi)


def _torus_flux(data, surface: TorusSlice, n):
    lat = data.lattice
    u = lat.axis
    t, w = periodic_grid(n)
    if lat.rank == 2:
        v1, v2 = lat.generators
        s1, s2 = np.meshgrid(t, t, indexing="ij")
        pts = surface.coordinate * u + s1.reshape(-1, 1) * v1 + s2.reshape(-1, 1) * v2
        weights = np.outer(w, w).reshape(-1) * lat.cell_measure
        normal = -np.sign(surface.coordinate) * u  # out of the end region
        grad = data.grad_h(pts)
        return -np.sum(weights * (grad @ normal)) / (2 * math.pi)
    if lat.rank == 1:
        e1 = lat.transverse_axis
        e2 = np.cross(u, e1)
        phi, s = np.meshgrid(2 * math.pi * t, t, indexing="ij")
        radial = np.cos(phi).reshape(-1, 1) * e1 + np.sin(phi).reshape(-1, 1) * e2
        pts = surface.coordinate * radial + s.reshape(-1, 1) * lat.generators[0]
        weights = np.outer(w, w).reshape(-1) * 2 * math.pi * surface.coordinate * lat.cell_measure
        grad = data.grad_h(pts)
        return -np.sum(weights * np.einsum("ij,ij->i", grad, -radial)) / (2 * math.pi)
    raise ValueError("torus slices need a lattice of rank 1 or 2")


def flux(data, surface, spec: QuadratureSpec = QuadratureSpec()):
    """-(1/2pi) int *dh over a sphere or an end torus; the order is doubled once
    and the two results must agree to spec.tolerance."""
    if isinstance(surface, Sphere):
        nt, nph = spec.sphere
        a = _sphere_flux(data, surface, nt, nph)
        b = _sphere_flux(data, surface, 2 * nt, 2 * nph)
    elif isinstance(surface, TorusSlice):
        a = _torus_flux(data, surface, spec.torus)
        b = _torus_flux(data, surface, 2 * spec.torus)
    else:
        raise TypeError(f"unsupported surface {surface!r}")
    if abs(a - b) > spec.tolerance:
        raise QuadratureNotConverged(f"flux changed by {abs(a - b):.3g} under refinement")
    return float(b)
