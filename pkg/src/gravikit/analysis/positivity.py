"""Positivity of eps^-1 + h away from 4 eps-balls about the fixed points."""

from __future__ import annotations

import math

import numpy as np

from ..quadrature import sphere_grid


def base_grid(data, n=24, extent=None):
    """Deterministic grid covering a fundamental region of B out to ``extent``."""
    lat = data.lattice
    if extent is None:
        far = max(float(lat.far_coordinate(s.center)) for s in data.singularities)
        extent = 2.0 * far + 1.0
    line = np.linspace(-extent, extent, n)
    cell = (np.arange(n) + 0.5) / n - 0.5
    if lat.rank == 0:
        g = np.stack(np.meshgrid(line, line, line, indexing="ij"), -1).reshape(-1, 3)
        return g
    e1 = lat.transverse_axis
    if lat.rank == 1:
        e2 = np.cross(lat.axis, e1)
        a, b, s = np.meshgrid(line, line, cell, indexing="ij")
        return a.reshape(-1, 1) * e1 + b.reshape(-1, 1) * e2 + s.reshape(-1, 1) * lat.generators[0]
    s1, s2, z = np.meshgrid(cell, cell, line, indexing="ij")
    v1, v2 = lat.generators
    return s1.reshape(-1, 1) * v1 + s2.reshape(-1, 1) * v2 + z.reshape(-1, 1) * lat.axis


def _q_points(data):
    return [s for s in data.singularities if s.kind == "q"]


def positivity_threshold(data, grid=None):
    """Largest eps for which eps^-1 + h > 1/2 is guaranteed on the sampled region.

    Away from the fixed points the grid minimum of h is used. Inside a ball of
    radius r_cut about q, h = alpha - 2/r + g with g harmonic, so on r >= 4 eps
    eps^-1 + h >= eps^-1/2 + alpha - max|g|, the maximum taken on the sphere r_cut.
    """
    grid = base_grid(data) if grid is None else grid
    qs = _q_points(data)
    r_cut = 0.25 * min(data.model_radius(q) for q in qs)
    dq = np.min([data.lattice.distance(grid, q.center) for q in qs], axis=0)
    dall = np.min([data.lattice.distance(grid, s.center) for s in data.singularities], axis=0)
    keep = (dq >= r_cut) & (dall > 1e-9)
    h_min = float(np.min(data.h(grid[keep])))
    bounds = [1.0 / (0.5 - h_min) if h_min < 0.5 else math.inf]
    normals, _ = sphere_grid(16, 32)
    for q in qs:
        g = data.g_difference(q, q.center + r_cut * normals)
        a = data.alpha(q) - float(np.max(np.abs(g)))
        bounds.append(1.0 / (1.0 - 2.0 * a) if a < 0.5 else math.inf)
    return min(bounds)


def positivity_min(data, epsilon, grid=None, shells=12):
    """min of eps^-1 + h over the grid plus spheres about each q at radii >= 4 eps."""
    return positivity_scan(data, [epsilon], grid, shells)[0]


def positivity_scan(data, epsilons, grid=None, shells=12):
    """positivity_min for several eps, summing h on the grid only once."""
    grid = base_grid(data) if grid is None else grid
    lat = data.lattice
    qs = _q_points(data)
    dq_grid = np.min([lat.distance(grid, q.center) for q in qs], axis=0)
    dall = np.min([lat.distance(grid, s.center) for s in data.singularities], axis=0)
    keep = dall > 1e-9
    h_grid = np.full(len(grid), np.inf)
    h_grid[keep] = data.h(grid[keep])
    normals, _ = sphere_grid(12, 24)
    out = []
    for epsilon in epsilons:
        grid_min = float(np.min(h_grid[dq_grid > 4 * epsilon], initial=np.inf))
        pts = []
        for q in qs:
            R = 0.5 * data.model_radius(q)
            for r in np.geomspace(4 * epsilon * (1 + 1e-12), max(R, 8 * epsilon), shells):
                pts.append(q.center + r * normals)
        pts = np.concatenate(pts)
        # shells about one q may reach into the excised ball of another
        dq = np.min([lat.distance(pts, q.center) for q in qs], axis=0)
        pts = pts[dq >= 4 * epsilon]
        out.append(float(1.0 / epsilon + min(grid_min, float(np.min(data.h(pts))))))
    return out
