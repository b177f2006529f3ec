"""Global conformal weight Omega, radial weight rho and the asymptotic weight phi.

    rescaled core (r_TN or r_AH < R3)    Omega = sqrt(1 + eps alpha)/eps,  rho = log(eps R3/(1 + eps alpha))
    model annulus (up to r = R2)         Omega = r^-1 (h_eps^s)^-1/2,       rho = log r
    bulk                                 Omega = 1,                          rho = 1
    asymptotic end                       Omega = h_eps^-1/2 (rank 2) or r^-1 h_eps^-1/2,
                                         rho = r (rank 2) or log r,   phi = rho

phi vanishes away from the end. Neighbouring pieces are blended with a
quintic smoothstep in log r over collars [R, collar R]; Omega is blended
geometrically so it stays positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..gluing import smoothstep


@dataclass(frozen=True)
class WeightParams:
    R2: float | None = None
    R3: float = 20.0
    R_asymptotic: float | None = None
    collar: float = 2.0


def default_R2(data) -> float:
    return 0.45 * min(data.model_radius(s) for s in data.singularities)


def default_R_asymptotic(data) -> float:
    lat = data.lattice
    extent = max(float(lat.far_coordinate(s.center)) for s in data.singularities)
    return 2.0 * extent + 2.0 * data.scene.length_scale


def _blend(a, b, t):
    """(Omega, rho, phi) tuples: geometric in Omega, linear in rho and phi."""
    om = np.exp((1 - t) * np.log(a[0]) + t * np.log(b[0]))
    return om, (1 - t) * a[1] + t * b[1], (1 - t) * a[2] + t * b[2]


def _step(r, R, collar):
    return smoothstep(np.log(np.asarray(r, float) / R) / math.log(collar))


def global_weights(data, params, x, weights: WeightParams = WeightParams()):
    """(Omega, rho, phi) at x; ``params`` is a GluingParams (supplies eps)."""
    X = np.asarray(x, float)
    shape = X.shape[:-1]
    pts = X.reshape(-1, 3)
    eps = params.epsilon
    lat = data.lattice
    R2 = default_R2(data) if weights.R2 is None else weights.R2
    Ras = default_R_asymptotic(data) if weights.R_asymptotic is None else weights.R_asymptotic
    c = weights.collar

    dists = np.array([lat.distance(pts, s.center) for s in data.singularities])
    near = np.argmin(dists, axis=0)
    r = dists[near, np.arange(len(pts))]
    alpha = np.array([data.alpha(s) for s in data.singularities])[near]
    k = np.array([s.charge for s in data.singularities], float)[near]

    one = np.ones_like(r)
    core = (np.sqrt(1 + eps * alpha) / eps, np.log(eps * weights.R3 / (1 + eps * alpha)) * one, 0 * one)
    h_model = 1 + eps * (alpha + k / (2 * r))
    with np.errstate(invalid="ignore"):
        annulus = (1 / (r * np.sqrt(h_model)), np.log(r), 0 * one)
    bulk = (one, one, 0 * one)

    r_core = eps * weights.R3 / (1 + eps * alpha)
    t_core = _step(r, r_core, c)
    # inside the core h_model may be negative (q); the annulus values are unused there
    annulus = tuple(np.where(t_core > 0, a, b) for a, b in zip(annulus, core))
    w = _blend(core, annulus, t_core)
    w = _blend(w, bulk, _step(r, R2, c))

    R = lat.far_coordinate(pts)
    t_far = _step(np.maximum(R, 1e-300), Ras, c)
    if np.any(t_far > 0):
        H = data.h_eps(pts[t_far > 0])
        Rf = R[t_far > 0]
        far_om = np.ones_like(R)
        far_rho = np.ones_like(R)
        if lat.rank == 2:
            far_om[t_far > 0] = 1 / np.sqrt(H)
            far_rho[t_far > 0] = Rf
        else:
            far_om[t_far > 0] = 1 / (Rf * np.sqrt(H))
            far_rho[t_far > 0] = np.log(Rf)
        w = _blend(w, (far_om, far_rho, far_rho), t_far)
    return tuple(np.asarray(v).reshape(shape) for v in w)
