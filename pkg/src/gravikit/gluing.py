"""Cutoffs, the comparison 1-forms sigma and the glued definite triple.

Around each singularity s the triple is

    r < R0         the model (rescaled Taub-NUT at p, asymptotic AH at q)
    R0 <= r < R1   omega^s + d(chi sigma^s) = omega^s + dchi ^ sigma + chi (omega^GH - omega^s)
    r >= R1        omega^GH

with chi a smoothstep in log r, so r |d chi/dr| does not depend on eps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .connection import GaugeChart, bulk_chart, eta_tilde_sing, infinity_chart
from .errors import ConfigError
from .forms import LEVI3, embed_base_2form, wedge11
from .gh_triple import ah_model_triple, gh_triple_eval, model_data, model_triple, scaled_tn_triple
from .quadrature import integrate

PROFILES = ("cubic", "quintic", "septic")


def smoothstep(u, profile="quintic"):
    u = np.clip(np.asarray(u, float), 0.0, 1.0)
    if profile == "cubic":
        return u * u * (3 - 2 * u)
    if profile == "quintic":
        return u**3 * (10 - 15 * u + 6 * u * u)
    if profile == "septic":
        return u**4 * (35 - 84 * u + 70 * u * u - 20 * u**3)
    raise ValueError(f"unknown smoothstep profile {profile!r}")


def smoothstep_derivative(u, profile="quintic"):
    u = np.asarray(u, float)
    inside = (u > 0) & (u < 1)
    uc = np.clip(u, 0.0, 1.0)
    if profile == "cubic":
        d = 6 * uc * (1 - uc)
    elif profile == "quintic":
        d = 30 * uc**2 * (1 - uc) ** 2
    elif profile == "septic":
        d = 140 * uc**3 * (1 - uc) ** 3
    else:
        raise ValueError(f"unknown smoothstep profile {profile!r}")
    return np.where(inside, d, 0.0)


@dataclass(frozen=True)
class GluingParams:
    """Gluing radii; R0 and R1 default to 4 eps^(2/5) and 5 eps^(2/5)."""

    epsilon: float
    R0: float | None = None
    R1: float | None = None
    profile: str = "quintic"
    R_asymptotic: float = math.inf

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive (got {self.epsilon})")
        if self.R0 is None:
            object.__setattr__(self, "R0", 4 * self.epsilon**0.4)
        if self.R1 is None:
            object.__setattr__(self, "R1", 5 * self.epsilon**0.4)
        if not self.R0 < self.R1:
            raise ConfigError(f"need R0 < R1 (got {self.R0}, {self.R1})")
        if not self.R0 > 4 * self.epsilon:
            raise ConfigError(f"need R0 > 4 eps = {4 * self.epsilon}")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown cutoff profile {self.profile!r}")


def cutoff(r, params: GluingParams):
    """chi(r) = s(log(r/R0) / log(R1/R0)): 0 for r <= R0, 1 for r >= R1."""
    u = np.log(np.asarray(r, float) / params.R0) / math.log(params.R1 / params.R0)
    return smoothstep(u, params.profile)


def cutoff_derivative(r, params: GluingParams):
    r = np.asarray(r, float)
    L = math.log(params.R1 / params.R0)
    u = np.log(r / params.R0) / L
    return smoothstep_derivative(u, params.profile) / (r * L)


# -- comparison forms -------------------------------------------------------------


def sigma_gh(data, s, epsilon, x, center=None, **quad):
    """Radial primitive (about s) of omega^GH - omega^s, shape (..., 3, 4).

    With g = h - h^s the nested radial integrals collapse to
        sigma_i = eps [X_i (J1 x X) + J0 (e_i x X)],
        J1 = int_0^1 t(1-t) grad g(c + tX) dt,  J0 = int_0^1 t g(c + tX) dt.
    """
    s = data.singularity(s)
    c = s.center if center is None else np.asarray(center, float)
    xs = np.asarray(x, float)
    shape = xs.shape[:-1]
    X = xs.reshape(-1, 3) - c
    alpha = data.alpha(s)

    def integrand(t):
        pts = (c + t[:, None, None] * X[None]).reshape(-1, 3)
        gv = (data.h_regular(s, pts, center=c) - alpha).reshape(t.size, -1)
        gg = data.grad_h_regular(s, pts, center=c).reshape(t.size, -1, 3)
        part1 = (t * (1 - t))[:, None, None] * gg
        part0 = (t[:, None] * gv)[..., None]
        return np.concatenate([part1, part0], axis=-1)

    J = integrate(integrand, 0.0, 1.0, **quad)
    J1, J0 = J[:, :3], J[:, 3]
    first = X[:, :, None] * np.cross(J1, X)[:, None, :]
    second = J0[:, None, None] * np.cross(np.eye(3)[None], X[:, None, :])
    sigma = np.zeros(X.shape[:1] + (3, 4))
    sigma[..., :3] = epsilon * (first + second)
    return sigma.reshape(shape + (3, 4))


def gh_minus_model(data, s, epsilon, x, center=None, **quad):
    """omega^GH - omega^s = eps dx_i ^ eta_tilde + eps g *dx_i, evaluated without cancellation."""
    s = data.singularity(s)
    c = s.center if center is None else np.asarray(center, float)
    X = np.asarray(x, float)
    et = eta_tilde_sing(data, s, X, center=c, **quad)
    g = data.h_regular(s, X, center=c) - data.alpha(s)
    dx = np.broadcast_to(np.eye(4)[:3], et.shape[:-1] + (3, 4))
    wedge = wedge11(dx, et[..., None, :])
    star = embed_base_2form(LEVI3)
    return epsilon * (wedge + g[..., None, None, None] * star)


def _annulus_terms(data, s, epsilon, x, center, **quad):
    """(sigma, omega^GH - omega^s) from one pass of ray integrals.

    The three radial integrals share the nodes, so h and grad h are summed once
    per node: int t grad g, int t(1-t) grad g and int t g.
    """
    c = np.asarray(center, float)
    xs = np.asarray(x, float)
    shape = xs.shape[:-1]
    X = xs.reshape(-1, 3) - c
    alpha = data.alpha(s)
    quad.setdefault("n0", 8)

    def integrand(t):
        pts = (c + t[:, None, None] * X[None]).reshape(-1, 3)
        gv, gg = data.h_and_grad_regular(s, pts, center=c)
        gv = (gv - alpha).reshape(t.size, -1)
        gg = gg.reshape(t.size, -1, 3)
        return np.concatenate(
            [t[:, None, None] * gg, (t * (1 - t))[:, None, None] * gg, (t[:, None] * gv)[..., None]], axis=-1
        )

    J = integrate(integrand, 0.0, 1.0, **quad)
    Jeta, J1, J0 = J[:, :3], J[:, 3:6], J[:, 6]
    sigma = np.zeros(X.shape[:1] + (3, 4))
    sigma[..., :3] = epsilon * (
        X[:, :, None] * np.cross(J1, X)[:, None, :] + J0[:, None, None] * np.cross(np.eye(3)[None], X[:, None, :])
    )
    et = np.zeros(X.shape[:1] + (4,))
    et[:, :3] = np.cross(Jeta, X)
    g = data.h_regular(s, X + c, center=c) - alpha
    dx = np.broadcast_to(np.eye(4)[:3], et.shape[:-1] + (3, 4))
    diff = epsilon * (wedge11(dx, et[..., None, :]) + g[..., None, None, None] * embed_base_2form(LEVI3))
    return sigma.reshape(shape + (3, 4)), diff.reshape(shape + (3, 4, 4))


# -- regions ----------------------------------------------------------------------


@dataclass(frozen=True)
class RegionTag:
    kind: str
    singularity: str | None = None
    radius: float = math.inf


def _nearest(data_or_scene, x):
    sings = data_or_scene.singularities
    sings = sings() if callable(sings) else sings
    lattice = data_or_scene.lattice if hasattr(data_or_scene, "lattice") else data_or_scene.scene.lattice
    d = np.array([lattice.distance(x, s.center) for s in sings])
    i = int(np.argmin(d))
    return sings[i], float(d[i])


def region_classify(scene, params: GluingParams, x) -> RegionTag:
    """Nearest-singularity radius against R0/R1; asymptotic beyond R_asymptotic."""
    s, r = _nearest(scene, np.asarray(x, float))
    if r < params.R0:
        return RegionTag("model_core", s.name, r)
    if r < params.R1:
        return RegionTag("gluing_annulus", s.name, r)
    lattice = scene.lattice
    if float(lattice.far_coordinate(np.asarray(x, float))) >= params.R_asymptotic:
        return RegionTag("asymptotic", None, r)
    return RegionTag("bulk", None, r)


def chart_for(data, params: GluingParams, x, hemisphere="north") -> GaugeChart:
    """A chart suitable for ``assembled_triple`` at x (nearest image as centre)."""
    tag = region_classify(data, params, x)
    if tag.kind in ("model_core", "gluing_annulus"):
        s = data.singularity(tag.singularity)
        X = np.asarray(x, float)
        images = s.center + data.lattice.translates(1)
        c = images[int(np.argmin(np.linalg.norm(images - X, axis=-1)))]
        return GaugeChart(c, hemisphere, data.lattice.transverse_axis, "singular", s, data.model_radius(s))
    if tag.kind == "asymptotic":
        return infinity_chart(data, hemisphere)
    return bulk_chart(data, np.asarray(x, float) + 0.05 * data.lattice.transverse_axis)


def assembled_triple(data, params: GluingParams, chart: GaugeChart, x, **quad):
    """The glued triple at x (all points must lie in the same region)."""
    if not math.isclose(data.epsilon, params.epsilon, rel_tol=0, abs_tol=0):
        data = data.with_epsilon(params.epsilon)
    eps = params.epsilon
    X = np.asarray(x, float)
    pts = X.reshape(-1, 3)
    tags = [region_classify(data, params, p) for p in pts]
    kinds = {(t.kind, t.singularity) for t in tags}
    if len(kinds) != 1:
        raise ValueError("assembled_triple expects points from a single region")
    kind, name = kinds.pop()
    if kind in ("bulk", "asymptotic"):
        return gh_triple_eval(data, chart, X)
    s = data.singularity(name)
    if chart.kind != "singular" or chart.singularity is None or chart.singularity.name != s.name:
        raise ValueError(f"region {kind} of {s.name} needs a singular chart about it")
    model = model_data(data, s)
    if kind == "model_core":
        if s.kind == "p":
            return scaled_tn_triple(eps, model.alpha, chart, X)
        return ah_model_triple(eps, model.alpha, chart, X)
    # gluing annulus
    D = X - chart.center
    r = np.linalg.norm(D, axis=-1)
    chi = cutoff(r, params)
    dchi = embed_base_1form_radial(cutoff_derivative(r, params), D, r)
    sigma, diff = _annulus_terms(data, s, eps, X, chart.center, **quad)
    base = model_triple(model, eps, chart, X)
    return base + wedge11(dchi[..., None, :], sigma) + chi[..., None, None, None] * diff


def embed_base_1form_radial(dchi_dr, D, r):
    out = np.zeros(D.shape[:-1] + (4,))
    out[..., :3] = (dchi_dr / r)[..., None] * D
    return out
