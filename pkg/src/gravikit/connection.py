"""Connection 1-forms eta = dpsi + A with dA = *dh.

Three kinds of charts are used:

* ``singular``: a hemisphere patch about a singularity s. There
  A = A_monopole(k_s) + eta_tilde^s, where eta_tilde^s is the radial
  primitive of *d(h - h^s) centred at s.
* ``bulk``: a ball free of singularities, with the straight-line primitive
  of *dh anchored at the chart centre.
* ``infinity``: the asymptotic end, with A = A_far + eta_tilde^infinity,
  A_far a primitive of *d(leading far-field term).

All 1-forms are arrays (..., 4) in the coframe (dx1, dx2, dx3, dpsi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AtSingularity, OnDiracString
from .forms import base_star_vector, embed_base_1form
from .geometry import Singularity
from .quadrature import integrate

# half-width of the hemisphere overlap band, as a fraction of pi/2
OVERLAP = 0.1


@dataclass(frozen=True, eq=False)
class GaugeChart:
    """A local trivialisation of the circle bundle.

    ``axis`` carries the Dirac strings: the north patch omits the ray
    antiparallel to it, the south patch the ray parallel to it.
    """

    center: np.ndarray
    hemisphere: str = "north"
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    kind: str = "singular"
    singularity: Singularity | None = None
    radius: float = math.inf
    overlap: float = OVERLAP

    def __post_init__(self):
        if self.hemisphere not in ("north", "south"):
            raise ValueError(f"hemisphere must be 'north' or 'south', got {self.hemisphere!r}")
        if self.kind not in ("singular", "bulk", "infinity"):
            raise ValueError(f"unknown chart kind {self.kind!r}")
        object.__setattr__(self, "center", np.array(self.center, float))
        ax = np.array(self.axis, float)
        object.__setattr__(self, "axis", ax / np.linalg.norm(ax))

    @property
    def sign(self) -> float:
        return 1.0 if self.hemisphere == "north" else -1.0

    def cos_theta(self, x):
        X = np.asarray(x, float) - self.center
        return (X @ self.axis) / np.linalg.norm(X, axis=-1)

    def in_domain(self, x):
        """Boolean mask: inside the hemisphere band and the chart radius."""
        X = np.asarray(x, float) - self.center
        r = np.linalg.norm(X, axis=-1)
        if self.kind == "bulk":
            return r < self.radius
        with np.errstate(invalid="ignore", divide="ignore"):
            ct = (X @ self.axis) / r
        bound = -math.sin(0.5 * math.pi * self.overlap)
        ok = self.sign * ct > bound
        if self.kind == "singular":
            ok &= r < self.radius
        return ok & (r > 0)

    def require(self, x):
        mask = np.atleast_1d(self.in_domain(x))
        if not np.all(mask):
            raise OnDiracString(
                f"{int(np.sum(~mask))} point(s) outside the {self.hemisphere} {self.kind} chart about "
                f"{self.center.tolist()}"
            )

    def opposite(self) -> "GaugeChart":
        return replace(self, hemisphere="south" if self.hemisphere == "north" else "north")


def singular_chart(data, s, hemisphere="north", radius=None) -> GaugeChart:
    s = data.singularity(s)
    R = data.model_radius(s) if radius is None else radius
    return GaugeChart(s.center, hemisphere, data.lattice.transverse_axis, "singular", s, R)


def bulk_chart(data, anchor, radius=math.inf) -> GaugeChart:
    return GaugeChart(anchor, "north", data.lattice.transverse_axis, "bulk", None, radius)


def infinity_chart(data, hemisphere="north") -> GaugeChart:
    return GaugeChart(np.zeros(3), hemisphere, data.lattice.transverse_axis, "infinity")


# -- monopole -------------------------------------------------------------------


def monopole_potential(m, center, chart: GaugeChart, x):
    """Dirac monopole of flux m about ``center`` in the chart's hemisphere gauge.

    A_N = -(m/2)(1 - cos theta) dphi and A_S = +(m/2)(1 + cos theta) dphi,
    so that -(1/2pi) times the integral of dA over a sphere is m.
    """
    X = np.asarray(x, float) - np.asarray(center, float)
    n = chart.axis
    r = np.linalg.norm(X, axis=-1)
    along = X @ n
    if chart.hemisphere == "north":
        denom = r * (r + along)
        coef = -0.5 * m
    else:
        denom = r * (r - along)
        coef = 0.5 * m
    if np.any(denom <= 0):
        raise OnDiracString("monopole potential evaluated on its Dirac string")
    # (x dy - y dx) about the axis is (n x X) . dx
    A = coef * np.cross(n, X) / denom[..., None]
    return embed_base_1form(A)


def monopole_curvature(m, center, x):
    """dA of the monopole: -(m/2) eps_abc X_c / r^3, as a base 2-form (..., 3, 3)."""
    X = np.asarray(x, float) - np.asarray(center, float)
    r = np.linalg.norm(X, axis=-1)[..., None]
    return base_star_vector(-0.5 * m * X / r**3)


def dphi(axis, x, center=None):
    """The angle form about ``axis`` through ``center``: (n x X)/|X_perp|^2."""
    X = np.asarray(x, float) - (0.0 if center is None else np.asarray(center, float))
    n = np.asarray(axis, float)
    perp = X - (X @ n)[..., None] * n
    return np.cross(n, X) / np.einsum("...i,...i->...", perp, perp)[..., None]


# -- homotopy operators ---------------------------------------------------------


def radial_homotopy(F, center, x, r0=0.0, **quad):
    """Primitive of a closed 2-form by integration along rays from ``center``.

    ``F`` maps points (M, 3) to 2-form components (M, 3, 3) or (M, 4, 4).
    With X = x - center and t0 = r0/|X|,

        sigma_b = int_{t0}^1 t X_a F_ab(c + t X) dt      (base legs)
        sigma_psi = int_{t0}^1 X_a F_a,psi(c + t X) dt

    so sigma(X) = 0 and d sigma = F wherever F is closed on the swept region
    and sigma vanishes on the sphere of radius r0.
    """
    c = np.asarray(center, float)
    xs = np.asarray(x, float)
    shape = xs.shape[:-1]
    X = xs.reshape(-1, 3) - c
    r = np.linalg.norm(X, axis=-1)
    out = []
    for Xi, ri in zip(X, r):
        t0 = r0 / ri if r0 else 0.0

        def integrand(t, Xi=Xi):
            pts = c + t[:, None] * Xi
            Fv = np.asarray(F(pts))
            contracted = np.einsum("a,mab->mb", Xi, Fv[:, :3, :])
            if Fv.shape[-1] == 4:
                contracted[:, :3] *= t[:, None]
                return contracted
            return t[:, None] * contracted

        val = integrate(integrand, t0, 1.0, **quad)
        out.append(val if val.shape[-1] == 4 else embed_base_1form(val))
    return np.array(out).reshape(shape + (4,))


def _ray_integral(grad, center, X, a=0.0, b=1.0, weight=lambda t: t, **quad):
    """int_a^b weight(t) grad(center + t X) dt for a batch of X (N, 3)."""

    def integrand(t):
        pts = center + t[:, None, None] * X[None, :, :]
        vals = grad(pts.reshape(-1, 3)).reshape(pts.shape)
        return weight(t)[:, None, None] * vals

    return integrate(integrand, a, b, **quad)


def eta_tilde_sing(data, s, x, center=None, **quad):
    """Radial primitive of *d(h - h^s) about s (no dpsi component).

    Collapses to (int_0^1 t grad g(c + tX) dt) x X with g = h - h^s.
    ``center`` may be a lattice image of c_s.
    """
    s = data.singularity(s)
    c = s.center if center is None else np.asarray(center, float)
    xs = np.asarray(x, float)
    shape = xs.shape[:-1]
    X = xs.reshape(-1, 3) - c
    if np.any(np.linalg.norm(X, axis=-1) == 0):
        raise AtSingularity("eta_tilde evaluated at its centre")
    J = _ray_integral(lambda p: data.grad_h_regular(s, p, center=c), c, X, **quad)
    return embed_base_1form(np.cross(J, X)).reshape(shape + (4,))


def _inverse_ray(fun, **quad):
    """int_1^oo fun(t) dt via t = 1/u; ``fun`` must decay at least like t^-2."""

    def wrapped(u):
        vals = fun(1.0 / u)
        return vals / (u * u).reshape((-1,) + (1,) * (vals.ndim - 1))

    return integrate(wrapped, 0.0, 1.0, **quad)


def eta_tilde_infinity(data, x, **quad):
    """Primitive of *d(h - leading far term) decaying at the end (no dpsi part).

    rank 0: radial scaling about the origin, sigma = -int_1^oo t grad g(tX) dt x X.
    rank 1: scaling transverse to the lattice line through 0.
    rank 2: translation to infinite height along the plane normal.
    """
    xs = np.asarray(x, float)
    shape = xs.shape[:-1]
    X = xs.reshape(-1, 3)
    lat = data.lattice
    grad = data.grad_far_remainder
    if lat.rank == 0:

        def fun(t):
            pts = t[:, None, None] * X[None]
            G = grad(pts.reshape(-1, 3)).reshape(pts.shape)
            return t[:, None, None] * G

        J = _inverse_ray(fun, **quad)
        sigma = -np.cross(J, X)
    elif lat.rank == 1:
        u = lat.axis
        par = np.outer(X @ u, u)
        perp = X - par
        # sigma . v = -int grad g(Phi_t) . (X_perp x (t v_perp + v_par)) dt
        Pperp = np.eye(3) - np.outer(u, u)
        Ppar = np.outer(u, u)

        def fun(t):
            pts = par[None] + t[:, None, None] * perp[None]
            G = grad(pts.reshape(-1, 3)).reshape(pts.shape)
            w = np.cross(G, perp[None])
            return t[:, None, None] * (w @ Pperp) + w @ Ppar

        sigma = -_inverse_ray(fun, **quad)
    else:
        u = lat.axis
        z = X @ u
        par = X - np.outer(z, u)
        Ppar = np.eye(3) - np.outer(u, u)

        def fun(t):
            pts = par[None] + t[:, None, None] * np.outer(z, u)[None]
            G = grad(pts.reshape(-1, 3)).reshape(pts.shape)
            return z[None, :, None] * (np.cross(G, u) @ Ppar)

        sigma = -_inverse_ray(fun, **quad)
    return embed_base_1form(sigma).reshape(shape + (4,))


def far_potential(data, chart: GaugeChart, x):
    """A primitive of *d(leading far-field term of h)."""
    lat = data.lattice
    X = np.asarray(x, float)
    if lat.rank == 0:
        return monopole_potential(data.total_charge, np.zeros(3), chart, X)
    coef = data.leading_far_coefficient()
    u = lat.axis
    z = X @ u
    if lat.rank == 1:
        # *d(coef log rho) = coef dphi ^ dz = d(-coef z dphi)
        return embed_base_1form(-coef * z[..., None] * dphi(u, X))
    # *d(coef |z|) = coef sign(z) dx^dy = d(coef sign(z) (n x X)/2)
    return embed_base_1form(0.5 * coef * np.sign(z)[..., None] * np.cross(u, X))


def bulk_primitive(data, anchor, x, **quad):
    """Straight-line primitive of *dh about ``anchor``: (int_0^1 t grad h(b + tX) dt) x X."""
    b = np.asarray(anchor, float)
    xs = np.asarray(x, float)
    shape = xs.shape[:-1]
    X = xs.reshape(-1, 3) - b
    _check_segments(data, b, X)
    J = _ray_integral(data.grad_h, b, X, **quad)
    return embed_base_1form(np.cross(J, X)).reshape(shape + (4,))


def _check_segments(data, b, X):
    lat = data.lattice
    L = data.scene.length_scale
    seg2 = np.einsum("ij,ij->i", X, X)
    for s in data.singularities:
        for lam in lat.translates(1):
            d = s.center + lam - b
            t = np.clip((X @ d) / np.where(seg2 > 0, seg2, 1.0), 0.0, 1.0)
            gap = np.linalg.norm(t[:, None] * X - d, axis=-1)
            if np.any(gap <= 1e-12 * L):
                raise AtSingularity(f"homotopy segment passes through {s.name}")


def connection_eval(data, chart: GaugeChart, x, **quad):
    """eta = dpsi + A on ``chart``; the dpsi component is exactly 1."""
    X = np.asarray(x, float)
    chart.require(X)
    if chart.kind == "singular":
        s = chart.singularity
        A = monopole_potential(s.charge, chart.center, chart, X) + eta_tilde_sing(
            data, s, X, center=chart.center, **quad
        )
    elif chart.kind == "bulk":
        A = bulk_primitive(data, chart.center, X, **quad)
    else:
        A = far_potential(data, chart, X) + eta_tilde_infinity(data, X, **quad)
    A[..., 3] = 1.0
    return A


# -- Z2 lift --------------------------------------------------------------------


def partner(data, s):
    """The singularity at -c_s (q's are their own partners)."""
    s = data.singularity(s)
    if s.kind == "q":
        return s
    return data.singularity(s.name[:-1] + ("-" if s.name.endswith("+") else "+"))


def lift_chart(data, chart: GaugeChart) -> GaugeChart:
    """Image of ``chart`` under (x, psi) -> (-x, -psi): centre -c, opposite hemisphere."""
    s = None if chart.singularity is None else partner(data, chart.singularity)
    opposite = "south" if chart.hemisphere == "north" else "north"
    return replace(chart, center=-chart.center, hemisphere=opposite, singularity=s)


def lift_pullback(data, chart: GaugeChart, x, **quad):
    """Components at x of the pullback under the involution of eta on the lifted chart."""
    X = np.asarray(x, float)
    return -connection_eval(data, lift_chart(data, chart), -X, **quad)


def antisymmetrized_connection(data, chart: GaugeChart, x, **quad):
    """(eta - tau^* eta)/2. Equals connection_eval, whose gauges are already odd."""
    return 0.5 * (connection_eval(data, chart, x, **quad) - lift_pullback(data, chart, x, **quad))
