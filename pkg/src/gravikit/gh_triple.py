"""Gibbons-Hawking metrics and Kaehler triples, their local models and the
Taub-NUT / Atiyah-Hitchin identifications.

Everything is expressed in the coframe (dx1, dx2, dx3, dpsi) with the flat
base metric equal to the identity. For a positive function H and a
connection eta = dpsi + A,

    g = H g_B + (eps^2 / H) eta^2,   omega_i = eps dx_i ^ eta + H *dx_i,

and (1/2) omega_i ^ omega_j = delta_ij eps H dx1^dx2^dx3^dpsi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import GaugeChart, connection_eval, monopole_potential
from .errors import AtSingularity, DegenerateTriple, InsideAsymptoticCutoff, NonPositiveHarmonic
from .forms import LEVI3, embed_base_2form, wedge_matrix

# the AH model is only used where 1 - 2/r_AH is bounded away from 0
R_AH_MIN = 4.0

_E4 = np.eye(4)


def metric_from(H, eta, epsilon):
    """H g_B + (eps^2/H) eta (x) eta as (..., 4, 4)."""
    H = np.asarray(H, float)
    eta = np.asarray(eta, float)
    if np.any(H <= 0):
        raise NonPositiveHarmonic(f"h_eps = {float(np.min(H)):.6g} <= 0")
    base = np.zeros(H.shape + (4, 4))
    base[..., :3, :3] = np.eye(3)
    return H[..., None, None] * base + (epsilon**2 / H)[..., None, None] * np.einsum("...a,...b->...ab", eta, eta)


def triple_from(H, eta, epsilon):
    """omega_i = eps dx_i ^ eta + H *dx_i as (..., 3, 4, 4)."""
    H = np.asarray(H, float)
    eta = np.asarray(eta, float)
    if np.any(H <= 0):
        raise NonPositiveHarmonic(f"h_eps = {float(np.min(H)):.6g} <= 0")
    dx = _E4[:3]  # dx_i as 1-forms
    wedge = np.einsum("ia,...b->...iab", dx, eta)
    wedge = wedge - np.swapaxes(wedge, -1, -2)
    star = embed_base_2form(LEVI3)  # (3, 4, 4)
    return epsilon * wedge + H[..., None, None, None] * star


def volume_density(H, epsilon):
    """Coefficient of dx1^dx2^dx3^dpsi in the GH volume form: eps H."""
    return epsilon * np.asarray(H, float)


def gram(triple, reference_volume):
    """Q_ij = (1/2) omega_i ^ omega_j / reference volume density."""
    mu = np.asarray(reference_volume, float)
    if np.any(mu <= 0):
        raise DegenerateTriple("reference volume must be positive")
    return 0.5 * wedge_matrix(triple) / mu[..., None, None]


def _h_eps_checked(data, x):
    X = np.asarray(x, float)
    d = np.min([data.lattice.distance(X, s.center) for s in data.singularities], axis=0)
    if np.any(d == 0):
        raise AtSingularity("GH data evaluated at a singularity")
    return data.h_eps(X)


def gh_metric(data, chart: GaugeChart, x):
    H = _h_eps_checked(data, x)
    if np.any(H <= 0):
        raise NonPositiveHarmonic(f"h_eps = {float(np.min(H)):.6g} <= 0 (inside the excised region)")
    return metric_from(H, connection_eval(data, chart, x), data.epsilon)


def gh_triple_eval(data, chart: GaugeChart, x):
    H = _h_eps_checked(data, x)
    if np.any(H <= 0):
        raise NonPositiveHarmonic(f"h_eps = {float(np.min(H)):.6g} <= 0 (inside the excised region)")
    return triple_from(H, connection_eval(data, chart, x), data.epsilon)


def gh_volume(data, x):
    return volume_density(data.h_eps(x), data.epsilon)


# -- local models ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModelData:
    """h^s = alpha + k/(2r) about ``center``, with conformal weights."""

    name: str
    kind: str
    center: np.ndarray
    alpha: float
    flux: int

    def __post_init__(self):
        expected = {"p": 1, "q": -4}[self.kind]
        if self.flux != expected:
            raise ValueError(f"flux of a {self.kind}-model must be {expected}")

    def radius(self, x):
        return np.linalg.norm(np.asarray(x, float) - self.center, axis=-1)

    def h_model(self, r):
        return self.alpha + self.flux / (2 * np.asarray(r, float))

    def h_eps(self, epsilon, r):
        return 1.0 + epsilon * self.h_model(r)

    def omega(self, epsilon, r):
        """Conformal factor r^-1 (h_eps^s)^-1/2."""
        r = np.asarray(r, float)
        return 1.0 / (r * np.sqrt(self.h_eps(epsilon, r)))

    def rho(self, r):
        return np.log(np.asarray(r, float))


def model_data(data, s) -> ModelData:
    s = data.singularity(s)
    return ModelData(s.name, s.kind, np.array(s.center, float), data.alpha(s), s.charge)


def model_connection(model: ModelData, chart: GaugeChart, x):
    eta = monopole_potential(model.flux, chart.center, chart, x)
    eta[..., 3] = 1.0
    return eta


def model_metric(model: ModelData, epsilon, chart: GaugeChart, x):
    r = np.linalg.norm(np.asarray(x, float) - chart.center, axis=-1)
    return metric_from(model.h_eps(epsilon, r), model_connection(model, chart, x), epsilon)


def model_triple(model: ModelData, epsilon, chart: GaugeChart, x):
    """GH triple of h^s with the pure monopole connection of the chart."""
    r = np.linalg.norm(np.asarray(x, float) - chart.center, axis=-1)
    if np.any(r == 0):
        raise AtSingularity("model triple evaluated at its centre")
    return triple_from(model.h_eps(epsilon, r), model_connection(model, chart, x), epsilon)


def model_volume(model: ModelData, epsilon, x, center=None):
    c = model.center if center is None else center
    r = np.linalg.norm(np.asarray(x, float) - c, axis=-1)
    return volume_density(model.h_eps(epsilon, r), epsilon)


def conformal_model_metric(model: ModelData, epsilon, chart: GaugeChart, x):
    """Omega_s^2 g^s."""
    r = np.linalg.norm(np.asarray(x, float) - chart.center, axis=-1)
    return model.omega(epsilon, r)[..., None, None] ** 2 * model_metric(model, epsilon, chart, x)


def cylinder_metric(model: ModelData, epsilon, chart: GaugeChart, x):
    """d rho^2 + g_S2 + eps^2 r^-2 (h_eps^s)^-2 eta^2 written in Cartesian base coordinates.

    With rho = log r the base part dr^2/r^2 + g_S2 is g_B / r^2.
    """
    X = np.asarray(x, float) - chart.center
    r = np.linalg.norm(X, axis=-1)
    H = model.h_eps(epsilon, r)
    eta = model_connection(model, chart, x)
    base = np.zeros(r.shape + (4, 4))
    base[..., :3, :3] = np.eye(3)
    fibre = (epsilon**2 / (r**2 * H**2))[..., None, None] * np.einsum("...a,...b->...ab", eta, eta)
    return base / (r**2)[..., None, None] + fibre


def cf_norm_1form(form, r):
    """Norm of a base 1-form in g_cf (base part g_B / r^2): r |form|_B."""
    return np.asarray(r) * np.linalg.norm(np.asarray(form)[..., :3], axis=-1)


def cf_norm_2form(form, r):
    """Norm of a base 2-form in g_cf: r^2 |form|_B (|w|^2 = sum_{a<b} w_ab^2)."""
    w = np.asarray(form)[..., :3, :3]
    return np.asarray(r) ** 2 * np.sqrt(0.5 * np.sum(w * w, axis=(-1, -2)))


# -- Taub-NUT and the asymptotic Atiyah-Hitchin model ---------------------------


def taubnut_map(epsilon, alpha, r_tn):
    """Base radius r = eps r_TN / (1 + eps alpha) of the rescaled Taub-NUT."""
    return epsilon * np.asarray(r_tn, float) / (1.0 + epsilon * alpha)


def tn_metric(y, chart: GaugeChart, mass=1):
    """Taub-NUT of the given mass in coordinates y centred at 0: H = 1 + mass/(2|y|)."""
    y = np.asarray(y, float)
    r = np.linalg.norm(y, axis=-1)
    H = 1.0 + mass / (2 * r)
    eta = monopole_potential(mass, np.zeros(3), chart, y)
    eta[..., 3] = 1.0
    return metric_from(H, eta, 1.0)


def tn_triple(y, chart: GaugeChart, mass=1):
    y = np.asarray(y, float)
    r = np.linalg.norm(y, axis=-1)
    H = 1.0 + mass / (2 * r)
    eta = monopole_potential(mass, np.zeros(3), chart, y)
    eta[..., 3] = 1.0
    return triple_from(H, eta, 1.0)


def _scaled_pullback(tensor, scale, lam):
    # y = X / lam, so dy = dx / lam on base legs; psi is unchanged
    J = np.diag([1.0 / lam] * 3 + [1.0])
    return scale * np.einsum("ab,...bc,cd->...ad", J, tensor, J)


def _tn_coordinates(epsilon, alpha, chart, x):
    lam = epsilon / (1.0 + epsilon * alpha)
    X = np.asarray(x, float) - chart.center
    return X / lam, lam


def scaled_tn_metric(epsilon, alpha, chart: GaugeChart, x, mass=1):
    """eps^2/(1+eps alpha) g^TN pulled back to the base coordinates x."""
    y, lam = _tn_coordinates(epsilon, alpha, chart, x)
    local = GaugeChart(np.zeros(3), chart.hemisphere, chart.axis, "singular")
    return _scaled_pullback(tn_metric(y, local, mass), epsilon**2 / (1 + epsilon * alpha), lam)


def scaled_tn_triple(epsilon, alpha, chart: GaugeChart, x, mass=1):
    """eps^2/(1+eps alpha) omega^TN pulled back; equals the p-model triple."""
    y, lam = _tn_coordinates(epsilon, alpha, chart, x)
    local = GaugeChart(np.zeros(3), chart.hemisphere, chart.axis, "singular")
    return _scaled_pullback(tn_triple(y, local, mass), epsilon**2 / (1 + epsilon * alpha), lam)


def ah_radius(epsilon, alpha, r):
    return (1.0 + epsilon * alpha) * np.asarray(r, float) / epsilon


def ah_model_triple(epsilon, alpha_q, chart: GaugeChart, x):
    """Asymptotic Atiyah-Hitchin triple (Taub-NUT of mass -4, exponential part dropped)."""
    r = np.linalg.norm(np.asarray(x, float) - chart.center, axis=-1)
    r_ah = ah_radius(epsilon, alpha_q, r)
    if np.any(r_ah <= R_AH_MIN):
        raise InsideAsymptoticCutoff(f"r_AH = {float(np.min(r_ah)):.4g} <= {R_AH_MIN}")
    return scaled_tn_triple(epsilon, alpha_q, chart, x, mass=-4)
