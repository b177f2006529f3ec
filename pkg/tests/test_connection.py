import math

import numpy as np
import pytest

from gravikit.connection import GaugeChart, antisymmetrized_connection, bulk_chart, connection_eval, dphi, \
    eta_tilde_infinity, eta_tilde_sing, monopole_curvature, monopole_potential, radial_homotopy, singular_chart
from gravikit.errors import OnDiracString
from gravikit.fits import linear_fit
from gravikit.forms import base_star_vector, d_of_1form_fd
from gravikit.geometry import Lattice, Scene
from gravikit.gh_triple import cf_norm_1form
from gravikit.greens import HarmonicData
from gravikit.quadrature import periodic_grid, sphere_grid

Z = np.array([0.0, 0.0, 1.0])
DIRECTION = np.array([0.36, 0.48, 0.8])


def _chart(hemi, center=np.zeros(3)):
    return GaugeChart(center, hemi, Z)


def _patch_flux(m, radius=0.7, center=np.array([0.3, -0.1, 0.2])):
    """-(1/2pi) int dA over a sphere, dA from finite differences of each hemisphere potential."""
    normals, w = sphere_grid(24, 48)
    pts = center + radius * normals
    total = 0.0
    for hemi, mask in (("north", normals[:, 2] >= 0), ("south", normals[:, 2] < 0)):
        chart = _chart(hemi, center)
        F = d_of_1form_fd(lambda p: monopole_potential(m, center, chart, p), pts[mask], 1e-5)
        # flux of the base 2-form F_ab through the surface: F_23 n_1 + F_31 n_2 + F_12 n_3
        vec = np.stack([F[:, 1, 2], F[:, 2, 0], F[:, 0, 1]], axis=-1)
        total += radius**2 * np.sum(w[mask] * np.einsum("ij,ij->i", vec, normals[mask]))
    return -total / (2 * math.pi)


@pytest.mark.parametrize("m", [1, -4])
def test_monopole_flux(m):
    assert _patch_flux(m) == pytest.approx(m, abs=1e-10)


@pytest.mark.parametrize("m", [1, -4, 3])
def test_transition_loop_integral_is_integer(m):
    # -(1/2pi) of the flux equals -(1/2pi) times the equator integral of A_N - A_S
    t, w = periodic_grid(64)
    phi = 2 * math.pi * t
    pts = np.stack([np.cos(phi), np.sin(phi), np.zeros_like(phi)], -1)
    tangent = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], -1)
    diff = monopole_potential(m, np.zeros(3), _chart("north"), pts) - monopole_potential(m, np.zeros(3), _chart("south"), pts)
    loop = 2 * math.pi * np.sum(w * np.einsum("ij,ij->i", diff[:, :3], tangent))
    assert loop == pytest.approx(-2 * math.pi * m, abs=1e-10)
    assert -loop / (2 * math.pi) == pytest.approx(m, abs=1e-10)


def test_transition_is_minus_m_dphi(rng):
    m = 3
    x = rng.normal(size=(50, 3))
    x = x[np.linalg.norm(x[:, :2], axis=-1) > 0.1]
    diff = monopole_potential(m, np.zeros(3), _chart("north"), x) - monopole_potential(m, np.zeros(3), _chart("south"), x)
    np.testing.assert_allclose(diff[:, :3], -m * dphi(Z, x), atol=1e-12)


def test_monopole_fd_curvature_matches_closed_form(rng):
    x = rng.normal(size=(30, 3))
    x = x[x[:, 2] > 0.2]
    F = d_of_1form_fd(lambda p: monopole_potential(2, np.zeros(3), _chart("north"), p), x, 1e-5)
    np.testing.assert_allclose(F[:, :3, :3], monopole_curvature(2, np.zeros(3), x), atol=1e-7)


def test_dirac_string_raises():
    with pytest.raises(OnDiracString):
        monopole_potential(1, np.zeros(3), _chart("north"), np.array([[0.0, 0.0, -1.0]]))
    with pytest.raises(OnDiracString):
        _chart("south").require(np.array([[0.0, 0.0, 2.0]]))


# -- radial homotopy ------------------------------------------------------------


def _grad_theta(x):
    r2 = np.einsum("ij,ij->i", x, x)
    rho = np.linalg.norm(x[:, :2], axis=-1)
    return np.stack([x[:, 0] * x[:, 2], x[:, 1] * x[:, 2], -rho**2], -1) / (r2 * rho)[:, None]


def _dr_wedge_dtheta(x):
    dr = x / np.linalg.norm(x, axis=-1)[:, None]
    dt = _grad_theta(x)
    return np.einsum("ia,ib->iab", dr, dt) - np.einsum("ib,ia->iab", dr, dt)


def test_radial_homotopy_of_zero():
    x = np.array([[0.3, 0.2, 0.5], [1.0, -1.0, 0.2]])
    out = radial_homotopy(lambda p: np.zeros((len(p), 3, 3)), np.zeros(3), x)
    assert np.all(out == 0)


def test_radial_homotopy_dr_dtheta():
    x = np.array([[1.2, 0.5, 0.9], [0.8, -1.6, 1.1], [2.0, 0.3, -0.4]])
    sigma = radial_homotopy(_dr_wedge_dtheta, np.zeros(3), x, r0=1.0)
    r = np.linalg.norm(x, axis=-1)
    np.testing.assert_allclose(sigma[:, :3], (r - 1)[:, None] * _grad_theta(x), atol=1e-11)
    # no dr component
    np.testing.assert_allclose(np.einsum("ij,ij->i", sigma[:, :3], x), 0.0, atol=1e-12)
    dsig = d_of_1form_fd(lambda p: radial_homotopy(_dr_wedge_dtheta, np.zeros(3), p, r0=1.0), x, 1e-4)
    np.testing.assert_allclose(dsig[:, :3, :3], _dr_wedge_dtheta(x), atol=1e-6)


def test_radial_homotopy_reproduces_eta_tilde(data1):
    s = data1.singularity("q0")
    F = lambda p: base_star_vector(data1.grad_h_regular(s, p))  # noqa: E731
    x = s.center + np.array([[0.4, 0.1, 0.3], [-0.2, 0.5, 0.1]])
    sigma = radial_homotopy(F, s.center, x)
    np.testing.assert_allclose(sigma, eta_tilde_sing(data1, s, x), atol=1e-12)
    dsig = d_of_1form_fd(lambda p: radial_homotopy(F, s.center, p), x, 1e-4)
    np.testing.assert_allclose(dsig[:, :3, :3], F(x), atol=1e-7)


# -- eta tilde orders -----------------------------------------------------------


def _order(data, s, r):
    X = s.center + r[:, None] * DIRECTION
    return linear_fit(np.log(r), np.log(cf_norm_1form(eta_tilde_sing(data, s, X), r))).slope


def test_eta_tilde_orders(data):
    r = np.geomspace(1e-3, 1e-1, 9)
    for s in data.singularities:
        R = data.model_radius(s)
        scale = R if math.isfinite(R) else 1.0
        want = 3.0 if s.kind == "q" else 2.0
        assert _order(data, s, r * scale) == pytest.approx(want, abs=0.3)


def test_eta_tilde_vanishes_for_single_singularity():
    data = HarmonicData(Scene(Lattice(0), []))
    x = np.array([[0.3, 0.4, 0.2], [-1.0, 2.0, 0.5]])
    assert np.max(np.abs(eta_tilde_sing(data, "q0", x))) < 1e-15


def test_eta_tilde_infinity_rank0_rank1(data0, data1):
    R = np.geomspace(10, 100, 8) * data0.scene.length_scale
    v = np.linalg.norm(eta_tilde_infinity(data0, R[:, None] * DIRECTION)[:, :3], axis=-1)
    assert linear_fit(np.log(R), np.log(v)).slope == pytest.approx(-3.0, abs=0.3)
    lat = data1.lattice
    d = lat.transverse_axis + 0.75 * np.cross(lat.axis, lat.transverse_axis)
    R = np.geomspace(10, 100, 8) * data1.scene.length_scale
    X = R[:, None] * d / np.linalg.norm(d) + 0.3 * lat.generators[0]
    v = np.linalg.norm(eta_tilde_infinity(data1, X)[:, :3], axis=-1)
    assert linear_fit(np.log(R), np.log(v)).slope == pytest.approx(-2.0, abs=0.3)


# -- connection -----------------------------------------------------------------


def _bulk_points(data, n, rng):
    L = data.scene.length_scale
    pts = []
    while len(pts) < n:
        x = 0.5 * L * rng.uniform(-1, 1, size=3)
        d = min(float(data.lattice.distance(x, s.center)) for s in data.singularities)
        if d > 0.3:
            pts.append(x)
    return np.array(pts)


def test_bogomolny_fd_at_bulk_points(data, rng):
    pts = _bulk_points(data, 100, rng)
    worst = 0.0
    for x in pts:
        d = min(float(data.lattice.distance(x, s.center)) for s in data.singularities)
        chart = bulk_chart(data, x + 0.25 * min(d, 1.0) * np.array([0.0, 0.6, 0.8]))
        dA = d_of_1form_fd(lambda p: connection_eval(data, chart, p), x[None], 1e-4)[0]
        star = base_star_vector(data.grad_h(x))
        worst = max(worst, float(np.max(np.abs(dA[:3, :3] - star)) / np.max(np.abs(star))))
        assert np.all(dA[3, :] == 0)
    assert worst <= 1e-5


def test_dpsi_component_is_one(data1):
    s = data1.singularity("p0+")
    chart = singular_chart(data1, s)
    x = s.center + np.array([[0.1, 0.2, 0.3], [0.5, -0.1, 0.2]])
    assert np.all(connection_eval(data1, chart, x)[:, 3] == 1.0)
    bchart = bulk_chart(data1, np.array([5.0, 5.0, 0.0]))
    assert np.all(connection_eval(data1, bchart, np.array([[5.2, 4.9, 0.3]]))[:, 3] == 1.0)


def test_single_singularity_connection_is_monopole():
    data = HarmonicData(Scene(Lattice(0), []))
    chart = singular_chart(data, "q0")
    x = np.array([[0.3, 0.4, 0.2], [-1.0, 2.0, 0.5]])
    want = monopole_potential(-4, np.zeros(3), chart, x)
    want[:, 3] = 1.0
    np.testing.assert_allclose(connection_eval(data, chart, x), want, atol=1e-15)


def test_connection_is_odd_under_the_lift(data0):
    s = data0.singularity("p0+")
    chart = singular_chart(data0, s)
    x = s.center + np.array([[0.1, 0.2, 0.3], [0.4, -0.1, 0.2]])
    np.testing.assert_allclose(antisymmetrized_connection(data0, chart, x), connection_eval(data0, chart, x),
                               atol=1e-12)
