import math

import numpy as np
import pytest

from gravikit.connection import singular_chart
from gravikit.errors import ConfigError
from gravikit.fits import linear_fit
from gravikit.gh_triple import cf_norm_1form, gh_triple_eval, gram, model_data, model_volume, scaled_tn_triple
from gravikit.geometry import Lattice, Scene
from gravikit.gluing import GluingParams, _annulus_terms, assembled_triple, chart_for, cutoff, \
    cutoff_derivative, gh_minus_model, region_classify, sigma_gh, smoothstep, smoothstep_derivative
from gravikit.greens import HarmonicData

DIRECTION = np.array([0.36, 0.48, 0.8])


def test_params_defaults_and_invariants():
    p = GluingParams(1e-3)
    assert p.R0 == pytest.approx(4 * 1e-3**0.4) and p.R1 == pytest.approx(5 * 1e-3**0.4)
    with pytest.raises(ConfigError):
        GluingParams(1e-3, R0=0.3, R1=0.2)
    with pytest.raises(ConfigError):
        GluingParams(0.5, R0=1.0, R1=2.0)  # R0 <= 4 eps
    with pytest.raises(ConfigError):
        GluingParams(-1.0)


def test_cutoff_boundary_values():
    p = GluingParams(1e-3)
    assert cutoff(p.R0, p) == 0.0
    assert cutoff(p.R1, p) == 1.0
    assert cutoff(0.5 * p.R0, p) == 0.0 and cutoff(2 * p.R1, p) == 1.0


@pytest.mark.parametrize("profile", ["cubic", "quintic", "septic"])
def test_cutoff_monotone(profile):
    p = GluingParams(1e-3, profile=profile)
    r = np.linspace(p.R0, p.R1, 1000)
    assert np.all(np.diff(cutoff(r, p)) >= 0)


def test_conformal_derivative_bound_is_eps_independent():
    # max r |chi'| = max|s'| / log(5/4); for the quintic max|s'| = 30/16 at u = 1/2
    want = (30 / 16) / math.log(5 / 4)
    for eps in (1e-2, 1e-3, 1e-4):
        p = GluingParams(eps)
        r = p.R0 * (p.R1 / p.R0) ** np.linspace(0, 1, 2001)
        assert np.max(r * cutoff_derivative(r, p)) == pytest.approx(want, rel=1e-9)


def test_smoothstep_derivative_matches_fd():
    u = np.linspace(0.05, 0.95, 19)
    for prof in ("cubic", "quintic", "septic"):
        fd = (smoothstep(u + 1e-6, prof) - smoothstep(u - 1e-6, prof)) / 2e-6
        np.testing.assert_allclose(smoothstep_derivative(u, prof), fd, atol=1e-8)


# -- sigma ----------------------------------------------------------------------


@pytest.mark.parametrize("kind,order", [("q", 4.0), ("p", 3.0)])
def test_sigma_orders_and_linear_eps(data, kind, order):
    for s in [t for t in data.singularities if t.kind == kind][:2]:
        R = data.model_radius(s)
        r = np.geomspace(1e-3, 1e-1, 9) * (R if math.isfinite(R) else 1.0)
        X = s.center + r[:, None] * DIRECTION
        a = np.max(cf_norm_1form(sigma_gh(data, s, 1e-2, X), r[:, None]), axis=-1)
        b = np.max(cf_norm_1form(sigma_gh(data, s, 1e-3, X), r[:, None]), axis=-1)
        assert linear_fit(np.log(r), np.log(b)).slope == pytest.approx(order, abs=0.3)
        np.testing.assert_allclose(a / b, 10.0, rtol=1e-12)


def test_sigma_vanishes_when_h_is_its_model():
    data = HarmonicData(Scene(Lattice(0), []))
    x = np.array([[0.3, 0.4, 0.2], [-1.0, 2.0, 0.5]])
    assert np.max(np.abs(sigma_gh(data, "q0", 1e-3, x))) < 1e-15


def test_sigma_primitive_of_difference(data1):
    # d sigma = omega^GH - omega^s, by finite differences of sigma
    from gravikit.forms import d_of_1form_fd

    s = data1.singularity("q1")
    eps = 1e-3
    x = s.center + np.array([[0.2, 0.1, 0.3], [-0.3, 0.2, 0.1]])
    diff = gh_minus_model(data1, s, eps, x)
    for i in range(3):
        d = d_of_1form_fd(lambda p: sigma_gh(data1, s, eps, p)[:, i], x, 1e-4)
        np.testing.assert_allclose(d, diff[:, i], atol=1e-9 * eps + 1e-12)


def test_annulus_terms_match_separate_evaluations(data2):
    s = data2.singularity("p0+")
    eps = 1e-3
    x = s.center + np.geomspace(0.2, 0.4, 5)[:, None] * DIRECTION
    sigma, diff = _annulus_terms(data2, s, eps, x, s.center)
    np.testing.assert_allclose(sigma, sigma_gh(data2, s, eps, x), atol=1e-15, rtol=1e-12)
    np.testing.assert_allclose(diff, gh_minus_model(data2, s, eps, x), atol=1e-15, rtol=1e-12)


# -- regions and assembly -------------------------------------------------------


def test_region_classify_examples(data1):
    eps = 1e-3
    p = GluingParams(eps, R_asymptotic=40.0)
    q = data1.singularity("q0")
    t = region_classify(data1.scene, p, q.center + 4.5 * eps**0.4 * DIRECTION)
    assert (t.kind, t.singularity) == ("gluing_annulus", "q0")
    t = region_classify(data1.scene, p, q.center + 0.5 * p.R0 * DIRECTION)
    assert (t.kind, t.singularity) == ("model_core", "q0")
    assert region_classify(data1.scene, p, np.array([50.0, 3.0, 1.0])).kind == "asymptotic"
    assert region_classify(data1.scene, p, np.array([5.0, 3.0, 1.0])).kind == "bulk"


def test_bulk_branch_is_gh(data0):
    p = GluingParams(1e-3)
    x = np.array([[1.0, -1.2, 0.4]])
    chart = chart_for(data0, p, x[0])
    np.testing.assert_array_equal(assembled_triple(data0, p, chart, x), gh_triple_eval(data0, chart, x))


def test_core_branch_is_scaled_taubnut(data0):
    eps = 1e-3
    p = GluingParams(eps)
    s = data0.singularity("p0-")
    x = s.center + np.geomspace(0.1, 0.9, 5)[:, None] * p.R0 * DIRECTION
    chart = chart_for(data0, p, x[0])
    T = assembled_triple(data0, p, chart, x)
    np.testing.assert_array_equal(T, scaled_tn_triple(eps, data0.alpha(s), chart, x))
    m = model_data(data0, s)
    Q = gram(T, model_volume(m, eps, x))
    np.testing.assert_allclose(Q, np.broadcast_to(np.eye(3), Q.shape), atol=1e-12)


def test_annulus_gram_deviation_small(data0):
    for eps in (1e-2, 1e-3):
        p = GluingParams(eps)
        s = data0.singularity("q0")
        x = s.center + np.linspace(p.R0 * 1.01, p.R1 * 0.99, 5)[:, None] * DIRECTION
        chart = chart_for(data0, p, x[0])
        m = model_data(data0, s)
        Q = gram(assembled_triple(data0, p, chart, x), model_volume(m, eps, x))
        dev = np.max(np.abs(Q - np.eye(3)))
        assert 0 < dev < 50 * eps**1.4


@pytest.mark.parametrize("seam", ["R0", "R1"])
def test_seam_continuity(data1, seam):
    eps = 1e-3
    p = GluingParams(eps)
    for name in ("q0", "p0+"):
        s = data1.singularity(name)
        chart = singular_chart(data1, s)
        R = getattr(p, seam)
        inner = s.center + R * (1 - 1e-9) * DIRECTION
        outer = s.center + R * (1 + 1e-9) * DIRECTION
        a = assembled_triple(data1, p, chart, inner[None])
        b = assembled_triple(data1, p, chart, outer[None])
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(a))


def test_mixed_regions_rejected(data0):
    p = GluingParams(1e-3)
    s = data0.singularity("q0")
    chart = singular_chart(data0, s)
    x = s.center + np.array([0.5 * p.R0, 2 * p.R1])[:, None] * DIRECTION
    with pytest.raises(ValueError):
        assembled_triple(data0, p, chart, x)
