import math

import numpy as np
import pytest

from gravikit.errors import AtSingularity
from gravikit.geometry import Lattice, Scene
from gravikit.greens import GreensParams, HarmonicData, alpha_at, far_field_fit, greens, greens_grad, h_eps, h_eval
from gravikit.oracles import line_image_sum, plane_line_sum

UNIT_LINE = Lattice(1, [[0.0, 0.0, 1.0]])
RECT = Lattice(2, [[1.0, 0.0, 0.0], [0.0, 1.5, 0.0]])
SHEARED = Lattice(2, [[1.0, 0.0, 0.0], [0.3, 1.1, 0.2]])

# frozen outputs of the slow oracles (they share no code with the lattice sums)
LINE_ORACLE = -0.0005684532164799132  # line_image_sum((0,0,1), (1,0,0.3))
PLANE_ORACLE = -1.470845001517904  # plane_line_sum(1, 1.5, (0.2,0.4,0.7))


def _random_points(rng, n, scale=2.0, clear=0.2):
    pts = scale * rng.uniform(-1, 1, size=(4 * n, 3))
    return pts[np.linalg.norm(pts, axis=-1) > clear][:n]


def test_rank0_closed_form():
    assert greens(Lattice(0), np.array([0.0, 0.6, 0.8])) == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(greens_grad(Lattice(0), np.array([1.0, 0.0, 0.0])), [-0.5, 0.0, 0.0], atol=1e-15)


def test_rank1_oracle_frozen_and_matched():
    assert line_image_sum([0, 0, 1.0], [1.0, 0.0, 0.3]) == pytest.approx(LINE_ORACLE, abs=1e-13)
    assert greens(UNIT_LINE, np.array([1.0, 0.0, 0.3])) == pytest.approx(LINE_ORACLE, abs=1e-12)


def test_rank2_oracle_frozen_and_matched():
    x = np.array([0.2, 0.4, 0.7])
    assert plane_line_sum(1.0, 1.5, x) == pytest.approx(PLANE_ORACLE, abs=1e-13)
    assert greens(RECT, x) == pytest.approx(PLANE_ORACLE, abs=1e-12)


@pytest.mark.parametrize("x", [[0.3, 0.1, 0.35], [0.45, 0.7, 0.2], [-0.1, -0.3, 1.1]])
def test_rank2_matches_line_sum_oracle(x):
    x = np.array(x)
    assert greens(RECT, x) == pytest.approx(plane_line_sum(1.0, 1.5, x), abs=1e-11)


@pytest.mark.parametrize("lat", [UNIT_LINE, SHEARED], ids=["rank1", "rank2"])
def test_periodicity(lat, rng):
    x = _random_points(rng, 100)
    base = greens(lat, x)
    for v in lat.generators:
        np.testing.assert_allclose(greens(lat, x + v), base, atol=1e-12)


@pytest.mark.parametrize("lat", [Lattice(0), UNIT_LINE, SHEARED], ids=["rank0", "rank1", "rank2"])
def test_gradient_odd_and_matches_fd(lat, rng):
    x = _random_points(rng, 100)
    g = greens_grad(lat, x)
    np.testing.assert_allclose(greens_grad(lat, -x), -g, atol=1e-12)
    step = 1e-4
    fd = np.stack([(greens(lat, x + step * e) - greens(lat, x - step * e)) / (2 * step) for e in np.eye(3)], -1)
    err = np.linalg.norm(fd - g, axis=-1) / np.maximum(np.linalg.norm(g, axis=-1), 1.0)
    assert np.max(err) <= 1e-6


@pytest.mark.parametrize("lat", [UNIT_LINE, SHEARED], ids=["rank1", "rank2"])
def test_far_normalization(lat):
    # G + (1/a) log rho -> 0 (rank 1) and G + (pi/A)|z| -> 0 (rank 2)
    u = lat.axis
    side = lat.transverse_axis
    if lat.rank == 1:
        rho = np.array([20.0, 40.0])
        vals = greens(lat, rho[:, None] * side) + np.log(rho) / lat.cell_measure
    else:
        z = np.array([6.0, 9.0])
        vals = greens(lat, z[:, None] * u) + math.pi / lat.cell_measure * z
    np.testing.assert_allclose(vals, 0.0, atol=1e-10)


def test_at_singularity_raises():
    with pytest.raises(AtSingularity):
        greens(UNIT_LINE, np.array([0.0, 0.0, 2.0]))


def test_h_is_z2_invariant(data, rng):
    L = data.scene.length_scale
    x = L * rng.uniform(-0.5, 0.5, size=(100, 3))
    np.testing.assert_allclose(data.h(data.lattice.antipodal(x)), data.h(x), atol=2e-13 * max(1, L))


def test_local_models_bounded(data1):
    d = 0.6 * np.array([0.36, 0.48, 0.8])
    r = np.geomspace(1e-2, 1e-6, 5)
    for s in data1.singularities:
        pts = s.center + r[:, None] * d
        # the pole is subtracted at the displacement actually evaluated
        vals = data1.h(pts) - s.charge / (2 * np.linalg.norm(pts - s.center, axis=-1))
        # converges to alpha as r -> 0
        assert np.ptp(vals) < 1e-3
        assert vals[-1] == pytest.approx(data1.alpha(s), abs=1e-5)


def test_h_eps_identities(data0, rng):
    x = 3 * rng.uniform(-1, 1, size=(20, 3)) + 5.0
    assert np.all(HarmonicData(data0.scene.with_epsilon(1e-300)).h_eps(x) == 1.0)
    e = data0.epsilon
    np.testing.assert_allclose((h_eps(data0, x) - 1.0) / e, h_eval(data0, x), rtol=1e-9)
    np.testing.assert_allclose(h_eps(data0, data0.lattice.antipodal(x)), h_eps(data0, x), rtol=1e-14)


def test_alpha_direction_independent(data):
    tol = 10 * data.params.target_tol
    for s in data.singularities:
        a = alpha_at(data, s)
        b = alpha_at(data, s, direction=[0.1, 0.9, -0.3])
        assert abs(a - b) <= tol * max(1.0, abs(a))
        assert abs(a - data.alpha(s)) <= tol * max(1.0, abs(a))


def test_alpha_rank0_closed_form():
    p = [[1.0, 0.5, -0.2], [-0.4, 0.9, 1.3]]
    data = HarmonicData(Scene(Lattice(0), p))
    centers = {"q0": np.zeros(3), "p0+": np.array(p[0]), "p0-": -np.array(p[0]),
               "p1+": np.array(p[1]), "p1-": -np.array(p[1])}
    charges = {"q0": -4, "p0+": 1, "p0-": 1, "p1+": 1, "p1-": 1}
    for name, c in centers.items():
        direct = sum(charges[o] / (2 * np.linalg.norm(c - centers[o])) for o in centers if o != name)
        assert alpha_at(data, name) == pytest.approx(direct, abs=1e-12)
        assert data.alpha(name) == pytest.approx(direct, abs=1e-14)


def test_alpha_symmetric_rank1_scene():
    # p at height a/4 is equidistant from q0 (z = 0) and q1 (z = a/2)
    data = HarmonicData(Scene(Lattice(1, [[0.0, 0.0, 8.0]]), [[1.5, 0.4, 2.0]]))
    assert data.alpha("q0") == pytest.approx(data.alpha("q1"), abs=1e-12)


def test_far_field_rank0():
    data = HarmonicData(Scene(Lattice(0), [[1.0, 0.5, 0.2], [-0.3, 1.2, 0.7], [0.4, -0.2, 1.5]]))
    fit = far_field_fit(data, [0.36, 0.48, 0.8], np.geomspace(50, 1000, 10))
    assert fit.slope == pytest.approx((2 * 3 - 4) / 2, rel=1e-6)
    assert fit.extra["remainder_exponent"] <= -2.7


def test_far_field_rank1_beta():
    data = HarmonicData(Scene(UNIT_LINE, [[0.3, 0.1, 0.2]]))
    # beta from the independent image-sum oracle: G ~ -beta log rho
    rho = np.array([2.5, 5.0, 10.0])
    g = [line_image_sum([0, 0, 1.0], [r, 0.0, 0.3]) for r in rho]
    beta = -np.polyfit(np.log(rho), g, 1)[0]
    assert beta == pytest.approx(1.0, rel=1e-6)
    fit = far_field_fit(data, [1.0, 0.05, 0.0], np.geomspace(5, 50, 10))
    assert fit.slope / (8 - 2) == pytest.approx(beta, rel=1e-5)


def test_far_field_rank2_beta():
    lat = Lattice(2, [[1.0, 0.0, 0.0], [0.3, 1.0, 0.0]])
    data = HarmonicData(Scene(lat, [[0.2, 0.1, 0.3]]))
    fit = far_field_fit(data, [0.01, 0.0, 1.0], np.linspace(1.5, 4.0, 10))
    assert fit.slope / (16 - 2) == pytest.approx(math.pi, rel=1e-4)
    assert fit.extra["remainder_slope"] < 0


def test_uniqueness_normalization_rank0(data0):
    x = np.array([0.36, 0.48, 0.8])
    assert abs(data0.h(1e6 * x)) < 1e-5


def test_coarser_target_tolerance_still_accurate():
    coarse = HarmonicData(Scene(SHEARED, [[0.2, 0.3, 0.1]]), GreensParams(target_tol=1e-8))
    fine = HarmonicData(Scene(SHEARED, [[0.2, 0.3, 0.1]]))
    x = np.array([[0.1, -0.2, 0.4], [0.3, 0.3, -0.6]])
    np.testing.assert_allclose(coarse.h(x), fine.h(x), atol=1e-7)
