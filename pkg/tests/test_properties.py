"""Property-based checks of the structural invariants."""

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gravikit.analysis import lambda_apply, lambda_solve, tf
from gravikit.geometry import Lattice, antipodal, fixed_points, quotient_distance, reduce
from gravikit.gh_triple import gram, triple_from, volume_density

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)
mat3 = arrays(np.float64, (3, 3), elements=st.floats(-5, 5, allow_nan=False))


@st.composite
def lattices(draw):
    rank = draw(st.sampled_from([0, 1, 2]))
    if rank == 0:
        return Lattice(0)
    a = draw(st.floats(0.5, 5.0))
    if rank == 1:
        d = np.array(draw(st.tuples(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.3, 1))))
        return Lattice(1, [a * d / np.linalg.norm(d)])
    b = draw(st.floats(0.5, 5.0))
    shear = draw(st.floats(-0.4, 0.4))
    return Lattice(2, [[a, 0.0, 0.0], [shear * b, b, 0.0]])


@settings(max_examples=60, deadline=None)
@given(lattices(), vec3)
def test_reduce_idempotent(lat, x):
    r = reduce(lat, x)
    np.testing.assert_allclose(reduce(lat, r), r, atol=1e-9)
    assert quotient_distance(lat, r, x) < 1e-9


@settings(max_examples=60, deadline=None)
@given(lattices(), vec3, vec3)
def test_distance_invariant_under_antipodal(lat, x, y):
    d = quotient_distance(lat, x, y)
    assert abs(quotient_distance(lat, antipodal(lat, x), antipodal(lat, y)) - d) < 1e-9
    assert abs(quotient_distance(lat, y, x) - d) < 1e-9


@settings(max_examples=30, deadline=None)
@given(lattices())
def test_fixed_point_count(lat):
    pts = fixed_points(lat)
    assert len(pts) == 2**lat.rank
    for p in pts:
        assert quotient_distance(lat, antipodal(lat, p), p) < 1e-9


@settings(max_examples=100, deadline=None)
@given(mat3)
def test_tf_projection(P):
    T = tf(P)
    np.testing.assert_allclose(tf(T), T, atol=1e-12)
    np.testing.assert_allclose(T, T.T, atol=0)
    assert abs(np.trace(T)) < 1e-12


@st.composite
def triples(draw):
    H = draw(st.floats(0.2, 5.0))
    eps = draw(st.floats(1e-3, 0.5))
    a = draw(arrays(np.float64, 3, elements=st.floats(-3, 3)))
    return triple_from(np.array(H), np.append(a, 1.0), eps), volume_density(np.array(H), eps)


@settings(max_examples=60, deadline=None)
@given(triples(), mat3)
def test_gram_symmetric_and_lambda_round_trip(tm, rhs):
    T, mu = tm
    Q = gram(T, mu)
    np.testing.assert_allclose(Q, Q.T, atol=1e-12)
    u = lambda_solve(T, rhs, mu)
    np.testing.assert_allclose(lambda_apply(u, T, mu), rhs, atol=1e-9 * (1 + np.max(np.abs(rhs))))
