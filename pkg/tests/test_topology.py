import numpy as np
import pytest

from gravikit import reference_tables as ref
from gravikit.errors import InvalidN, InvalidRank, NotSpecifiedInPaper
from gravikit.topology import MAX_N, cartan, classify, delpezzo_match, fixed_point_count, homology, \
    intersection_matrix


def test_cartan_examples():
    np.testing.assert_array_equal(cartan("A", 1), [[-2]])
    np.testing.assert_array_equal(cartan("D", 4), ref.INTERSECTION_RANK0[4])
    np.testing.assert_array_equal(cartan("extended_D4"), ref.INTERSECTION_RANK1[4])
    np.testing.assert_array_equal(cartan("extended_A3"), ref.INTERSECTION_RANK1[3])
    with pytest.raises(InvalidRank):
        cartan("A", 0)
    with pytest.raises(InvalidRank):
        cartan("E", 6)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_rank0_intersection_matrices_match_table(n):
    np.testing.assert_array_equal(intersection_matrix(0, n).matrix, ref.INTERSECTION_RANK0[n])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_rank1_intersection_matrices_match_table(n):
    np.testing.assert_array_equal(intersection_matrix(1, n).matrix, ref.INTERSECTION_RANK1[n])


def test_intersection_examples():
    np.testing.assert_array_equal(intersection_matrix(0, 1).matrix, [[-4]])
    np.testing.assert_array_equal(intersection_matrix(1, 2).matrix, [[-2, 0, 0], [0, -2, 2], [0, 2, -2]])
    np.testing.assert_array_equal(intersection_matrix(0, 7).matrix, cartan("D", 7))


def test_intersection_errors():
    with pytest.raises(NotSpecifiedInPaper):
        intersection_matrix(2, 3)
    with pytest.raises(InvalidN):
        intersection_matrix(1, 5)
    with pytest.raises(InvalidN):
        intersection_matrix(0, 0)


def _cases():
    yield from ((0, n) for n in range(1, 12))
    yield from ((1, n) for n in range(1, MAX_N[1] + 1))


@pytest.mark.parametrize("rank,n", list(_cases()))
def test_intersection_form_properties(rank, n):
    M = intersection_matrix(rank, n).matrix
    assert np.array_equal(M, M.T)
    assert np.all(np.diag(M) % 2 == 0)
    assert M.shape[0] == homology(rank, n).b2
    eig = np.linalg.eigvalsh(M.astype(float))
    assert np.all(eig <= 1e-9)
    kernel = int(np.sum(np.abs(eig) <= 1e-9))
    # extended diagrams (and the bolt pair) have a one-dimensional kernel
    assert kernel == (1 if rank == 1 else 0)


def test_homology_examples():
    assert homology(1, 3).b2 == 4
    h = homology(2, 0)
    assert (h.b0, h.b2, h.h1_torsion) == (1, 3, True)
    assert homology(0, 5).b2 == 5
    assert not homology(2, 5).h1_torsion
    for rank in (0, 1, 2):
        for n in range(0, (MAX_N[rank] or 10) + 1):
            assert homology(rank, n).b2 == n + ref.B2_OFFSET[rank]


def test_classification_matches_table():
    assert classify(1, 4) == "ALG_{1/2}"
    assert classify(2, 3) == "ALH*-I_5"
    assert classify(0, 7) == "ALF-D_7"
    for (rank, n), label in ref.CLASSIFICATION.items():
        assert classify(rank, n) == label
    with pytest.raises(InvalidN):
        classify(2, 9)
    with pytest.raises(InvalidRank):
        classify(3, 1)


def test_fixed_point_counts():
    assert [fixed_point_count(r) for r in (0, 1, 2)] == [ref.FIXED_POINTS[r] for r in (0, 1, 2)]


def test_delpezzo():
    assert delpezzo_match(2)["surface"] == "Bl_6 CP^2"
    out = delpezzo_match(0)
    assert out["surface"] == "S^2 x S^2" and out["obstruction"]
    cert = out["certificate"]
    assert cert["solution"] == "-3/2" and not cert["is_integer"] and cert["integer_solutions_in_scan"] == []
    assert all(12 + 8 * c != 0 for c in range(-100, 101))
    with pytest.raises(InvalidN):
        delpezzo_match(8)
