"""Integer topological data: intersection forms, Betti numbers, labels."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidN, InvalidRank, NotSpecifiedInPaper

MAX_N = {0: None, 1: 4, 2: 8}


def _check(rank, n, minimum=0):
    if rank not in (0, 1, 2):
        raise InvalidRank(f"lattice rank must be 0, 1 or 2 (got {rank})")
    if not isinstance(n, (int, np.integer)) or n < minimum:
        raise InvalidN(f"n must be an integer >= {minimum} (got {n})")
    bound = MAX_N[rank]
    if bound is not None and n > bound:
        raise InvalidN(f"rank {rank} allows n <= {bound} (got {n})")


def _from_edges(size, edges, diag=-2):
    M = np.diag(np.full(size, diag, dtype=np.int64))
    for a, b in edges:
        M[a, b] += 1
        M[b, a] += 1
    return M


def _d_edges(k):
    # chain 0 - 1 - ... - (k-3), with k-2 and k-1 both attached to k-3
    edges = [(i, i + 1) for i in range(k - 3)]
    if k >= 3:
        edges += [(k - 3, k - 2), (k - 3, k - 1)]
    return edges


def cartan(kind: str, k: int | None = None) -> np.ndarray:
    """Negative Cartan matrix (diagonal -2, +1 per edge).

    kinds: "A" (chain of k nodes), "D" (k >= 2 in the ordering of the rank-0
    tables; D_2 = A_1 + A_1, D_3 = A_3 with the middle node first), "extended_D"
    (k >= 4, affine node last, attached to node 1), "extended_D4",
    "extended_A3" and "extended_A1_pair".
    """
    if kind == "A":
        if k is None or k < 1:
            raise InvalidRank("A_k needs k >= 1")
        return _from_edges(k, [(i, i + 1) for i in range(k - 1)])
    if kind == "D":
        if k is None or k < 2:
            raise InvalidRank("D_k needs k >= 2")
        return _from_edges(k, _d_edges(k))
    if kind in ("extended_D", "extended_D4"):
        k = 4 if kind == "extended_D4" else k
        if k is None or k < 4:
            raise InvalidRank("extended D_k needs k >= 4")
        return _from_edges(k + 1, _d_edges(k) + [(1, k)])
    if kind == "extended_A3":
        return _from_edges(4, _d_edges(3) + [(1, 3), (2, 3)])
    if kind == "extended_A1_pair":
        return np.array([[-2, 2], [2, -2]], dtype=np.int64)
    raise InvalidRank(f"unknown diagram type {kind!r}")


@dataclass(frozen=True, eq=False)
class IntersectionMatrix:
    matrix: np.ndarray
    basis_labels: tuple[str, ...]
    note: str = ""

    def __post_init__(self):
        M = np.asarray(self.matrix)
        if not np.array_equal(M, M.T):
            raise ValueError("intersection matrix must be symmetric")


def intersection_matrix(rank: int, n: int) -> IntersectionMatrix:
    if rank == 2:
        raise NotSpecifiedInPaper("only Betti numbers are available for rank-2 lattices")
    _check(rank, n, minimum=1)
    labels = tuple(f"S{i}" for i in range(n + rank))
    if rank == 0:
        if n == 1:
            return IntersectionMatrix(np.array([[-4]], dtype=np.int64), labels, "single bolt")
        kind = {2: "A1+A1", 3: "A3"}.get(n, f"D{n}")
        return IntersectionMatrix(cartan("D", n), labels, kind)
    if n == 1:
        return IntersectionMatrix(np.array([[-4, 4], [4, -4]], dtype=np.int64), labels, "bolt pair")
    if n == 2:
        M = np.zeros((3, 3), dtype=np.int64)
        M[0, 0] = -2
        M[1:, 1:] = cartan("extended_A1_pair")
        return IntersectionMatrix(M, labels, "A1 + extended A1")
    if n == 3:
        return IntersectionMatrix(cartan("extended_A3"), labels, "extended A3")
    note = "extended D4" if n == 4 else f"extended D{n} (extrapolated from the general pattern)"
    return IntersectionMatrix(cartan("extended_D", n), labels, note)


@dataclass(frozen=True)
class HomologyTable:
    b0: int
    b2: int
    h1_torsion: bool


def homology(rank: int, n: int) -> HomologyTable:
    """b2 = n, n + 1 or n + 3; a Z2 in H1 exactly when n = 0."""
    _check(rank, n)
    return HomologyTable(1, n + (0, 1, 3)[rank], n == 0)


def classify(rank: int, n: int) -> str:
    _check(rank, n)
    if rank == 0:
        return f"ALF-D_{n}"
    if rank == 1:
        return "ALG_{1/2}" if n == 4 else f"ALG*-I*_{4 - n}"
    return "ALH" if n == 8 else f"ALH*-I_{8 - n}"


def fixed_point_count(rank: int) -> int:
    if rank not in (0, 1, 2):
        raise InvalidRank(f"lattice rank must be 0, 1 or 2 (got {rank})")
    return 2**rank


def delpezzo_match(n: int) -> dict:
    """Compactification matching the rank-2 end for 0 <= n <= 7.

    n >= 1: blow-up of CP^2 at 8 - n points. For n = 0 the degree-8 candidates
    are S^2 x S^2 and Bl_1 CP^2; the latter would need an integer c with
    12 + 8c = 0, and c = -3/2 is not an integer.
    """
    if not isinstance(n, (int, np.integer)) or not 0 <= n <= 7:
        raise InvalidN(f"n must satisfy 0 <= n <= 7 (got {n})")
    out = {"n": int(n), "degree": n + 1 if n >= 1 else 8}
    if n >= 1:
        out["surface"] = f"Bl_{8 - n} CP^2"
        out["description"] = f"Bl_{8 - n} CP^2 complement"
        out["obstruction"] = False
        return out
    c = Fraction(-12, 8)
    scan = [k for k in range(-100, 101) if 12 + 8 * k == 0]
    out.update(
        surface="S^2 x S^2",
        description="S^2 x S^2 complement",
        obstruction=True,
        certificate={"equation": "12 + 8c = 0", "solution": str(c), "is_integer": c.denominator == 1,
                     "integer_solutions_in_scan": scan},
    )
    return out
