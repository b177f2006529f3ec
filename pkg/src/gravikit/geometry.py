"""Lattices in R^3 of rank 0, 1 or 2, the flat quotient B = R^3/L and the
antipodal involution x -> -x.

Points are plain float arrays of shape ``(3,)`` or ``(N, 3)``. A "base
point" is simply an array reduced into the half-open fundamental domain
``[-1/2, 1/2)`` in lattice coordinates.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateLattice,
    DuplicatePoint,
    PointOnFixedLocus,
    SceneError,
    TooManyPoints,
    ValidationError,
)

# relative tolerance for "two points coincide modulo L"
COINCIDENCE_TOL = 1e-9

MAX_POINTS = {0: None, 1: 4, 2: 8}


@dataclass(frozen=True, eq=False)
class Lattice:
    """A lattice of rank 0, 1 or 2 spanned by ``generators`` (rows)."""

    rank: int
    generators: np.ndarray = field(default=None)

    def __post_init__(self):
        gens = np.zeros((0, 3)) if self.generators is None else np.asarray(self.generators, float)
        gens = gens.reshape(-1, 3) if gens.size else np.zeros((0, 3))
        object.__setattr__(self, "generators", gens)
        gens.setflags(write=False)

    @classmethod
    def from_generators(cls, generators) -> "Lattice":
        gens = np.asarray(generators, float).reshape(-1, 3) if len(generators) else np.zeros((0, 3))
        return cls(rank=gens.shape[0], generators=gens)

    # -- structure ---------------------------------------------------------

    def check(self) -> None:
        """Raise DegenerateLattice unless the generators span a rank-``rank`` lattice."""
        if self.rank not in (0, 1, 2):
            raise DegenerateLattice(f"rank must be 0, 1 or 2 (got {self.rank})")
        if self.generators.shape != (self.rank, 3):
            raise DegenerateLattice(
                f"expected {self.rank} generators in R^3, got array of shape {self.generators.shape}"
            )
        if self.rank == 0:
            return
        gram = self.generators @ self.generators.T
        scale = np.max(np.diag(gram))
        if scale <= 0 or np.linalg.det(gram) <= 1e-12 * scale**self.rank:
            raise DegenerateLattice("generators are linearly dependent")

    @property
    def gram(self) -> np.ndarray:
        return self.generators @ self.generators.T

    @property
    def cell_measure(self) -> float:
        """Length of the generator (rank 1) or area of the unit cell (rank 2)."""
        if self.rank == 0:
            return 1.0
        return float(np.sqrt(np.linalg.det(self.gram)))

    @property
    def axis(self) -> np.ndarray:
        """Unit vector along the lattice (rank 1) or normal to its plane (rank 2)."""
        if self.rank == 1:
            v = self.generators[0]
            return v / np.linalg.norm(v)
        if self.rank == 2:
            n = np.cross(self.generators[0], self.generators[1])
            return n / np.linalg.norm(n)
        return np.array([0.0, 0.0, 1.0])

    @property
    def transverse_axis(self) -> np.ndarray:
        """Polar axis used for the monopole charts (the Dirac strings lie along it).

        Rank 2 uses the plane normal. Rank 1 uses a fixed direction orthogonal
        to the generator, rank 0 uses e_3.
        """
        if self.rank == 2:
            return self.axis
        if self.rank == 1:
            u = self.axis
            trial = np.eye(3)[int(np.argmin(np.abs(u)))]
            w = trial - (trial @ u) * u
            return w / np.linalg.norm(w)
        return np.array([0.0, 0.0, 1.0])

    def reciprocal(self) -> np.ndarray:
        """Dual generators b_i with b_i . v_j = 2 pi delta_ij, lying in span(v)."""
        if self.rank == 0:
            return np.zeros((0, 3))
        return 2 * np.pi * np.linalg.solve(self.gram, self.generators)

    # -- coordinates -------------------------------------------------------

    def lattice_coords(self, x) -> np.ndarray:
        """Coefficients of the orthogonal projection of ``x`` onto span(v)."""
        x = np.asarray(x, float)
        if self.rank == 0:
            return np.zeros(x.shape[:-1] + (0,))
        return np.linalg.solve(self.gram, self.generators @ x[..., None])[..., 0]

    def reduce(self, x) -> np.ndarray:
        """Canonical representative with lattice coordinates in [-1/2, 1/2)."""
        x = np.asarray(x, float)
        if self.rank == 0:
            return x.copy()
        c = self.lattice_coords(x)
        shift = np.floor(c + 0.5)
        return x - shift @ self.generators

    def translates(self, width: int = 2) -> np.ndarray:
        """Lattice vectors with integer coordinates in [-width, width]."""
        if self.rank == 0:
            return np.zeros((1, 3))
        ks = np.array(list(itertools.product(range(-width, width + 1), repeat=self.rank)), float)
        return ks @ self.generators

    def distance(self, x, y) -> np.ndarray:
        """Quotient distance: minimum Euclidean distance over lattice translates."""
        d = self.reduce(np.asarray(x, float) - np.asarray(y, float))
        if self.rank == 0:
            return np.linalg.norm(d, axis=-1)
        shifted = d[..., None, :] + self.translates(2)
        return np.min(np.linalg.norm(shifted, axis=-1), axis=-1)

    def antipodal(self, x) -> np.ndarray:
        return self.reduce(-np.asarray(x, float))

    def fixed_points(self) -> np.ndarray:
        """The points with 2x in L, one reduced representative each (2**rank of them)."""
        if self.rank == 0:
            return np.zeros((1, 3))
        eps = np.array(list(itertools.product((0, 1), repeat=self.rank)), float)
        return self.reduce(0.5 * eps @ self.generators)

    def far_coordinate(self, x) -> np.ndarray:
        """Radial coordinate of the asymptotic end: |x|, the distance to the
        lattice line through 0, or the height above the lattice plane."""
        x = np.asarray(x, float)
        if self.rank == 0:
            return np.linalg.norm(x, axis=-1)
        u = self.axis
        along = x @ u
        if self.rank == 1:
            return np.linalg.norm(x - along[..., None] * u, axis=-1)
        return np.abs(along)


def reduce(lattice: Lattice, x) -> np.ndarray:
    return lattice.reduce(x)


def quotient_distance(lattice: Lattice, x, y) -> np.ndarray:
    return lattice.distance(x, y)


def fixed_points(lattice: Lattice) -> np.ndarray:
    return lattice.fixed_points()


def antipodal(lattice: Lattice, x) -> np.ndarray:
    return lattice.antipodal(x)


@dataclass(frozen=True, eq=False)
class Singularity:
    """A point where h blows up.

    ``charge`` is the coefficient k in the local model h ~ alpha + k/(2r):
    +1 at each of +-p_i and -4 at each q_j. It also equals the flux.
    """

    name: str
    kind: str
    center: np.ndarray
    charge: int

    @property
    def flux(self) -> int:
        return self.charge


@dataclass(frozen=True, eq=False)
class Scene:
    """Lattice, the non-fixed points p_i (one per +- pair) and the collapsing
    parameter epsilon. The fixed points q_j are derived from the lattice."""

    lattice: Lattice
    points_p: np.ndarray
    epsilon: float = 1e-3

    def __post_init__(self):
        p = np.array(self.points_p, float).reshape(-1, 3) if np.size(self.points_p) else np.zeros((0, 3))
        if self.lattice.rank and self.lattice.generators.shape == (self.lattice.rank, 3):
            p = self.lattice.reduce(p)
        p.setflags(write=False)
        object.__setattr__(self, "points_p", p)

    @property
    def n(self) -> int:
        return self.points_p.shape[0]

    @property
    def fixed_points_q(self) -> np.ndarray:
        return self.lattice.fixed_points()

    @property
    def length_scale(self) -> float:
        if self.lattice.rank == 0:
            return max(1.0, float(np.max(np.linalg.norm(self.points_p, axis=-1), initial=0.0)))
        return float(np.max(np.linalg.norm(self.lattice.generators, axis=-1)))

    def singularities(self) -> list[Singularity]:
        """All centres on the double cover: q_0.., then p_0+, p_0-, p_1+, ..."""
        out = [Singularity(f"q{j}", "q", q, -4) for j, q in enumerate(self.fixed_points_q)]
        for i, p in enumerate(self.points_p):
            out.append(Singularity(f"p{i}+", "p", p, 1))
            out.append(Singularity(f"p{i}-", "p", self.lattice.antipodal(p), 1))
        return out

    def singularity(self, name: str) -> Singularity:
        for s in self.singularities():
            if s.name == name:
                return s
        raise KeyError(f"no singularity named {name!r}")

    def with_epsilon(self, epsilon: float) -> "Scene":
        return Scene(self.lattice, self.points_p, epsilon)


def validate_scene(scene: Scene) -> list[SceneError]:
    """Return the list of violated scene invariants (empty when valid)."""
    lat = scene.lattice
    try:
        lat.check()
    except DegenerateLattice as exc:
        return [exc]
    errors: list[SceneError] = []
    if not scene.epsilon > 0:
        errors.append(SceneError(f"epsilon must be positive (got {scene.epsilon})"))
    bound = MAX_POINTS[lat.rank]
    if bound is not None and scene.n > bound:
        errors.append(TooManyPoints(f"rank {lat.rank} allows at most {bound} points, got {scene.n}"))
    tol = COINCIDENCE_TOL * scene.length_scale
    q = scene.fixed_points_q
    p = scene.points_p
    for i in range(scene.n):
        if np.min(lat.distance(p[i], q)) < tol:
            errors.append(PointOnFixedLocus(f"p{i} = {p[i].tolist()} is a fixed point of x -> -x"))
        for k in range(i):
            if lat.distance(p[i], p[k]) < tol or lat.distance(p[i], -p[k]) < tol:
                errors.append(DuplicatePoint(f"p{i} coincides with +-p{k} modulo the lattice"))
    return errors


def check_scene(scene: Scene) -> Scene:
    """Raise ValidationError listing every violated invariant; return the scene otherwise."""
    errors = validate_scene(scene)
    if errors:
        raise ValidationError(errors)
    return scene
