"""The Z2-invariant harmonic function h of a scene, its local constants alpha
and its far-field behaviour.

    h = -4 sum_j G(x - q_j) + sum_i (G(x - p_i) + G(x + p_i))

so that h ~ alpha_j - 2/r near q_j and h ~ alpha_i + 1/(2r) near +-p_i.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from ..errors import AtSingularity, ExtrapolationUnstable, PoorFit
from ..fits import FitResult, linear_fit
from ..geometry import Scene, Singularity
from .lattice_sums import GreensParams, make_greens


def far_field_beta(lattice) -> float:
    """Lattice constant of the far-field expansion: 1/a (rank 1), pi/A (rank 2)."""
    if lattice.rank == 1:
        return 1.0 / lattice.cell_measure
    if lattice.rank == 2:
        return math.pi / lattice.cell_measure
    return 1.0


@dataclass(eq=False)
class HarmonicData:
    """Scene plus Green's evaluator; alphas are computed once on first use."""

    scene: Scene
    params: GreensParams = field(default_factory=GreensParams)

    def __post_init__(self):
        self.greens = make_greens(self.scene.lattice, self.params)
        self.singularities = self.scene.singularities()
        self._centers = np.array([s.center for s in self.singularities])
        self._charges = np.array([s.charge for s in self.singularities], float)
        self._alphas: dict[str, float] = {}
        self._lock = threading.Lock()

    @property
    def lattice(self):
        return self.scene.lattice

    @property
    def epsilon(self) -> float:
        return self.scene.epsilon

    @property
    def beta(self) -> float:
        return far_field_beta(self.lattice)

    @property
    def total_charge(self) -> int:
        """Sum of the charges k: 2n - 4 * #q. The far field is -beta * this."""
        return int(round(self._charges.sum()))

    def with_epsilon(self, epsilon: float) -> "HarmonicData":
        """Same h and alphas (they do not depend on epsilon)."""
        other = HarmonicData.__new__(HarmonicData)
        other.__dict__.update(self.__dict__)
        other.scene = self.scene.with_epsilon(epsilon)
        return other

    def singularity(self, name) -> Singularity:
        if isinstance(name, Singularity):
            return name
        for s in self.singularities:
            if s.name == name:
                return s
        raise KeyError(f"no singularity named {name!r}")

    # -- h and its gradient -------------------------------------------------

    def _sum(self, x, fn, skip=None, want_vector=False):
        X = np.asarray(x, float)
        shape = X.shape[:-1]
        X = X.reshape(-1, 3)
        out = np.zeros(X.shape if want_vector else X.shape[0])
        for idx, (c, k) in enumerate(zip(self._centers, self._charges)):
            if idx == skip:
                continue
            out += k * fn(X - c)
        return out.reshape(shape + ((3,) if want_vector else ()))

    def h(self, x):
        return self._sum(x, self.greens.value)

    def grad_h(self, x):
        return self._sum(x, self.greens.gradient, want_vector=True)

    def h_eps(self, x):
        return 1.0 + self.epsilon * self.h(x)

    # -- local data at a singularity ------------------------------------------

    def _index(self, s) -> int:
        s = self.singularity(s)
        return self.singularities.index(s)

    def h_regular(self, s, x, center=None):
        """h(x) - k_s/(2|x - c|), analytic near c (used inside the model ball).

        ``center`` may be any lattice image of c_s; it defaults to c_s.
        """
        i = self._index(s)
        c, k = self._centers[i], self._charges[i]
        if center is not None:
            c = np.asarray(center, float)
        X = np.asarray(x, float)
        rest = self._sum(X, self.greens.value, skip=i)
        return rest + k * self.greens.regular(X - c)

    def grad_h_regular(self, s, x, center=None):
        i = self._index(s)
        c, k = self._centers[i], self._charges[i]
        if center is not None:
            c = np.asarray(center, float)
        X = np.asarray(x, float)
        rest = self._sum(X, self.greens.gradient, skip=i, want_vector=True)
        return rest + k * self.greens.regular_gradient(X - c)

    def h_and_grad_regular(self, s, x, center=None):
        """(h_regular, grad_h_regular) from a single pass over the lattice sums."""
        i = self._index(s)
        c, k = self._centers[i], self._charges[i]
        if center is not None:
            c = np.asarray(center, float)
        X = np.asarray(x, float)
        shape = X.shape[:-1]
        X = X.reshape(-1, 3)
        val = np.zeros(X.shape[0])
        grad = np.zeros_like(X)
        for idx, (ci, ki) in enumerate(zip(self._centers, self._charges)):
            if idx == i:
                v, g = self.greens.regular_value_and_gradient(X - c)
                ki = k
            else:
                v, g = self.greens.value_and_gradient(X - ci)
            val += ki * v
            grad += ki * g
        return val.reshape(shape), grad.reshape(shape + (3,))

    def alpha(self, s) -> float:
        """Constant term of h at s (exact evaluation of the regular part)."""
        s = self.singularity(s)
        value = self._alphas.get(s.name)
        if value is None:
            with self._lock:
                value = self._alphas.get(s.name)
                if value is None:
                    value = float(self.h_regular(s, s.center))
                    self._alphas[s.name] = value
        return value

    @property
    def alphas(self) -> dict[str, float]:
        return {s.name: self.alpha(s) for s in self.singularities}

    def h_model(self, s, x):
        """alpha_s + k_s/(2 r_s)."""
        s = self.singularity(s)
        r = np.linalg.norm(np.asarray(x, float) - s.center, axis=-1)
        return self.alpha(s) + s.charge / (2 * r)

    def g_difference(self, s, x):
        """h - h^s, harmonic across c_s."""
        return self.h_regular(s, x) - self.alpha(s)

    def model_radius(self, s) -> float:
        """Largest radius about s free of other singularities and of images of s."""
        s = self.singularity(s)
        lat = self.lattice
        d = []
        for t in self.singularities:
            if t is s:
                continue
            d.append(float(lat.distance(s.center, t.center)))
        if lat.rank:
            d.extend(np.linalg.norm(lat.generators, axis=-1).tolist())
        return min(d) if d else math.inf

    # -- far field -------------------------------------------------------------

    def far_remainder(self, x):
        """h minus its leading far-field term.

        rank 0: h - (2n - 4)/(2|x|); rank 1: h - beta (8 - 2n) log rho;
        rank 2: h - beta (16 - 2n) |z|. Evaluated without cancelling large terms.
        """
        X = np.asarray(x, float)
        shape = X.shape[:-1]
        X = X.reshape(-1, 3)
        lat = self.lattice
        out = np.zeros(X.shape[0])
        if lat.rank == 0:
            r = np.linalg.norm(X, axis=-1)
            for c, k in zip(self._centers, self._charges):
                d = np.linalg.norm(X - c, axis=-1)
                # 1/|x-c| - 1/|x| in cancellation-free form
                out += 0.5 * k * (2 * X @ c - c @ c) / (r * d * (r + d))
            return out.reshape(shape)
        u = lat.axis
        if lat.rank == 1:
            perp = X - np.outer(X @ u, u)
            rho2 = np.einsum("ij,ij->i", perp, perp)
            for c, k in zip(self._centers, self._charges):
                cp = c - (c @ u) * u
                ratio = (cp @ cp - 2 * perp @ cp) / rho2
                out += k * (-0.5 * np.log1p(ratio) / lat.cell_measure + self.greens.far_tail(X - c))
            return out.reshape(shape)
        A = lat.cell_measure
        z = X @ u
        for c, k in zip(self._centers, self._charges):
            cz = c @ u
            out += k * (-(math.pi / A) * (np.abs(z - cz) - np.abs(z)) + self.greens.far_tail(X - c))
        return out.reshape(shape)

    def grad_far_remainder(self, x):
        X = np.asarray(x, float)
        shape = X.shape[:-1]
        X = X.reshape(-1, 3)
        lat = self.lattice
        out = np.zeros_like(X)
        if lat.rank == 0:
            r = np.linalg.norm(X, axis=-1)[:, None]
            for c, k in zip(self._centers, self._charges):
                d = np.linalg.norm(X - c, axis=-1)[:, None]
                # x/r^3 - (x-c)/d^3 with d - r = (c.c - 2x.c)/(d + r)
                d_minus_r = (c @ c - 2 * X @ c)[:, None] / (d + r)
                factor = d_minus_r * (d * d + d * r + r * r) / (r**3 * d**3)
                out += 0.5 * k * (X * factor + c / d**3)
            return out.reshape(shape + (3,))
        u = lat.axis
        if lat.rank == 1:
            perp = X - np.outer(X @ u, u)
            rho2 = np.einsum("ij,ij->i", perp, perp)[:, None]
            a = lat.cell_measure
            for c, k in zip(self._centers, self._charges):
                cp = c - (c @ u) * u
                dp = perp - cp
                d2 = np.einsum("ij,ij->i", dp, dp)[:, None]
                out += k * (-(dp / d2 - perp / rho2) / a + self.greens.far_tail_gradient(X - c))
            return out.reshape(shape + (3,))
        A = lat.cell_measure
        z = X @ u
        for c, k in zip(self._centers, self._charges):
            cz = c @ u
            dz = -(math.pi / A) * (np.sign(z - cz) - np.sign(z))
            out += k * (dz[:, None] * u[None, :] + self.greens.far_tail_gradient(X - c))
        return out.reshape(shape + (3,))

    def leading_far_coefficient(self) -> float:
        """c (rank 0, h ~ c/r), beta(8-2n) (rank 1) or beta(16-2n) (rank 2)."""
        if self.lattice.rank == 0:
            return 0.5 * self.total_charge
        return -self.beta * self.total_charge


def h_eval(data: HarmonicData, x):
    X = np.asarray(x, float)
    d = np.min([data.lattice.distance(X, s.center) for s in data.singularities], axis=0)
    if np.any(d == 0):
        raise AtSingularity("h evaluated at a singularity")
    return data.h(X)


def h_eps(data: HarmonicData, x):
    return 1.0 + data.epsilon * h_eval(data, x)


def alpha_at(data: HarmonicData, s, radius=None, direction=None, tol=None) -> float:
    """Extrapolate h - k/(2r) to r = 0 along a line through s.

    The two opposite rays are averaged, which removes odd powers of r, and
    three radii r, r/2, r/4 are combined by Richardson extrapolation in r^2.
    """
    s = data.singularity(s)
    if direction is None:
        direction = np.array([0.48, -0.6, 0.64])
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    R = data.model_radius(s)
    r0 = radius if radius is not None else 0.01 * (R if math.isfinite(R) else 1.0)
    radii = r0 / np.array([1.0, 2.0, 4.0])
    pts = np.concatenate([s.center + radii[:, None] * d, s.center - radii[:, None] * d])
    # subtract the pole at the rounded displacement actually evaluated
    f = data.h(pts) - s.charge / (2 * np.linalg.norm(pts - s.center, axis=-1))
    sym = 0.5 * (f[:3] + f[3:])
    # one Richardson step eliminates r^2, the second r^4
    lvl1 = (4 * sym[1:] - sym[:-1]) / 3
    est = (16 * lvl1[1] - lvl1[0]) / 15
    residual = abs(est - lvl1[1])
    if tol is None:
        tol = 1e-6 * max(1.0, abs(est))
    if not np.isfinite(est) or residual > tol:
        raise ExtrapolationUnstable(f"Richardson residual {residual:.3g} exceeds {tol:.3g} at {s.name}")
    return float(est)


def far_field_fit(data: HarmonicData, direction, radii) -> FitResult:
    """Fit the leading far-field behaviour of h along a ray from the origin.

    rank 0: h = c/r + O(r^-3); reports c and the exponent of h - c/r.
    rank 1: h = A log rho + C + D rho^-2; reports A and C.
    rank 2: h = A z + C; reports A and C over the given heights.
    ``extra['remainder_exponent']`` (rank 0) or ``extra['remainder_slope']``
    (rank 2, slope of log|h - A z - C| in z) describe the remainder.
    """
    lat = data.lattice
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    radii = np.asarray(radii, float)
    pts = radii[:, None] * d
    if lat.rank == 0:
        r = np.linalg.norm(pts, axis=-1)
        h = data.h(pts)
        # c from a weighted fit of r h = c + e r^-2
        c_fit = linear_fit(r**-2.0, r * h)
        c = c_fit.intercept
        rem = np.abs(h - c / r)
        if np.any(rem <= 0) or not np.all(np.isfinite(rem)):
            raise PoorFit("zero far-field remainder; pick another ray")
        expo = linear_fit(np.log(r), np.log(rem))
        result = FitResult(slope=c, intercept=0.0, stderr=c_fit.stderr, r_squared=c_fit.r_squared,
                           window=radii.tolist())
        result.extra["remainder_exponent"] = expo.slope
        result.extra["remainder_stderr"] = expo.stderr
        return result
    u = lat.axis
    if lat.rank == 1:
        rho = np.linalg.norm(pts - np.outer(pts @ u, u), axis=-1)
        h = data.h(pts)
        M = np.stack([np.log(rho), np.ones_like(rho), rho**-2.0], axis=1)
        coef, *_ = np.linalg.lstsq(M, h, rcond=None)
        resid = h - M @ coef
        result = _from_lstsq(coef, resid, M, radii)
        rem = np.abs(data.far_remainder(pts))
        if np.all(rem > 0):
            result.extra["remainder_exponent"] = linear_fit(np.log(rho), np.log(rem)).slope
        return result
    z = np.abs(pts @ u)
    h = data.h(pts)
    M = np.stack([z, np.ones_like(z)], axis=1)
    coef, *_ = np.linalg.lstsq(M, h, rcond=None)
    resid = h - M @ coef
    result = _from_lstsq(coef, resid, M, radii)
    rem = np.abs(data.far_remainder(pts))
    if np.all(rem > 0):
        result.extra["remainder_slope"] = linear_fit(z, np.log(rem)).slope
    return result


def _from_lstsq(coef, resid, M, radii):
    n, p = M.shape
    dof = max(n - p, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.pinv(M.T @ M)
    y = M @ coef + resid
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    res = FitResult(slope=float(coef[0]), intercept=float(coef[1]), stderr=float(np.sqrt(cov[0, 0])),
                    r_squared=r2, window=list(map(float, radii)))
    res.extra["coefficients"] = [float(c) for c in coef]
    res.extra["max_residual"] = float(np.max(np.abs(resid)))
    return res
