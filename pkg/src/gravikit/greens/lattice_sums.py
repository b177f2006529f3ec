"""Accelerated periodic Green's functions on R^3/L in monopole normalization.

The free kernel is G(x) = 1/(2|x|), so that Laplacian(G) = -2 pi delta. For
lattices of rank 1 and 2 the image sum diverges and is regularized so that

    rank 1:  G(x) + (1/a) log(rho) -> 0   as the transverse radius rho -> oo
    rank 2:  G(x) + (pi/A) |z|     -> 0   as the height z above the plane -> oo

with a the generator length and A the cell area.

Rank 1 uses two representations. Away from the lattice line, a
Fourier-Bessel series in the transverse radius is used. Near the line, the
central image is kept and the rest is expanded in even zonal harmonics with
zeta-function weights. Rank 2 uses the Ewald split into a real-space erfc
sum, a dual-lattice sum and the explicit linear zero mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import AtSingularity, TruncationNotConverged
from ..geometry import Lattice

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class GreensParams:
    """Accuracy controls for the lattice sums.

    ``real_space_cutoff`` is the real-space radius (rank 2) or the multipole
    order of the near-line expansion (rank 1). ``fourier_cutoff`` is the
    dual-lattice radius (rank 2) or the number of Bessel terms (rank 1).
    ``ewald_split`` is the Gaussian splitting width (rank 2). Unset values are
    chosen from the analytic tail bounds so that the truncation error stays
    below ``target_tol``.
    """

    target_tol: float = 1e-13
    real_space_cutoff: float | None = None
    fourier_cutoff: float | None = None
    ewald_split: float | None = None

    def __post_init__(self):
        if not self.target_tol > 0:
            raise ValueError("target_tol must be positive")


def _as_points(x):
    x = np.asarray(x, float)
    return x.reshape(-1, 3), x.shape[:-1]


class FreeGreens:
    """Rank 0: G(x) = 1/(2|x|)."""

    rank = 0

    def __init__(self, lattice: Lattice, params: GreensParams = GreensParams()):
        self.lattice = lattice
        self.params = params

    def value(self, x):
        X, shape = _as_points(x)
        r = np.linalg.norm(X, axis=-1)
        if np.any(r == 0):
            raise AtSingularity("Green's function evaluated at the pole")
        return (0.5 / r).reshape(shape)

    def gradient(self, x):
        X, shape = _as_points(x)
        r = np.linalg.norm(X, axis=-1)
        if np.any(r == 0):
            raise AtSingularity("Green's function evaluated at the pole")
        return (-0.5 * X / r[:, None] ** 3).reshape(shape + (3,))

    def value_and_gradient(self, x):
        return self.value(x), self.gradient(x)

    def regular_value_and_gradient(self, x):
        return self.regular(x), self.regular_gradient(x)

    def regular(self, x):
        """G(x) - 1/(2|x|): zero for the free kernel."""
        X, shape = _as_points(x)
        return np.zeros(X.shape[0]).reshape(shape)

    def regular_gradient(self, x):
        X, shape = _as_points(x)
        return np.zeros_like(X).reshape(shape + (3,))

    def far_tail(self, x):
        """G minus its leading far-field form, which is G itself here."""
        return self.value(x)

    def far_tail_gradient(self, x):
        return self.gradient(x)


class LineGreens:
    """Rank 1: periodic along one generator v of length a."""

    rank = 1
    # transverse radius (in units of a) where the two representations switch
    SWITCH = 0.3

    def __init__(self, lattice: Lattice, params: GreensParams = GreensParams()):
        self.lattice = lattice
        self.params = params
        self.a = float(np.linalg.norm(lattice.generators[0]))
        self.u = lattice.axis
        tol = params.target_tol
        a = self.a
        # near branch converges like (r/a)^l with r/a <= sqrt(SWITCH^2 + 1/4)
        q = math.hypot(self.SWITCH, 0.5)
        if params.real_space_cutoff is None:
            order = 2
            while 1.21 * q ** (order + 2) / (1 - q * q) / a > 0.1 * tol:
                order += 2
        else:
            order = int(params.real_space_cutoff)
            order -= order % 2
        if 1.21 * q ** (order + 2) / (1 - q * q) / a > tol:
            raise TruncationNotConverged(f"multipole order {order} leaves a tail above {tol:g}")
        self.order = order
        ls = np.arange(2, order + 1, 2)
        self._ls = ls
        self._zeta = special.zeta(ls + 1.0) / a ** (ls + 1.0)
        self._const = (np.euler_gamma - math.log(2 * a)) / a
        # Bessel branch converges like K0(2 pi m SWITCH)
        x0 = 2 * math.pi * self.SWITCH
        if params.fourier_cutoff is None:
            terms = 1
            while self._bessel_tail(terms, x0) > 0.1 * tol:
                terms += 1
        else:
            terms = int(params.fourier_cutoff)
        if self._bessel_tail(terms, x0) > tol:
            raise TruncationNotConverged(f"{terms} Bessel terms leave a tail above {tol:g}")
        self.terms = terms
        self._k = 2 * math.pi * np.arange(1, terms + 1) / a

    def _bessel_tail(self, terms, x0):
        # sum_{m > terms} (2/a)(K0 + K1)(m x0): covers value and gradient/k
        m = terms + 1
        lead = (special.k0(m * x0) + special.k1(m * x0)) * (2 / self.a)
        return lead / (1 - math.exp(-x0)) * (1 + 2 * math.pi * m / self.a)

    def _split(self, X):
        z = X @ self.u
        z = z - self.a * np.floor(z / self.a + 0.5)
        perp = X - np.outer(X @ self.u, self.u)
        return z, perp

    def _legendre(self, t):
        """P_l(t) and P'_l(t) for l = 0..order, shape (order+1, N)."""
        L = self.order
        P = np.empty((L + 1,) + t.shape)
        dP = np.empty_like(P)
        P[0], dP[0] = 1.0, 0.0
        P[1], dP[1] = t, 1.0
        for n in range(1, L):
            P[n + 1] = ((2 * n + 1) * t * P[n] - n * P[n - 1]) / (n + 1)
            dP[n + 1] = dP[n - 1] + (2 * n + 1) * P[n]
        return P, dP

    def _near_series(self, z, perp, want_grad):
        """sum over even l >= 2 of zeta(l+1) r^l P_l(z/r) / a^(l+1) and its gradient."""
        rho2 = np.einsum("ij,ij->i", perp, perp)
        r = np.sqrt(rho2 + z * z)
        safe = np.where(r > 0, r, 1.0)
        t = np.where(r > 0, z / safe, 0.0)
        P, dP = self._legendre(t)
        ls = self._ls
        rl = r[None, :] ** ls[:, None]
        val = np.einsum("l,ln->n", self._zeta, rl * P[ls])
        if not want_grad:
            return val, None
        rl1 = r[None, :] ** (ls[:, None] - 1)
        rl2 = r[None, :] ** (ls[:, None] - 2)
        dz = np.einsum("l,ln->n", self._zeta * ls, rl1 * P[ls - 1])
        drho = -np.einsum("l,ln->n", self._zeta, rl2 * dP[ls - 1])
        grad = dz[:, None] * self.u[None, :] + drho[:, None] * perp
        return val, grad

    def _bessel_series(self, z, rho, perp, want_grad):
        """(2/a) sum K0(k rho) cos(k z) and its gradient (rho > 0)."""
        kr = np.outer(rho, self._k)
        kz = np.outer(z, self._k)
        k0 = special.k0(kr)
        val = (2 / self.a) * np.sum(k0 * np.cos(kz), axis=1)
        if not want_grad:
            return val, None
        k1 = special.k1(kr)
        drho = -(2 / self.a) * np.sum(self._k * k1 * np.cos(kz), axis=1)
        dz = -(2 / self.a) * np.sum(self._k * k0 * np.sin(kz), axis=1)
        grad = (drho / rho)[:, None] * perp + dz[:, None] * self.u[None, :]
        return val, grad

    def _evaluate(self, X, want_grad, mode):
        """mode: 'value', 'regular' (minus 1/(2|X|)) or 'tail' (plus log(rho)/a)."""
        z, perp = self._split(X)
        rho = np.linalg.norm(perp, axis=-1)
        near = rho < self.SWITCH * self.a
        # displacement already the nearest image along the line
        native = np.abs(z - X @ self.u) <= 1e-12 * self.a
        # near-line points whose own pole is dropped analytically
        drop = near & native if mode == "regular" else np.zeros_like(near)
        val = np.empty(X.shape[0])
        grad = np.empty_like(X) if want_grad else None
        if np.any(near):
            zn, pn = z[near], perp[near]
            r = np.sqrt(zn * zn + rho[near] ** 2)
            keep = ~drop[near]
            if np.any(keep & (r == 0)):
                raise AtSingularity("Green's function evaluated at the pole")
            s, gs = self._near_series(zn, pn, want_grad)
            rs = np.where(r > 0, r, 1.0)
            v = s + self._const + np.where(keep, 0.5 / rs, 0.0)
            if mode == "tail":
                v = v + np.log(rho[near]) / self.a
            val[near] = v
            if want_grad:
                dvec = pn + zn[:, None] * self.u
                g = gs - np.where(keep[:, None], 0.5 * dvec / rs[:, None] ** 3, 0.0)
                if mode == "tail":
                    g = g + pn / (self.a * rho[near, None] ** 2)
                grad[near] = g
        far = ~near
        if np.any(far):
            zf, rf, pf = z[far], rho[far], perp[far]
            b, gb = self._bessel_series(zf, rf, pf, want_grad)
            val[far] = b if mode == "tail" else b - np.log(rf) / self.a
            if want_grad:
                grad[far] = gb if mode == "tail" else gb - pf / (self.a * rf[:, None] ** 2)
        if mode == "regular":
            rest = ~drop
            if np.any(rest):
                Xs = X[rest]
                rt = np.linalg.norm(Xs, axis=-1)
                val[rest] -= 0.5 / rt
                if want_grad:
                    grad[rest] += 0.5 * Xs / rt[:, None] ** 3
        return val, grad

    def value(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, False, "value")[0].reshape(shape)

    def gradient(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, True, "value")[1].reshape(shape + (3,))

    def value_and_gradient(self, x):
        X, shape = _as_points(x)
        v, g = self._evaluate(X, True, "value")
        return v.reshape(shape), g.reshape(shape + (3,))

    def regular_value_and_gradient(self, x):
        X, shape = _as_points(x)
        v, g = self._evaluate(X, True, "regular")
        return v.reshape(shape), g.reshape(shape + (3,))

    def regular(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, False, "regular")[0].reshape(shape)

    def regular_gradient(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, True, "regular")[1].reshape(shape + (3,))

    def far_tail(self, x):
        """G(x) + log(rho)/a, exponentially small in rho."""
        X, shape = _as_points(x)
        return self._evaluate(X, False, "tail")[0].reshape(shape)

    def far_tail_gradient(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, True, "tail")[1].reshape(shape + (3,))


def _plane_profile(G, z, kappa):
    """e^{Gz} erfc(G/2k + kz) + e^{-Gz} erfc(G/2k - kz) and its z-derivative,
    evaluated without overflow. G has shape (M,), z shape (N,)."""
    az = np.abs(z)[:, None]
    sgn = np.sign(z)[:, None]
    Gm = G[None, :]
    gauss = np.exp(-(Gm / (2 * kappa)) ** 2 - (kappa * az) ** 2)
    u = Gm / (2 * kappa) + kappa * az
    w = Gm / (2 * kappa) - kappa * az
    first = special.erfcx(u) * gauss
    decay = np.exp(-Gm * az)
    second = np.where(
        w >= 0,
        special.erfcx(np.abs(w)) * gauss,
        2 * decay - special.erfcx(np.abs(w)) * gauss,
    )
    f = first + second
    # d/d|z| of f; the Gaussian pieces cancel exactly
    df = Gm * (first - second) * sgn
    return f, df


class PlaneGreens:
    """Rank 2: periodic along two generators spanning a plane of cell area A."""

    rank = 2

    def __init__(self, lattice: Lattice, params: GreensParams = GreensParams()):
        self.lattice = lattice
        self.params = params
        self.n = lattice.axis
        self.A = lattice.cell_measure
        A = self.A
        tol = params.target_tol
        kappa = params.ewald_split or math.sqrt(math.pi / A)
        self.kappa = kappa
        gens = lattice.generators
        diag = max(np.linalg.norm(gens[0] + gens[1]), np.linalg.norm(gens[0] - gens[1]))
        self._diag = diag

        def real_tail(R):
            x = max(R - diag, 0.0)
            # (2 pi / A) * int_x^oo (erfc(k s) + 2 k s e^{-k^2 s^2}/sqrt(pi)) ds bounds value and gradient
            integ = math.exp(-(kappa * x) ** 2) / (kappa * SQRT_PI) - x * math.erfc(kappa * x)
            grad = math.exp(-(kappa * x) ** 2) / kappa
            return 2 * math.pi / A * (integ + grad)

        def dual_tail(Gc):
            b = np.linalg.norm(lattice.reciprocal(), axis=-1).max()
            y = max(Gc - b, 0.0) / (2 * kappa)
            base = 2 * kappa * (math.exp(-y * y) / SQRT_PI - y * math.erfc(y))
            return base * (1 + Gc)

        if params.real_space_cutoff is None:
            R = diag
            while real_tail(R) > 0.1 * tol:
                R += 0.25 * diag
        else:
            R = float(params.real_space_cutoff)
        if real_tail(R) > tol:
            raise TruncationNotConverged(f"real-space radius {R:g} leaves a tail above {tol:g}")
        if params.fourier_cutoff is None:
            Gc = 2 * math.pi / diag
            while dual_tail(Gc) > 0.1 * tol:
                Gc += math.pi / diag
        else:
            Gc = float(params.fourier_cutoff)
        if dual_tail(Gc) > tol:
            raise TruncationNotConverged(f"dual-lattice radius {Gc:g} leaves a tail above {tol:g}")
        self.real_cutoff = R
        self.fourier_cutoff = Gc
        self._images = self._lattice_points(gens, R + diag)
        B = lattice.reciprocal()
        G = self._lattice_points(B, Gc)
        G = G[np.linalg.norm(G, axis=-1) > 0]
        self._G = G
        self._Gn = np.linalg.norm(G, axis=-1)

    @staticmethod
    def _lattice_points(basis, radius):
        h = np.abs(np.linalg.det(basis @ basis.T)) ** 0.5
        heights = [h / np.linalg.norm(basis[1 - i]) for i in range(2)]
        m = [int(math.ceil(radius / heights[i])) + 1 for i in range(2)]
        k1, k2 = np.meshgrid(np.arange(-m[0], m[0] + 1), np.arange(-m[1], m[1] + 1), indexing="ij")
        pts = np.stack([k1.ravel(), k2.ravel()], 1) @ basis
        return pts[np.linalg.norm(pts, axis=-1) <= radius]

    def _evaluate(self, X, want_grad, mode):
        kappa, A = self.kappa, self.A
        Xr = self.lattice.reduce(X)
        native = np.all(np.isclose(Xr, X, rtol=0, atol=1e-12 * self._diag), axis=-1)
        z = Xr @ self.n
        D = Xr[:, None, :] - self._images[None, :, :]
        R = np.linalg.norm(D, axis=-1)
        centre = np.all(self._images == 0, axis=-1)
        at_pole = R[:, centre][:, 0] == 0
        if mode != "regular" and np.any(at_pole):
            raise AtSingularity("Green's function evaluated at the pole")
        if mode == "regular" and np.any(at_pole & ~native):
            raise AtSingularity("Green's function evaluated at a lattice image of the pole")
        Rs = np.where(R > 0, R, 1.0)
        real = np.where(R > 0, special.erfc(kappa * R) / Rs, 0.0)
        f, df = _plane_profile(self._Gn, z, kappa)
        phase = Xr @ self._G.T
        cosp, sinp = np.cos(phase), np.sin(phase)
        recip = (math.pi / A) * np.sum(cosp * f / self._Gn, axis=1)
        az = np.abs(z)
        zero_mode = -(2 * math.pi / A) * (az * special.erf(kappa * az) + np.exp(-(kappa * az) ** 2) / (kappa * SQRT_PI))
        if mode == "tail":
            zero_mode = (2 * math.pi / A) * (az * special.erfc(kappa * az) - np.exp(-(kappa * az) ** 2) / (kappa * SQRT_PI))
        total_real = np.sum(real, axis=1)
        r0 = R[:, centre][:, 0]
        if mode == "regular":
            # swap the central erfc(k r)/r for -erf(k r)/r, finite at r = 0
            small = kappa * r0 < 1e-2
            kr = kappa * r0
            series = -(2 * kappa / SQRT_PI) * (1 - kr**2 / 3 + kr**4 / 10 - kr**6 / 42)
            central = np.where(small, series, -special.erf(kr) / np.where(r0 > 0, r0, 1.0))
            # drop the central image before summing (no large cancellation)
            total_real = np.sum(real[:, ~centre], axis=1) + central
            # displacements that are not the nearest image keep every image
            rtrue = np.linalg.norm(X, axis=-1)
            fix = ~native
            if np.any(fix):
                total_real[fix] = np.sum(real[fix], axis=1) - 1.0 / rtrue[fix]
        val = 0.5 * (total_real + recip + zero_mode)
        if not want_grad:
            return val, None
        gauss = np.exp(-(kappa * R) ** 2)
        coef = np.where(R > 0, -(special.erfc(kappa * R) / Rs**2 + 2 * kappa / SQRT_PI * gauss / Rs) / Rs, 0.0)
        g_real = np.einsum("nm,nmi->ni", coef, D)
        if mode == "regular":
            kr = kappa * r0
            small = kr < 1e-2
            # gradient of -erf(k r)/r is s(r) X with s smooth at 0
            series = (2 * kappa / SQRT_PI) * (2 * kappa**2 / 3 - 4 * kappa**4 * r0**2 / 10 + 6 * kappa**6 * r0**4 / 42)
            rs = np.where(r0 > 0, r0, 1.0)
            exact = (special.erf(kr) / rs**2 - 2 * kappa / SQRT_PI * np.exp(-kr**2) / rs) / rs
            s = np.where(small, series, exact)
            g_real = np.einsum("nm,nmi->ni", coef[:, ~centre], D[:, ~centre]) + s[:, None] * Xr
            fix = ~native
            if np.any(fix):
                Xf = X[fix]
                rf = np.linalg.norm(Xf, axis=-1)
                full = np.einsum("nm,nmi->ni", coef[fix], D[fix])
                g_real[fix] = full + Xf / rf[:, None] ** 3
        g_par = -(math.pi / A) * (sinp * f / self._Gn) @ self._G
        g_perp = (math.pi / A) * np.sum(cosp * df / self._Gn, axis=1)
        if mode == "tail":
            g_zero = (2 * math.pi / A) * special.erfc(kappa * az) * np.sign(z)
        else:
            g_zero = -(2 * math.pi / A) * special.erf(kappa * z)
        grad = 0.5 * (g_real + g_par + (g_perp + g_zero)[:, None] * self.n[None, :])
        return val, grad

    def value(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, False, "value")[0].reshape(shape)

    def gradient(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, True, "value")[1].reshape(shape + (3,))

    def value_and_gradient(self, x):
        X, shape = _as_points(x)
        v, g = self._evaluate(X, True, "value")
        return v.reshape(shape), g.reshape(shape + (3,))

    def regular_value_and_gradient(self, x):
        X, shape = _as_points(x)
        v, g = self._evaluate(X, True, "regular")
        return v.reshape(shape), g.reshape(shape + (3,))

    def regular(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, False, "regular")[0].reshape(shape)

    def regular_gradient(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, True, "regular")[1].reshape(shape + (3,))

    def far_tail(self, x):
        """G(x) + (pi/A)|z|, exponentially small in |z|."""
        X, shape = _as_points(x)
        return self._evaluate(X, False, "tail")[0].reshape(shape)

    def far_tail_gradient(self, x):
        X, shape = _as_points(x)
        return self._evaluate(X, True, "tail")[1].reshape(shape + (3,))


def make_greens(lattice: Lattice, params: GreensParams | None = None):
    """Green's function evaluator matching the lattice rank."""
    params = params or GreensParams()
    lattice.check()
    return {0: FreeGreens, 1: LineGreens, 2: PlaneGreens}[lattice.rank](lattice, params)


def greens(lattice: Lattice, x, params: GreensParams | None = None):
    return make_greens(lattice, params).value(x)


def greens_grad(lattice: Lattice, x, params: GreensParams | None = None):
    return make_greens(lattice, params).gradient(x)
