"""Exterior algebra in the coframe (dx1, dx2, dx3, dpsi).

1-forms are arrays (..., 4) or base arrays (..., 3); 2-forms are
antisymmetric arrays (..., 4, 4) or (..., 3, 3) holding the components
w_ab with w = sum_{a<b} w_ab dx^a ^ dx^b.
"""

from __future__ import annotations

import itertools

import numpy as np


def _levi(n):
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        eps[perm] = -1.0 if inv % 2 else 1.0
    return eps


LEVI3 = _levi(3)
LEVI4 = _levi(4)
PSI = 3


def base_star_vector(v):
    """The 2-form *(v . dx) on R^3, components eps_abc v_c."""
    return np.einsum("abc,...c->...ab", LEVI3, np.asarray(v, float))


def star_dx():
    """*dx_i for i = 1..3 as an array (3, 3, 3): index i, then the 2-form."""
    return LEVI3.copy()


def wedge11(a, b):
    """a ^ b for 1-forms, components a_i b_j - a_j b_i."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    return np.einsum("...i,...j->...ij", a, b) - np.einsum("...j,...i->...ij", a, b)


def wedge22(a, b):
    """Coefficient of dx1^dx2^dx3^dpsi in a ^ b for 4D 2-forms."""
    return 0.25 * np.einsum("abcd,...ab,...cd->...", LEVI4, a, b)


def wedge_matrix(triple):
    """M_ij = (omega_i ^ omega_j) / (dx1^dx2^dx3^dpsi) for a triple (..., 3, 4, 4)."""
    return 0.25 * np.einsum("abcd,...iab,...jcd->...ij", LEVI4, triple, triple)


def embed_base_2form(w):
    """Base 2-form (..., 3, 3) as a 4D 2-form with no dpsi legs."""
    w = np.asarray(w, float)
    out = np.zeros(w.shape[:-2] + (4, 4))
    out[..., :3, :3] = w
    return out


def embed_base_1form(a, dpsi=0.0):
    a = np.asarray(a, float)
    out = np.zeros(a.shape[:-1] + (4,))
    out[..., :3] = a
    out[..., 3] = dpsi
    return out


def d_of_1form_fd(field, x, step):
    """Central-difference exterior derivative of a psi-independent 1-form field.

    ``field`` maps points (N, 3) to (N, 4) or (N, 3). Returns (dA)_ab with
    a, b over the base directions plus psi (psi-derivatives vanish).
    """
    x = np.asarray(x, float).reshape(-1, 3)
    n = x.shape[0]
    parts = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        parts.append((x + e, x - e))
    pts = np.concatenate([p for pair in parts for p in pair])
    vals = np.asarray(field(pts))
    dim = vals.shape[-1]
    vals = vals.reshape(3, 2, n, dim)
    deriv = np.zeros((n, 4, dim))
    deriv[:, :3, :] = np.moveaxis((vals[:, 0] - vals[:, 1]) / (2 * step), 0, 1)
    # (dA)_ab = d_a A_b - d_b A_a
    full = np.zeros((n, 4, 4))
    full[:, :, :dim] = deriv
    out = full - np.swapaxes(full, 1, 2)
    return out[:, :dim, :dim] if dim == 3 else out


THREE_FORM_INDICES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


def d_of_2form_fd(field, x, step):
    """Central-difference exterior derivative of a psi-independent 4D 2-form field.

    ``field`` maps points (N, 3) to (N, ..., 4, 4). Returns the four
    components (dw)_abc for abc in THREE_FORM_INDICES, shape (N, ..., 4).
    """
    x = np.asarray(x, float).reshape(-1, 3)
    n = x.shape[0]
    pts = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = step
        pts.extend([x + e, x - e])
    vals = np.asarray(field(np.concatenate(pts)))
    vals = vals.reshape((3, 2, n) + vals.shape[1:])
    grads = (vals[:, 0] - vals[:, 1]) / (2 * step)  # (3, N, ..., 4, 4)
    zero = np.zeros_like(grads[0])
    D = [grads[0], grads[1], grads[2], zero]  # no psi dependence
    comps = []
    for a, b, c in THREE_FORM_INDICES:
        comps.append(D[a][..., b, c] + D[b][..., c, a] + D[c][..., a, b])
    return np.stack(comps, axis=-1)
