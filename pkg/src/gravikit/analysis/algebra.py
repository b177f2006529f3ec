"""Pointwise algebra of triples: the trace-free projection, the pairing
Lambda(sigma) = sigma ^ omega and the constant term F(0)."""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTriple
from ..forms import wedge_matrix


def tf(P):
    """(P + P^T)/2 - tr(P)/3 Id (acts on the matrix factor; the volume factor rides along)."""
    P = np.asarray(P, float)
    sym = 0.5 * (P + np.swapaxes(P, -1, -2))
    tr = np.trace(P, axis1=-2, axis2=-1)
    return sym - tr[..., None, None] / 3.0 * np.eye(3)


def wedge_coefficients(triple, mu=1.0):
    """P_ij with omega_i ^ omega_j = P_ij mu."""
    return wedge_matrix(triple) / np.asarray(mu, float)[..., None, None]


def lambda_apply(u, triple, mu=1.0):
    """Lambda(sigma) for sigma_i = sum_j u_ij omega_j: the matrix (u P) with P = omega^omega/mu."""
    return np.asarray(u, float) @ wedge_coefficients(triple, mu)


def lambda_solve(triple, rhs, mu=1.0):
    """Coefficients u with sum_j u_ij omega_j ^ omega_k = rhs_ik mu, i.e. u = rhs P^-1."""
    P = wedge_coefficients(triple, mu)
    eig = np.linalg.eigvalsh(0.5 * (P + np.swapaxes(P, -1, -2)))
    if np.any(eig[..., 0] <= 1e-14 * np.abs(eig[..., -1])):
        raise DegenerateTriple("wedge Gram matrix is not positive definite")
    # u P = rhs  <=>  P^T u^T = rhs^T
    ut = np.linalg.solve(np.swapaxes(P, -1, -2), np.swapaxes(np.asarray(rhs, float), -1, -2))
    return np.swapaxes(ut, -1, -2)


def f0_from_triple(triple, omega_weight, mu=1.0):
    """(1/2) Omega^-2 Lambda^-1 Tf(omega ^ omega) = (1/2) Omega^-2 (Id - tr(P)/3 P^-1).

    The result does not depend on the choice of mu.
    """
    P = wedge_coefficients(triple, mu)
    u = lambda_solve(triple, tf(P), mu)
    w = np.asarray(omega_weight, float)
    return 0.5 * u / (w * w)[..., None, None]
