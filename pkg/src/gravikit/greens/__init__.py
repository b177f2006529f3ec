"""Periodic Green's functions and the harmonic function h of a scene."""

from .harmonic import HarmonicData, alpha_at, far_field_beta, far_field_fit, h_eps, h_eval
from .lattice_sums import FreeGreens, GreensParams, LineGreens, PlaneGreens, greens, greens_grad, make_greens

__all__ = [
    "FreeGreens", "GreensParams", "HarmonicData", "LineGreens", "PlaneGreens", "alpha_at",
    "far_field_beta", "far_field_fit", "greens", "greens_grad", "h_eps", "h_eval", "make_greens",
]
