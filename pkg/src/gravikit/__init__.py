"""Numerical construction and verification of Gibbons-Hawking gluing data on
flat quotients R^3/L of lattice rank 0, 1 and 2."""

from .errors import ConfigError, GravikitError, NumericError
from .geometry import Lattice, Scene, Singularity, check_scene, validate_scene
from .greens import GreensParams, HarmonicData
from .gluing import GluingParams, assembled_triple, region_classify

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "GluingParams", "GravikitError", "GreensParams", "HarmonicData", "Lattice",
    "NumericError", "Scene", "Singularity", "__version__", "assembled_triple", "check_scene",
    "region_classify", "validate_scene",
]
