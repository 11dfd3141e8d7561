"""Casimir momentum of a chiral molecule in a magnetic field (magnetochiral vacuum effect)."""

from .errors import CasimirError
from .params import ModelParams, anisotropy, default_params, derive_params

__all__ = ["CasimirError", "ModelParams", "anisotropy", "default_params", "derive_params"]
