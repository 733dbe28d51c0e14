"""anisolab: a numerical laboratory for anisotropic mixed-norm
function-space quasi-norms on sampled periodic functions."""

from . import anisotropy, cli, filterbank, grid, lab, mixed_norm, smoothness, spaces
from .anisotropy import (
    Anisotropy,
    DecomposedAnisotropy,
    decompose,
    dilate,
    isotropic,
    new_anisotropy,
    quasi_norm,
    vector_quasi_norm,
)
from .grid import GridFunction, TorusGrid, make_grid, random_bandlimited
from .mixed_norm import SpaceSpec, mixed_lp, power_weight
from .spaces import NormValue, besov_norm, lift, lq_of_inner_norm, script_f_norm, tl_norm

__all__ = [
    "Anisotropy",
    "DecomposedAnisotropy",
    "GridFunction",
    "NormValue",
    "SpaceSpec",
    "TorusGrid",
    "anisotropy",
    "besov_norm",
    "cli",
    "decompose",
    "dilate",
    "filterbank",
    "grid",
    "isotropic",
    "lab",
    "lift",
    "lq_of_inner_norm",
    "make_grid",
    "mixed_lp",
    "mixed_norm",
    "new_anisotropy",
    "power_weight",
    "quasi_norm",
    "random_bandlimited",
    "script_f_norm",
    "smoothness",
    "spaces",
    "tl_norm",
    "vector_quasi_norm",
]

__version__ = "0.1.0"
