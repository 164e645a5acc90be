"""Exact and numerical checks that the vacuum Wigner function majorizes
nonnegative Fock-state mixtures."""

from .errors import PhasemajError
from .fockspace import FockMixture, fock_radial, mixture_radial, vacuum
from .majorize import GridConfig, majorizes_continuous, majorizes_discrete, wigner_entropy
from .polyexp import Poly, PolyExpFn

__version__ = "0.1.0"

__all__ = [
    "FockMixture",
    "GridConfig",
    "PhasemajError",
    "Poly",
    "PolyExpFn",
    "fock_radial",
    "majorizes_continuous",
    "majorizes_discrete",
    "mixture_radial",
    "vacuum",
    "wigner_entropy",
]
