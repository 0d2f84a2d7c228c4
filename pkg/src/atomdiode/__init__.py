"""Multichannel scattering of laser-driven atoms and atom-diode phase diagrams."""
from .params import CONSTANTS, NEON, Atom
from .profiles import GaussianProfile
from .scheme import Incidence, LaserField, SchemeConfig, SchemeKind, build_channels
from .fields import PotentialMatrix, assemble
from .solver import ScatteringResult, SolverGrid, solve_scattering, verify_convergence

__all__ = [
    "CONSTANTS", "NEON", "Atom", "GaussianProfile", "Incidence", "LaserField",
    "SchemeConfig", "SchemeKind", "build_channels", "PotentialMatrix", "assemble",
    "ScatteringResult", "SolverGrid", "solve_scattering", "verify_convergence",
]
