"""Physical constants and the velocity-unit conversions used by the presets.

Wavenumbers and detunings are quoted in the literature as velocities:
a photon wavenumber ``k0`` becomes the recoil velocity ``v0 = hbar*k0/m`` and
a detuning ``Delta`` becomes ``dv = hbar*Delta/(m*c)``.  Everything inside the
package is SI; cm/s and micrometres only appear at the config/output edges.
"""
from __future__ import annotations

from dataclasses import dataclass

import scipy.constants as sc

CM_PER_S = 1e-2  # m/s
MICRON = 1e-6  # m


@dataclass(frozen=True)
class Constants:
    hbar: float = sc.hbar
    c: float = sc.c


CONSTANTS = Constants()

NEON20_MASS = 3.3199e-26  # kg


@dataclass(frozen=True)
class Atom:
    mass: float = NEON20_MASS

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"atomic mass must be positive, got {self.mass!r}")

    @property
    def m_over_hbar(self) -> float:
        return self.mass / CONSTANTS.hbar


NEON = Atom()


def wavenumber_from_velocity(v0, atom: Atom = NEON):
    """Wavenumber (1/m) whose recoil velocity is ``v0`` (m/s)."""
    return atom.mass * v0 / CONSTANTS.hbar


def velocity_from_wavenumber(k, atom: Atom = NEON):
    return CONSTANTS.hbar * k / atom.mass


def detuning_from_velocity(dv, atom: Atom = NEON):
    """Angular detuning (rad/s) encoded by the detuning velocity ``dv`` (m/s)."""
    return atom.mass * CONSTANTS.c * dv / CONSTANTS.hbar


def velocity_from_detuning(delta, atom: Atom = NEON):
    return CONSTANTS.hbar * delta / (atom.mass * CONSTANTS.c)
