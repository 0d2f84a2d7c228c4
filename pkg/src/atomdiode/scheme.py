"""Diode schemes, incidence kinematics and asymptotic channel wavenumbers.

Two schemes are supported:

* ``TWO_LEVEL``: ground |1>, excited |2> (pump), quench level |3> (decays).
  Channels carry transverse momenta ``ky``, ``ky + kP``, ``ky + kP + kQ``.
* ``THREE_LEVEL``: a STIRAP ladder |1> -pump- |2> -Stokes- |3> plus the quench
  level |4>.  Transverse momenta ``ky``, ``ky + kP``, ``ky + kP - kS``,
  ``ky + kP - kS + kQ``.

Channel indices are zero based in the API (index 0 is the ground state).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .params import CONSTANTS, NEON, Atom, CM_PER_S
from .profiles import GaussianProfile


class SchemeKind(str, enum.Enum):
    TWO_LEVEL = "two_level"
    THREE_LEVEL = "three_level"


@dataclass(frozen=True)
class LaserField:
    """A Gaussian laser sheet.

    ``v0`` is the photon recoil velocity (m/s), ``dv`` the detuning velocity
    (m/s) and ``y_sign`` the sign of the wavevector along y as it enters the
    internal-state phase factors.
    """

    profile: GaussianProfile
    v0: float = 0.0
    dv: float = 0.0
    y_sign: int = 1

    def __post_init__(self):
        if self.y_sign not in (1, -1):
            raise ValueError("y_sign must be +1 or -1")
        if self.v0 < 0:
            raise ValueError("recoil velocity must be non-negative")

    def detuning(self, atom: Atom = NEON) -> float:
        return atom.mass * CONSTANTS.c * self.dv / CONSTANTS.hbar

    def wavenumber(self, atom: Atom = NEON, exact: bool = True) -> float:
        """Signed wavenumber along y; ``exact`` adds the Delta/c shift."""
        k = atom.mass * self.v0 / CONSTANTS.hbar
        if exact:
            k += self.detuning(atom) / CONSTANTS.c
        return self.y_sign * k


@dataclass(frozen=True)
class SchemeConfig:
    kind: SchemeKind
    pump: LaserField
    quench: LaserField
    gamma: float = 0.0
    stokes: LaserField | None = None
    mirror1: GaussianProfile | None = None
    mirror2: GaussianProfile | None = None
    atom: Atom = field(default_factory=Atom)
    quench_on: bool = True
    pumping_on: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.gamma < 0:
            raise ValueError("decay rate must be non-negative")
        if self.kind is SchemeKind.THREE_LEVEL:
            if self.stokes is None:
                raise ValueError("three-level scheme needs a Stokes laser")
            if self.mirror2 is not None:
                raise ValueError("three-level scheme has a single mirror (mirror1)")

    @property
    def n_channels(self) -> int:
        return 3 if self.kind is SchemeKind.TWO_LEVEL else 4

    @property
    def target_channel(self) -> int:
        """Channel that a working diode transmits into (|2> or |3>)."""
        return 1 if self.kind is SchemeKind.TWO_LEVEL else 2

    @property
    def quenched_channel(self) -> int:
        return self.n_channels - 1

    @property
    def effective_gamma(self) -> float:
        return self.gamma if self.quench_on else 0.0

    def without_quench(self) -> SchemeConfig:
        return replace(self, quench_on=False)

    def quench_only(self) -> SchemeConfig:
        return replace(self, quench_on=True, pumping_on=False)


@dataclass(frozen=True)
class Incidence:
    """Signed speed ``w`` (m/s, >0 from the left), angle ``theta`` (rad)."""

    w: float
    theta: float
    channel: int = 0

    def __post_init__(self):
        if not abs(self.theta) < np.pi / 2:
            raise ValueError("incidence angle must satisfy |theta| < 90 deg")
        if self.w == 0:
            raise ValueError("incidence speed must be non-zero")

    @classmethod
    def from_cm_deg(cls, w_cm: float, theta_deg: float, channel: int = 0) -> Incidence:
        return cls(w_cm * CM_PER_S, np.deg2rad(theta_deg), channel)

    @property
    def speed(self) -> float:
        return abs(self.w)

    @property
    def from_left(self) -> bool:
        return self.w > 0

    def kx(self, atom: Atom = NEON) -> float:
        return atom.m_over_hbar * self.speed * np.cos(self.theta)

    def ky(self, atom: Atom = NEON) -> float:
        return atom.m_over_hbar * self.speed * np.sin(self.theta)


@dataclass(frozen=True)
class ChannelSet:
    """Per-channel kinematics of the effective 1D problem.

    ``diag`` is the asymptotic diagonal of the coupling matrix (rad/s) and
    ``kx`` the complex longitudinal wavenumbers, Im(kx) >= 0.
    """

    ky: np.ndarray
    delta3d: np.ndarray
    diag: np.ndarray
    kx: np.ndarray
    kx_incident: float
    atom: Atom = NEON

    @property
    def n(self) -> int:
        return len(self.kx)

    def is_open(self, j: int) -> bool:
        k = self.kx[j]
        return k.real > 0 and k.imag == 0


def effective_detunings_two_level(config: SchemeConfig, incidence: Incidence, exact=True):
    """Doppler- and recoil-shifted detunings (Delta3d_2, Delta3d_3) in rad/s."""
    atom = config.atom
    ky = incidence.ky(atom)
    kp = config.pump.wavenumber(atom, exact)
    kq = config.quench.wavenumber(atom, exact)
    r = CONSTANTS.hbar / (2 * atom.mass)
    d2 = config.pump.detuning(atom) - r * (2 * ky * kp + kp**2)
    d3 = config.quench.detuning(atom) - r * (2 * (ky + kp) * kq + kq**2)
    return d2, d3


def effective_detunings_three_level(config: SchemeConfig, incidence: Incidence, exact=True):
    """Detunings (Delta3d_2, Delta3d_3, Delta3d_4) in rad/s for the STIRAP ladder.

    The Stokes wavenumber enters with its sign ``y_sign`` (default -1), so
    ``ks`` below is ``-|kS|`` and the middle formula reads
    ``-Delta_S - hbar/2m (-2 (ky + kP) |kS| + kS**2)``.
    """
    atom = config.atom
    ky = incidence.ky(atom)
    kp = config.pump.wavenumber(atom, exact)
    ks = config.stokes.wavenumber(atom, exact)
    kq = config.quench.wavenumber(atom, exact)
    r = CONSTANTS.hbar / (2 * atom.mass)
    d2 = config.pump.detuning(atom) - r * (2 * ky * kp + kp**2)
    d3 = -config.stokes.detuning(atom) - r * (2 * (ky + kp) * ks + ks**2)
    d4 = config.quench.detuning(atom) - r * (2 * (ky + kp + ks) * kq + kq**2)
    return d2, d3, d4


def transverse_wavenumbers(config: SchemeConfig, incidence: Incidence, exact=True) -> np.ndarray:
    atom = config.atom
    kicks = [config.pump.wavenumber(atom, exact)]
    if config.kind is SchemeKind.THREE_LEVEL:
        kicks.append(config.stokes.wavenumber(atom, exact))
    kicks.append(config.quench.wavenumber(atom, exact))
    return incidence.ky(atom) + np.concatenate([[0.0], np.cumsum(kicks)])


def channel_wavenumbers(diag, kx_incident: float, atom: Atom = NEON) -> np.ndarray:
    """``sqrt(kx**2 - (m/hbar) diag_j)`` on the branch Im >= 0 (Re >= 0 if real)."""
    diag = np.asarray(diag, dtype=complex)
    rad = kx_incident**2 - atom.m_over_hbar * diag
    k = np.sqrt(rad)
    flip = (k.imag < 0) | ((k.imag == 0) & (k.real < 0))
    k = np.where(flip, -k, k)
    # channels without asymptotic shift propagate with the incident wavenumber
    return np.where(diag == 0, complex(kx_incident), k)


def asymptotic_diagonal(config: SchemeConfig, delta3d) -> np.ndarray:
    """Constant diagonal of the coupling matrix far from all lasers (rad/s)."""
    diag = -2.0 * np.cumsum(np.asarray(delta3d, dtype=float)).astype(complex)
    diag[-1] -= 1j * config.effective_gamma
    return diag


def build_channels(config: SchemeConfig, incidence: Incidence, exact=True) -> ChannelSet:
    atom = config.atom
    if config.kind is SchemeKind.TWO_LEVEL:
        d = effective_detunings_two_level(config, incidence, exact)
    else:
        d = effective_detunings_three_level(config, incidence, exact)
    delta3d = np.array((0.0,) + tuple(d))
    diag = asymptotic_diagonal(config, delta3d)
    kx = incidence.kx(atom)
    return ChannelSet(
        ky=transverse_wavenumbers(config, incidence, exact),
        delta3d=delta3d,
        diag=diag,
        kx=channel_wavenumbers(diag, kx, atom),
        kx_incident=kx,
        atom=atom,
    )
