"""Position-dependent coupling matrices and adiabatic-elimination reductions.

The effective 1D equation solved everywhere in the package is

    (hbar^2 kx^2 / 2m) phi = [p_x^2 / 2m + (hbar/2) M(x)] phi

with ``kx`` the ground-channel longitudinal wavenumber.  ``M`` (rad/s) is
complex symmetric: Rabi couplings off the diagonal, mirror potentials and
effective detunings on it, and ``-i*gamma`` on the quenched level.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .profiles import GaussianProfile
from .scheme import ChannelSet, LaserField, SchemeConfig, SchemeKind

TRUNCATION_WIDTHS = 8.0
# box used when every Gaussian is switched off
_EMPTY_BOX_HALF_WIDTH = 1e-6


@dataclass(frozen=True)
class PotentialMatrix:
    """``M(x) = diag(const_diag) + sum of Gaussian entries``.

    Each term ``(i, j, profile)`` with ``i != j`` is placed symmetrically at
    (i, j) and (j, i).  Terms with zero peak are ignored.
    """

    const_diag: np.ndarray
    terms: tuple = ()
    truncation: float = TRUNCATION_WIDTHS

    def __post_init__(self):
        diag = np.asarray(self.const_diag, dtype=complex)
        object.__setattr__(self, "const_diag", diag)
        live = tuple((i, j, p) for i, j, p in self.terms if p.peak != 0.0)
        for i, j, _ in live:
            if not (0 <= i < len(diag) and 0 <= j < len(diag)):
                raise IndexError(f"term ({i}, {j}) outside a {len(diag)}-channel matrix")
        object.__setattr__(self, "terms", live)

    @property
    def n(self) -> int:
        return len(self.const_diag)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((x.size, self.n, self.n), dtype=complex)
        out[:, np.arange(self.n), np.arange(self.n)] = self.const_diag
        for i, j, prof in self.terms:
            v = prof(x)
            out[:, i, j] += v
            if i != j:
                out[:, j, i] += v
        return out

    @property
    def sigma_min(self) -> float:
        if not self.terms:
            return _EMPTY_BOX_HALF_WIDTH
        return min(p.width for _, _, p in self.terms)

    def box(self) -> tuple[float, float]:
        """Interaction box outside which every Gaussian counts as zero."""
        if not self.terms:
            return -_EMPTY_BOX_HALF_WIDTH, _EMPTY_BOX_HALF_WIDTH
        smax = max(p.width for _, _, p in self.terms)
        lo = min(p.center for _, _, p in self.terms) - self.truncation * smax
        hi = max(p.center for _, _, p in self.terms) + self.truncation * smax
        return lo, hi

    def reflected(self) -> PotentialMatrix:
        """The potential mirrored through x = 0."""
        return replace(self, terms=tuple((i, j, p.reflected()) for i, j, p in self.terms))

    def off_diagonal_terms(self):
        return [(i, j, p) for i, j, p in self.terms if i != j]


def _profile(field: LaserField | None, on: bool) -> GaussianProfile | None:
    if field is None or not on:
        return None
    return field.profile


def _terms(entries):
    return tuple((i, j, p) for i, j, p in entries if p is not None)


def assemble_two_level(config: SchemeConfig, delta3d) -> PotentialMatrix:
    """3x3 matrix: diag (W1, W2 - 2 d2, -2 (d2 + d3) - i gamma), couplings OmegaP, OmegaQ.

    ``delta3d`` holds (d2, d3) or the full per-channel array with a leading 0.
    """
    if config.kind is not SchemeKind.TWO_LEVEL:
        raise ValueError("assemble_two_level needs a two-level scheme")
    d = np.asarray(delta3d, dtype=float)
    d2, d3 = (d[-2], d[-1])
    on = config.pumping_on
    diag = np.array([0.0, -2 * d2, -2 * (d2 + d3) - 1j * config.effective_gamma])
    terms = _terms([
        (0, 0, config.mirror1 if on else None),
        (1, 1, config.mirror2 if on else None),
        (0, 1, _profile(config.pump, on)),
        (1, 2, _profile(config.quench, config.quench_on)),
    ])
    return PotentialMatrix(diag, terms)


def assemble_three_level(config: SchemeConfig, delta3d) -> PotentialMatrix:
    """4x4 matrix of the STIRAP scheme; no direct 1-4 coupling."""
    if config.kind is not SchemeKind.THREE_LEVEL:
        raise ValueError("assemble_three_level needs a three-level scheme")
    d = np.asarray(delta3d, dtype=float)
    d2, d3, d4 = d[-3], d[-2], d[-1]
    on = config.pumping_on
    diag = np.array([
        0.0,
        -2 * d2,
        -2 * (d2 + d3),
        -2 * (d2 + d3 + d4) - 1j * config.effective_gamma,
    ])
    terms = _terms([
        (0, 0, config.mirror1 if on else None),
        (0, 1, _profile(config.pump, on)),
        (1, 2, _profile(config.stokes, on)),
        (2, 3, _profile(config.quench, config.quench_on)),
    ])
    return PotentialMatrix(diag, terms)


def assemble(config: SchemeConfig, channels: ChannelSet) -> PotentialMatrix:
    if config.kind is SchemeKind.TWO_LEVEL:
        return assemble_two_level(config, channels.delta3d)
    return assemble_three_level(config, channels.delta3d)


def mirror_from_detuned_laser(omega: GaussianProfile, delta: float) -> GaussianProfile:
    """Effective mirror ``W(x) = Omega(x)**2 / (2 Delta)`` of a far-detuned laser.

    The square of a Gaussian of width s is a Gaussian of width s/sqrt(2).
    """
    if delta == 0:
        raise ValueError("adiabatic elimination needs a non-zero detuning")
    return omega.squared().scaled(1.0 / (2.0 * delta))


@dataclass(frozen=True)
class ComplexQuenchPotential:
    """``W_eff = (2 d - i gamma) Omega_Q(x)^2 / (4 d^2 + gamma^2)``."""

    omega: GaussianProfile
    delta3d: float
    gamma: float

    @property
    def _denominator(self) -> float:
        return 4 * self.delta3d**2 + self.gamma**2

    def gamma_eff(self, x):
        return self.gamma * self.omega(x) ** 2 / self._denominator

    def real_part(self, x):
        return 2 * self.delta3d * self.omega(x) ** 2 / self._denominator

    def __call__(self, x):
        return self.real_part(x) - 1j * self.gamma_eff(x)

    @property
    def peak_gamma_eff(self) -> float:
        return self.gamma * self.omega.peak**2 / self._denominator


def quench_effective(omega_q: GaussianProfile, delta3d_3: float, gamma: float) -> ComplexQuenchPotential:
    if gamma < 0:
        raise ValueError("decay rate must be non-negative")
    if gamma == 0 and delta3d_3 == 0:
        raise ValueError("complex potential undefined for gamma = 0 at zero detuning")
    return ComplexQuenchPotential(omega_q, float(delta3d_3), float(gamma))


def absorption_condition(omega_q_peak, gamma, delta3d_3, sigma, v_x, beta=3.0) -> bool:
    """Crossing time sigma/v_x exceeds beta lifetimes 1/gamma_eff."""
    if not (v_x > 0 and sigma > 0):
        raise ValueError("need v_x > 0 and sigma > 0")
    denom = 4 * delta3d_3**2 + gamma**2
    if denom == 0:
        return False
    return gamma * omega_q_peak**2 / denom * sigma / v_x > beta


@dataclass(frozen=True)
class Reduction:
    config: SchemeConfig
    validity_ratio: float  # max Rabi peak / |2 Delta_P|; small means the reduction holds


def reduce_three_to_two(config: SchemeConfig) -> Reduction:
    """Eliminate the far-detuned intermediate level of the STIRAP scheme.

    Produces the two-level scheme with mirrors ``OmegaP^2/2DeltaP`` (ground) and
    ``OmegaS^2/2DeltaP`` (level 3), coupling ``OmegaP OmegaS / 2DeltaP``,
    effective wavenumber ``kP - kS`` and detuning ``DeltaP - DeltaS``.
    """
    if config.kind is not SchemeKind.THREE_LEVEL:
        raise ValueError("reduction applies to the three-level scheme")
    if config.mirror1 is not None and config.mirror1.peak != 0:
        raise ValueError("reduction assumes no ground-state mirror laser (W = 0)")
    atom = config.atom
    delta_p = config.pump.detuning(atom)
    if delta_p == 0:
        raise ValueError("reduction needs a non-zero pump detuning")
    pump, stokes = config.pump, config.stokes
    scale = 1.0 / (2.0 * delta_p)
    w1 = pump.profile.squared().scaled(scale)
    w3 = stokes.profile.squared().scaled(scale)
    omega = (pump.profile * stokes.profile).scaled(scale)
    v_eff = pump.y_sign * pump.v0 + stokes.y_sign * stokes.v0
    eff_pump = LaserField(
        profile=omega,
        v0=abs(v_eff),
        dv=pump.dv - stokes.dv,
        y_sign=1 if v_eff >= 0 else -1,
    )
    reduced = SchemeConfig(
        kind=SchemeKind.TWO_LEVEL,
        pump=eff_pump,
        quench=config.quench,
        gamma=config.gamma,
        mirror1=w1,
        mirror2=w3,
        atom=atom,
        quench_on=config.quench_on,
        pumping_on=config.pumping_on,
    )
    ratio = max(abs(pump.profile.peak), abs(stokes.profile.peak)) / abs(2 * delta_p)
    return Reduction(reduced, ratio)
