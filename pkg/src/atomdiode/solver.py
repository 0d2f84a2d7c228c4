"""Coupled-channel scattering for ``phi'' = [(m/hbar) M(x) - kx**2] phi``.

The interaction box is cut into sectors of constant matrix (Simpson average
of the potential over the sector).  Each sector's Dirichlet-to-Neumann map is
obtained from power series of ``sqrt(z) coth sqrt(z)`` and
``sqrt(z) csch sqrt(z)`` plus repeated length doubling for strongly closed
channels, so no eigendecomposition and no exponentially growing solution is
ever formed.  The log-derivative is carried from the far edge, where it is
fixed by the outgoing-wave condition, back to the incidence edge.

Amplitudes are referenced at the box edges: the incoming wave in channel
``alpha`` is ``exp(i k (x - x_edge))`` and outgoing waves are
``R_beta exp(-i k_beta (x - x_edge))`` on the incidence side and
``T_beta exp(i k_beta (x - x_far))`` on the other.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .fields import PotentialMatrix
from .params import CM_PER_S
from .scheme import ChannelSet, Incidence

GRAZING_SPEED = 0.05 * CM_PER_S  # m/s, slowest accepted longitudinal speed
NEAR_THRESHOLD = 1e-3  # |kx_beta| * sigma_min below this flags the result
CONVERGENCE_TOL = 1e-6
CONDITION_LIMIT = 1e12
# phase advance per sector of the fastest oscillating local mode
OSCILLATION_STEP = 1.0
RESOLUTION_PER_WIDTH = 50
MIN_POINTS = 100
_CHUNK = 4096


class ScatteringError(RuntimeError):
    """Base class of solver failures."""


class NonConvergence(ScatteringError):
    def __init__(self, message, delta=float("nan")):
        super().__init__(message)
        self.delta = delta


class IllConditionedMatching(ScatteringError):
    def __init__(self, message, condition=float("inf")):
        super().__init__(message)
        self.condition = condition


class ClosedIncidentChannel(ScatteringError):
    """The incident channel does not propagate asymptotically."""


class GrazingIncidence(ClosedIncidentChannel):
    """Longitudinal speed below the grazing cut-off."""


@dataclass(frozen=True)
class SolverGrid:
    """Uniform sector grid over the truncation box."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("empty box")
        if self.n < MIN_POINTS:
            raise ValueError(f"grid needs at least {MIN_POINTS} sectors, got {self.n}")

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n + 1)

    def refined(self, factor: int = 2) -> SolverGrid:
        return replace(self, n=self.n * factor)

    @classmethod
    def with_step(cls, x_min, x_max, h) -> SolverGrid:
        n = max(MIN_POINTS, int(math.ceil((x_max - x_min) / h)))
        return cls(x_min, x_max, n)


def local_wavenumber_max(potential: PotentialMatrix, channels: ChannelSet, samples=2001) -> float:
    """Largest oscillatory wavenumber of ``W(x)`` over the box (1/m)."""
    lo, hi = potential.box()
    x = np.linspace(lo, hi, samples)
    w = channels.atom.m_over_hbar * potential(x) - channels.kx_incident**2 * np.eye(potential.n)
    kappa = np.sqrt(np.linalg.eigvals(w).astype(complex))
    k_box = np.max(np.abs(kappa.imag))
    return float(max(k_box, np.max(np.abs(channels.kx.real))))


def default_grid(potential: PotentialMatrix, channels: ChannelSet,
                 oscillation_step: float = OSCILLATION_STEP) -> SolverGrid:
    """Step ``min(oscillation_step / k_max, sigma_min / 50)``, at least 100 sectors."""
    lo, hi = potential.box()
    k = local_wavenumber_max(potential, channels)
    h = potential.sigma_min / RESOLUTION_PER_WIDTH
    if k > 0:
        h = min(h, oscillation_step / k)
    return SolverGrid.with_step(lo, hi, h)


@dataclass(frozen=True)
class ScatteringResult:
    """Amplitudes for a single incident channel and flux-weighted probabilities.

    ``R`` and ``T`` are indexed by outgoing channel.  For right incidence
    ``R`` still means "back to the incidence side".
    """

    R: np.ndarray
    T: np.ndarray
    kx: np.ndarray
    channel: int
    from_left: bool
    grid: SolverGrid
    error_estimate: float = float("nan")
    flags: tuple = ()

    @property
    def weights(self) -> np.ndarray:
        return self.kx.real / self.kx[self.channel].real

    @property
    def PR(self) -> np.ndarray:
        return self.weights * np.abs(self.R) ** 2

    @property
    def PT(self) -> np.ndarray:
        return self.weights * np.abs(self.T) ** 2

    @property
    def total(self) -> float:
        return float(self.PR.sum() + self.PT.sum())

    @property
    def absorption(self) -> float:
        return 1.0 - self.total

    @property
    def near_threshold(self) -> bool:
        return "near-threshold" in self.flags


def _sector_matrices(potential, channels, xs):
    # Simpson average of W over [x_i, x_i+1] from values at edges and midpoints
    vals = potential(xs)
    avg = (vals[0:-2:2] + 4.0 * vals[1:-1:2] + vals[2::2]) / 6.0
    w = channels.atom.m_over_hbar * avg
    idx = np.arange(potential.n)
    w[:, idx, idx] -= channels.kx_incident**2
    return w


def _propagate(potential, channels, grid, y, p):
    """Run the kernel over every sector, far edge first."""
    edges = grid.edges
    h = grid.h
    doubled = 0
    for stop in range(grid.n, 0, -_CHUNK):
        start = max(0, stop - _CHUNK)
        xs = np.linspace(edges[start], edges[stop], 2 * (stop - start) + 1)
        w = _sector_matrices(potential, channels, xs)[::-1].copy()
        doubled += _kernels.propagate(w, h, y, p, _kernels.COTH_SERIES, _kernels.CSCH_SERIES)
    return doubled


def _check_incident(channels: ChannelSet, alpha: int):
    if not 0 <= alpha < channels.n:
        raise IndexError(f"incident channel {alpha} out of range")
    if not channels.is_open(alpha):
        raise ClosedIncidentChannel(f"channel {alpha} is closed (kx = {channels.kx[alpha]})")
    speed = channels.kx[alpha].real / channels.atom.m_over_hbar
    if speed < GRAZING_SPEED:
        raise GrazingIncidence(f"longitudinal speed {speed:.3g} m/s below grazing cut-off")


def solve_scattering(potential: PotentialMatrix, channels: ChannelSet, incidence: Incidence,
                     grid: SolverGrid | None = None) -> ScatteringResult:
    """Reflection and transmission amplitudes for one incident channel.

    Right incidence (``incidence.w < 0``) is solved as left incidence on the
    mirrored potential.
    """
    alpha = incidence.channel
    _check_incident(channels, alpha)
    if potential.n != channels.n:
        raise ValueError("potential and channel set disagree on the channel count")
    if not incidence.from_left:
        potential = potential.reflected()
    if grid is None:
        grid = default_grid(potential, channels)

    n = channels.n
    ik = np.diag(1j * channels.kx)
    y = ik.copy()
    p = np.eye(n, dtype=complex)
    _propagate(potential, channels, grid, y, p)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(p))):
        raise IllConditionedMatching("log-derivative propagation hit a singular sector")

    a = y + ik
    scale = 1.0 / np.max(np.abs(a), axis=1)
    cond = np.linalg.cond(scale[:, None] * a)
    if not cond < CONDITION_LIMIT:
        raise IllConditionedMatching(f"matching condition number {cond:.3g}", cond)
    r = np.linalg.solve(a, (ik - y)[:, alpha])
    t = p @ (r + np.eye(n)[alpha])

    flags = []
    if np.any(np.abs(channels.kx) * potential.sigma_min < NEAR_THRESHOLD):
        flags.append("near-threshold")
    return ScatteringResult(r, t, channels.kx.copy(), alpha, incidence.from_left, grid,
                            flags=tuple(flags))


def _max_change(a: ScatteringResult, b: ScatteringResult) -> float:
    return float(max(np.max(np.abs(a.PR - b.PR)), np.max(np.abs(a.PT - b.PT))))


def verify_convergence(result: ScatteringResult, potential: PotentialMatrix, channels: ChannelSet,
                       incidence: Incidence, tol: float = CONVERGENCE_TOL,
                       max_refinements: int = 4) -> ScatteringResult:
    """Halve the step until probabilities move by at most ``tol``."""
    prev = result
    delta = float("nan")
    for _ in range(max_refinements):
        new = solve_scattering(potential, channels, incidence, prev.grid.refined())
        delta = _max_change(prev, new)
        if delta <= tol:
            return replace(new, error_estimate=delta)
        prev = new
    raise NonConvergence(f"probabilities still change by {delta:.3g} after "
                         f"{max_refinements} refinements", delta)


def truncation_sensitivity(potential: PotentialMatrix, channels: ChannelSet, incidence: Incidence,
                           widths=(8.0, 10.0)) -> float:
    """Probability change when the truncation box is widened.

    Compared with the refinement change of :func:`verify_convergence` this tells
    whether an error is due to the step or to cutting off the Gaussian tails.
    """
    results = []
    for wdt in widths:
        pot = replace(potential, truncation=wdt)
        base = default_grid(pot if incidence.from_left else pot.reflected(), channels)
        # same step for both boxes so only the truncation differs
        h = default_grid(replace(potential, truncation=widths[0]), channels).h
        grid = SolverGrid.with_step(base.x_min, base.x_max, h)
        results.append(solve_scattering(pot, channels, incidence, grid))
    return _max_change(results[0], results[-1])


def layered_scalar(ksq: np.ndarray, thickness: np.ndarray, k_in: complex, k_out: complex):
    """Oracle: ``(r, t)`` of a stack of constant layers for a single channel."""
    ksq = np.ascontiguousarray(ksq, dtype=complex)
    thickness = np.ascontiguousarray(thickness, dtype=float)
    return _kernels.layered_reflection(ksq, thickness, complex(k_in), complex(k_out))


def scalar_oracle(profile_sum, m_over_hbar: float, kx: float, const: complex, x_min: float,
                  x_max: float, layers: int):
    """Single-channel ``(r, t)`` for ``phi'' = [(m/hbar)(const + V(x)) - kx**2] phi``.

    ``profile_sum`` maps x to V(x) in rad/s.  Each layer uses the potential at
    its midpoint.
    """
    edges = np.linspace(x_min, x_max, layers + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    ksq = kx**2 - m_over_hbar * (const + np.asarray(profile_sum(mid), dtype=complex))
    k_out = np.sqrt(complex(kx**2 - m_over_hbar * const))
    if k_out.imag < 0 or (k_out.imag == 0 and k_out.real < 0):
        k_out = -k_out
    return layered_scalar(ksq, np.diff(edges), k_out, k_out)
