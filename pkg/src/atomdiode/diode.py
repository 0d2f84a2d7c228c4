"""Diodic verdicts for scattering results and the analytic breakdown boundaries."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .fields import assemble
from .params import CONSTANTS, NEON, Atom
from .scheme import Incidence, SchemeConfig, SchemeKind, build_channels, effective_detunings_two_level, \
    effective_detunings_three_level
from .solver import ClosedIncidentChannel, ScatteringResult, SolverGrid, solve_scattering, verify_convergence

THRESHOLD = 0.01


class Verdict(str, enum.Enum):
    """Cell verdicts; the value is the one-letter code used in diagram files."""

    FULL_REFLECTION = "R"
    FULL_TRANSMISSION = "T"
    FULL_ABSORPTION = "A"
    DIODE_WORKS = "D"
    OTHER = "O"
    FAILED = "X"
    UNDEFINED = "U"


class Reason(str, enum.Enum):
    REFLECTION = "A"  # full reflection instead of transmission
    QUENCH = "B"  # transmission works but absorption fails
    PUMP = "C"  # pumping into the target state fails
    UNDEFINED = "U"  # one of the stages could not be classified


@dataclass(frozen=True)
class Classification:
    """Verdict plus the criterion value it was decided on.

    For ``OTHER`` the budget is the smallest of the three criterion values.
    """

    verdict: Verdict
    budget: float
    threshold: float = THRESHOLD


def criterion_budgets(result: ScatteringResult, target: int) -> dict:
    """Left-hand sides of the reflection, transmission and absorption criteria."""
    pr, pt = result.PR, result.PT
    alpha = result.channel
    total = pr.sum() + pt.sum()
    return {
        Verdict.FULL_REFLECTION: float(total - 2 * pr[alpha] + 1.0),
        Verdict.FULL_TRANSMISSION: float(total - 2 * pt[target] + 1.0),
        Verdict.FULL_ABSORPTION: float(total),
    }


def classify(result: ScatteringResult, target: int, threshold: float = THRESHOLD) -> Classification:
    """Full reflection, full transmission into ``target`` or full absorption.

    Each criterion needs its dominant probability above ``1 - threshold``, so at
    most one can hold for ``threshold <= 0.5``.  Near-threshold results are
    ``UNDEFINED``.
    """
    if not 0 < threshold <= 0.5:
        raise ValueError("threshold must lie in (0, 0.5]")
    budgets = criterion_budgets(result, target)
    if result.near_threshold:
        return Classification(Verdict.UNDEFINED, min(budgets.values()), threshold)
    for verdict, value in budgets.items():
        if value < threshold:
            return Classification(verdict, value, threshold)
    return Classification(Verdict.OTHER, min(budgets.values()), threshold)


def solve_config(config: SchemeConfig, incidence: Incidence, verify: bool = False,
                 grid: SolverGrid | None = None) -> ScatteringResult:
    """Build channels and potential for ``config`` and solve."""
    channels = build_channels(config, incidence)
    potential = assemble(config, channels)
    result = solve_scattering(potential, channels, incidence, grid)
    if verify:
        result = verify_convergence(result, potential, channels, incidence)
    return result


@dataclass(frozen=True)
class CombinedVerdict:
    """Outcome of the diode stage followed by the quench stage.

    ``works`` holds iff the pumping stage fully transmits into the target state
    and the quench stage fully absorbs it.
    """

    works: bool
    reason: Reason | None
    transmission: Classification
    absorption: Classification | None = None
    transmission_result: ScatteringResult | None = None
    absorption_result: ScatteringResult | None = None
    monolithic: Classification | None = None

    def __post_init__(self):
        if self.works != (self.reason is None):
            raise ValueError("a working diode has no breakdown reason and vice versa")

    @property
    def decisive(self) -> tuple[Classification, ScatteringResult | None]:
        """The classification and result that settled the verdict."""
        if self.absorption is not None:
            return self.absorption, self.absorption_result
        return self.transmission, self.transmission_result


def classify_combined(config: SchemeConfig, incidence: Incidence, threshold: float = THRESHOLD,
                      verify: bool = False, monolithic: bool = False) -> CombinedVerdict:
    """Two-stage diode verdict with breakdown reason (precedence A, then C, then B).

    Stage one solves the pumping lasers and mirrors with the quench switched off,
    incident in the ground state.  Stage two solves the quench laser alone with
    the wave incident in the target state, carrying the transverse momentum it
    picked up from the pump.  With ``monolithic`` the full configuration with
    quench on is solved as well and its absorption verdict is attached.
    """
    if not incidence.from_left:
        raise ValueError("the combined diode verdict is defined for left incidence")
    target = config.target_channel
    stage1 = solve_config(config.without_quench(), replace(incidence, channel=0), verify)
    c1 = classify(stage1, target, threshold)
    mono = None
    if monolithic:
        full = solve_config(replace(config, quench_on=True, pumping_on=True),
                            replace(incidence, channel=0), verify)
        mono = classify(full, target, threshold)

    if c1.verdict is not Verdict.FULL_TRANSMISSION:
        reason = {
            Verdict.FULL_REFLECTION: Reason.REFLECTION,
            Verdict.UNDEFINED: Reason.UNDEFINED,
        }.get(c1.verdict, Reason.PUMP)
        return CombinedVerdict(False, reason, c1, None, stage1, None, mono)

    try:
        stage2 = solve_config(config.quench_only(), replace(incidence, channel=target), verify)
    except ClosedIncidentChannel:
        # full transmission means the target channel is open; only the
        # grazing cut-off can land here
        return CombinedVerdict(False, Reason.UNDEFINED, c1, None, stage1, None, mono)
    c2 = classify(stage2, target, threshold)
    if c2.verdict is Verdict.FULL_ABSORPTION:
        return CombinedVerdict(True, None, c1, c2, stage1, stage2, mono)
    reason = Reason.UNDEFINED if c2.verdict is Verdict.UNDEFINED else Reason.QUENCH
    return CombinedVerdict(False, reason, c1, c2, stage1, stage2, mono)


# analytic boundaries; speeds in m/s throughout

def boundary_full_reflection(theta, mirror_peak: float, atom: Atom = NEON):
    """Largest speed fully reflected by a mirror of height ``mirror_peak`` (rad/s)."""
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) >= np.pi / 2):
        raise ValueError("|theta| must be below 90 degrees")
    v = np.sqrt(CONSTANTS.hbar * mirror_peak / atom.mass) / np.cos(theta)
    return v if v.ndim else float(v)


@dataclass(frozen=True)
class SpeedBound:
    """Feasible speeds of ``a v**2 + b v + c >= 0`` restricted to ``v > 0``."""

    a: float
    b: float
    c: float

    def value(self, v):
        return self.a * v * v + self.b * v + self.c

    def feasible(self, v) -> bool:
        return self.value(v) >= 0

    @property
    def roots(self) -> tuple:
        """Positive real roots in increasing order."""
        a, b, c = self.a, self.b, self.c
        if abs(a) < 1e-15 * (abs(b) + abs(c) + 1e-300):
            cand = [] if b == 0 else [-c / b]
        else:
            disc = b * b - 4 * a * c
            if disc < 0:
                cand = []
            else:
                sq = math.sqrt(disc)
                # stable form avoiding cancellation
                qq = -0.5 * (b + math.copysign(sq, b))
                cand = [qq / a, c / qq] if qq != 0 else [-b / (2 * a)]
        return tuple(sorted(r for r in cand if r > 0))

    def intervals(self, v_max: float = math.inf) -> list:
        """Feasible speed intervals ``[(lo, hi), ...]`` inside ``(0, v_max]``."""
        edges = [0.0] + [r for r in self.roots if r < v_max] + [v_max]
        out = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            probe = 0.5 * (lo + hi) if math.isfinite(hi) else lo + 1.0 + abs(lo)
            if self.feasible(probe):
                if out and out[-1][1] == lo:
                    out[-1] = (out[-1][0], hi)
                else:
                    out.append((lo, hi))
        return out

    @property
    def ceiling(self) -> float | None:
        """Upper end of a bounded feasible interval that starts at zero speed."""
        iv = self.intervals()
        if iv and iv[0][0] == 0.0 and math.isfinite(iv[0][1]):
            return iv[0][1]
        return None

    @property
    def floor(self) -> float | None:
        """Lowest feasible speed if the feasible set does not contain zero."""
        iv = self.intervals()
        if iv and iv[0][0] > 0.0:
            return iv[0][0]
        return None


def boundary_left_two_level(theta: float, v_p0: float, dv_p: float, c: float = CONSTANTS.c) -> SpeedBound:
    """Speeds for which the pumped state propagates: ``v^2 cos^2 - 2 v0 v sin + 2 c dv - v0^2 >= 0``."""
    return SpeedBound(math.cos(theta) ** 2, -2.0 * v_p0 * math.sin(theta), 2.0 * c * dv_p - v_p0**2)


def boundary_left_three_level(theta: float, v_ps: float, dv_ps: float, c: float = CONSTANTS.c) -> SpeedBound:
    """Two-photon analogue with ``v_ps = v_P0 - v_S0`` and ``dv_ps = dv_P - dv_S``."""
    return boundary_left_two_level(theta, v_ps, dv_ps, c)


def lower_bound_for(config: SchemeConfig, theta: float) -> SpeedBound:
    """The left-incidence bound that applies to ``config``'s scheme."""
    if config.kind is SchemeKind.TWO_LEVEL:
        return boundary_left_two_level(theta, config.pump.y_sign * config.pump.v0, config.pump.dv)
    p, s = config.pump, config.stokes
    return boundary_left_three_level(theta, p.y_sign * p.v0 + s.y_sign * s.v0, p.dv - s.dv)


def absorption_boundary(config: SchemeConfig, theta: float, beta: float = 3.0,
                        v_max: float = 100.0) -> float | None:
    """Speed at which the crossing-time condition of the quench laser breaks.

    Uses the detuning of the quenched transition at the given angle with the
    photon wavenumbers taken as ``k0`` (detuning shift neglected).  Returns the
    lowest speed in ``(0, v_max]`` where the condition turns false, or None.
    """
    omega = config.quench.profile
    gamma = config.gamma
    sigma = omega.width
    cos_t = math.cos(theta)
    if omega.peak == 0 or gamma == 0:
        return 0.0

    def margin(v):
        inc = Incidence(v, theta)
        if config.kind is SchemeKind.TWO_LEVEL:
            d_last = effective_detunings_two_level(config, inc, exact=False)[-1]
        else:
            d_last = effective_detunings_three_level(config, inc, exact=False)[-1]
        g_eff = gamma * omega.peak**2 / (4 * d_last**2 + gamma**2)
        return g_eff * sigma - beta * v * cos_t

    speeds = np.geomspace(v_max * 1e-6, v_max, 400)
    vals = np.array([margin(v) for v in speeds])
    bad = np.nonzero(vals <= 0)[0]
    if bad.size == 0:
        return None
    i = bad[0]
    if i == 0:
        return float(speeds[0])
    return float(brentq(margin, speeds[i - 1], speeds[i], xtol=1e-12, rtol=1e-12))
