import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from atomdiode.diode import (CombinedVerdict, Reason, SpeedBound, Verdict, absorption_boundary,
                             boundary_full_reflection, boundary_left_three_level, boundary_left_two_level,
                             classify, classify_combined, criterion_budgets, lower_bound_for)
from atomdiode.params import CM_PER_S, CONSTANTS, NEON
from atomdiode.scheme import Incidence, build_channels
from atomdiode.solver import ScatteringResult, SolverGrid
from support import laser, zero_two_level

GRID = SolverGrid(-1e-4, 1e-4, 100)


def fake(pr, pt, kx=(1.0, 1.0, 1.0), channel=0, flags=()):
    kx = np.asarray(kx, dtype=complex)
    w = kx.real / kx[channel].real
    amp = lambda p: np.sqrt(np.divide(p, w, out=np.zeros(len(p)), where=w > 0)).astype(complex)
    return ScatteringResult(amp(np.asarray(pr, float)), amp(np.asarray(pt, float)), kx, channel, True,
                            GRID, flags=flags)


@pytest.mark.parametrize("pr,pt,verdict", [
    ([0.996, 0, 0], [0.004, 0, 0], Verdict.FULL_REFLECTION),
    ([0, 0, 0], [0.002, 0.998, 0], Verdict.FULL_TRANSMISSION),
    ([0.001, 0, 0], [0, 0.003, 0], Verdict.FULL_ABSORPTION),
    ([0.5, 0, 0], [0.5, 0, 0], Verdict.OTHER),
    ([0, 0, 0], [1.0, 0, 0], Verdict.OTHER),
    ([0, 0, 0], [0.0, 0.0, 1.0], Verdict.OTHER),
])
def test_classification_examples(pr, pt, verdict):
    assert classify(fake(pr, pt), target=1).verdict is verdict


def test_budgets_and_threshold_edges():
    res = fake([0.996, 0, 0], [0, 0, 0])
    b = criterion_budgets(res, 1)
    assert b[Verdict.FULL_REFLECTION] == pytest.approx(0.004)
    assert b[Verdict.FULL_ABSORPTION] == pytest.approx(0.996)
    assert classify(res, 1, threshold=0.01).verdict is Verdict.FULL_REFLECTION
    assert classify(res, 1, threshold=0.003).verdict is Verdict.OTHER
    with pytest.raises(ValueError):
        classify(res, 1, threshold=0.7)


def test_near_threshold_is_undefined():
    res = fake([0.999, 0, 0], [0, 0, 0], flags=("near-threshold",))
    assert classify(res, 1).verdict is Verdict.UNDEFINED


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=6, max_size=6), st.floats(0.001, 0.5))
def test_at_most_one_criterion_holds(raw, threshold):
    p = np.asarray(raw)
    p = p / max(1.0, p.sum())
    res = fake(p[:3], p[3:])
    holds = [v for v in criterion_budgets(res, 1).values() if v < threshold]
    assert len(holds) <= 1


def test_full_reflection_boundary_values():
    v0 = boundary_full_reflection(0.0, 4e7)
    assert v0 == pytest.approx(math.sqrt(CONSTANTS.hbar * 4e7 / NEON.mass))
    assert v0 / CM_PER_S == pytest.approx(35.6, abs=0.2)
    th = np.deg2rad(np.linspace(-80, 80, 33))
    v = boundary_full_reflection(th, 4e7)
    np.testing.assert_allclose(v, v[::-1], rtol=1e-14)
    half = th[th >= 0]
    assert np.all(np.diff(boundary_full_reflection(half, 4e7)) > 0)
    assert boundary_full_reflection(0.3, 4 * 4e7) == pytest.approx(2 * boundary_full_reflection(0.3, 4e7))
    with pytest.raises(ValueError):
        boundary_full_reflection(math.pi / 2, 4e7)


def test_speed_bound_intervals():
    b = SpeedBound(1.0, -3.0, 2.0)  # (v-1)(v-2)
    assert b.roots == pytest.approx((1.0, 2.0))
    assert b.intervals() == [(0.0, pytest.approx(1.0)), (pytest.approx(2.0), math.inf)]
    assert b.ceiling == pytest.approx(1.0) and b.floor is None
    down = SpeedBound(-1.0, 0.0, 4.0)
    assert down.ceiling == pytest.approx(2.0)
    up = SpeedBound(1.0, 0.0, -4.0)
    assert up.floor == pytest.approx(2.0)


def test_lower_bound_normal_incidence():
    v0 = 3 * CM_PER_S
    b = boundary_left_two_level(0.0, v0, 0.0)
    assert b.floor == pytest.approx(v0)
    # blue detuning lowers the threshold
    assert boundary_left_two_level(0.0, v0, 1e-12).floor < v0
    assert boundary_left_two_level(0.0, v0, 1e-11).floor is None


def test_three_level_bound_reduces_to_two_level():
    a = boundary_left_three_level(0.4, 0.01, 2e-11)
    b = boundary_left_two_level(0.4, 0.01, 2e-11)
    assert (a.a, a.b, a.c) == (b.a, b.b, b.c)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.4, 1.4), st.floats(0.5, 3.0), st.floats(-2e-9, 2e-9))
def test_bound_roots_close_the_pumped_channel(theta, v0_cm, dv_cm):
    cfg = zero_two_level(pump=laser(1e6, 0, v0_cm, dv_cm))
    bound = lower_bound_for(cfg, theta)
    for v in bound.roots:
        if v < 1e-4:
            continue
        ch = build_channels(cfg, Incidence(v, theta), exact=False)
        kp = cfg.pump.wavenumber(exact=False)
        scale = NEON.m_over_hbar * v + kp
        assert abs(ch.kx[1]) <= 1e-5 * scale


def test_bound_is_even_only_without_pump_velocity():
    b1 = boundary_left_two_level(0.5, 0.0, 1e-9)
    b2 = boundary_left_two_level(-0.5, 0.0, 1e-9)
    assert b1 == b2
    # near grazing the Doppler term opens a gap on one side only
    c1 = boundary_left_two_level(1.48, 0.03, 1.8e-11)
    c2 = boundary_left_two_level(-1.48, 0.03, 1.8e-11)
    assert len(c1.roots) == 2 and c2.roots == ()


def test_fig3b_ceiling_at_grazing(presets):
    cfg = presets("fig3b")
    ceil = lower_bound_for(cfg, np.deg2rad(85)).ceiling
    assert ceil / CM_PER_S == pytest.approx(16.9, abs=0.2)


def test_absorption_boundary(presets):
    cfg = presets("fig4b").quench_only()
    v = absorption_boundary(cfg, 0.0)
    assert v is not None and 3.0 < v < 20.0
    assert absorption_boundary(cfg, 0.0, v_max=v / 2) is None
    assert absorption_boundary(presets("fig3b"), 0.0) == 0.0


def test_combined_examples(presets):
    cfg = presets("fig5")
    works = classify_combined(cfg, Incidence.from_cm_deg(20, 0))
    assert works.works and works.reason is None
    assert works.decisive[0].verdict is Verdict.FULL_ABSORPTION
    for w, th, reason in [(20, 80, Reason.REFLECTION), (40, 0, Reason.PUMP), (40, 30, Reason.QUENCH)]:
        v = classify_combined(cfg, Incidence.from_cm_deg(w, th))
        assert not v.works and v.reason is reason
    mono = classify_combined(cfg, Incidence.from_cm_deg(10, 0), monolithic=True)
    assert mono.monolithic is not None
    with pytest.raises(ValueError):
        classify_combined(cfg, Incidence.from_cm_deg(-20, 0))


def test_combined_verdict_consistency():
    c = classify(fake([1, 0, 0], [0, 0, 0]), 1)
    with pytest.raises(ValueError):
        CombinedVerdict(True, Reason.QUENCH, c)
    with pytest.raises(ValueError):
        CombinedVerdict(False, None, c)
