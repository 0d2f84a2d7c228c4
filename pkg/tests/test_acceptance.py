"""End-to-end checks with one pass/fail line per criterion in the terminal summary."""
import math
import subprocess
import sys

import numpy as np
import pytest

from atomdiode.config import SweepMode, load_preset
from atomdiode.diode import (Reason, Verdict, absorption_boundary, boundary_full_reflection, classify,
                             classify_combined, solve_config)
from atomdiode.fields import PotentialMatrix, mirror_from_detuned_laser, reduce_three_to_two
from atomdiode.params import CM_PER_S, MICRON, NEON, velocity_from_detuning
from atomdiode.profiles import GaussianProfile
from atomdiode.scheme import ChannelSet, Incidence, SchemeConfig, SchemeKind, channel_wavenumbers
from atomdiode.solver import scalar_oracle, solve_scattering
from atomdiode.sweep import breakdown_speed
from support import all_open, gaussian, laser, random_scheme, setup, zero_two_level

MH = NEON.m_over_hbar
WINDOW_ANGLES = (-80, -40, 0, 40, 80)
WINDOW_SPEEDS = (6, 10, 14)


def verdicts(scheme, mode, cells):
    out = {}
    for w, th in cells:
        inc = Incidence.from_cm_deg(w, th)
        if mode is SweepMode.COMBINED:
            cv = classify_combined(scheme, inc)
            out[w, th] = Verdict.DIODE_WORKS if cv.works else cv.decisive[0].verdict
        elif mode is SweepMode.QUENCH:
            inc = Incidence.from_cm_deg(w, th, scheme.target_channel)
            out[w, th] = classify(solve_config(scheme.quench_only(), inc), scheme.target_channel).verdict
        else:
            out[w, th] = classify(solve_config(scheme, inc), scheme.target_channel).verdict
    return out


def grid(speeds=WINDOW_SPEEDS, angles=WINDOW_ANGLES):
    return [(w, th) for w in speeds for th in angles]


def misses(found, expected):
    return {k: v.value for k, v in found.items() if v is not expected}


def test_c01_flux_unitarity(acceptance):
    rng = np.random.default_rng(2024)
    worst, n = 0.0, 0
    while n < 200:
        kind = SchemeKind.TWO_LEVEL if n % 2 else SchemeKind.THREE_LEVEL
        cfg = random_scheme(rng, kind, gamma=0.0)
        m, ch, inc = setup(cfg, rng.uniform(5, 60), rng.uniform(-80, 80))
        if not all_open(ch):
            continue
        res = solve_scattering(m, ch, inc)
        worst = max(worst, abs(res.total - 1))
        n += 1
    ok = worst < 1e-6
    acceptance(1, ok, f"max |sum P - 1| = {worst:.2e} over {n} draws")
    assert ok


def diagonal_case(rng):
    n = 3
    const = np.concatenate([[0.0], rng.uniform(-5e6, 5e6, n - 1)])
    terms = []
    for j in range(n):
        for _ in range(rng.integers(1, 3)):
            terms.append((j, j, GaussianProfile(rng.uniform(-2e7, 4e7), rng.uniform(-60, 60) * MICRON,
                                                rng.uniform(5, 20) * MICRON)))
    pot = PotentialMatrix(const, tuple(terms))
    k0 = MH * rng.uniform(5, 60) * CM_PER_S
    diag = const.astype(complex)
    ch = ChannelSet(np.zeros(n), np.zeros(n), diag, channel_wavenumbers(diag, k0), k0)
    return pot, ch, k0


def test_c02_oracle_equivalence(acceptance):
    rng = np.random.default_rng(11)
    worst, cases = 0.0, 0
    while cases < 50:
        pot, ch, k0 = diagonal_case(rng)
        alpha = int(rng.integers(0, 3))
        if not ch.is_open(alpha):
            continue
        inc = Incidence(k0 / MH, 0.0, alpha)
        res = solve_scattering(pot, ch, inc)
        lo, hi = pot.box()
        own = [p for i, j, p in pot.terms if i == alpha]
        r, t = scalar_oracle(lambda x: sum(p(x) for p in own), MH, k0, ch.diag[alpha], lo, hi, 200_000)
        pr = np.zeros(3)
        pt = np.zeros(3)
        pr[alpha], pt[alpha] = abs(r) ** 2, abs(t) ** 2
        worst = max(worst, np.max(np.abs(res.PR - pr)), np.max(np.abs(res.PT - pt)))
        cases += 1
    ok = worst < 1e-6
    acceptance(2, ok, f"max probability error {worst:.2e} over {cases} cases")
    assert ok


def test_c03_reflection_bound(acceptance, presets):
    cfg = presets("fig3b")
    worst = 0.0
    parts = []
    for th in (0, 30, -30, 60, -60):
        # incidence from the right meets the ground-state mirror first
        w = breakdown_speed(cfg, SweepMode.DIODE, th, -6, -100, Verdict.FULL_REFLECTION)
        expect = boundary_full_reflection(math.radians(th), cfg.mirror1.peak) / CM_PER_S
        rel = abs(abs(w) - expect) / expect if w is not None else math.inf
        worst = max(worst, rel)
        parts.append(f"{th:+d}:{abs(w):.1f}/{expect:.1f}")
    ok = worst < 0.15
    acceptance(3, ok, f"numeric/analytic cm/s {' '.join(parts)}; worst {worst:.1%}")
    assert ok


def test_c04_fig3b_window(acceptance, presets):
    cfg = presets("fig3b")
    bad = misses(verdicts(cfg, SweepMode.DIODE, grid()), Verdict.FULL_TRANSMISSION)
    ceiling = breakdown_speed(cfg, SweepMode.DIODE, 85, 6, 30, Verdict.FULL_TRANSMISSION)
    rel = abs(ceiling - 16.5) / 16.5 if ceiling is not None else math.inf
    ok = not bad and rel < 0.15
    acceptance(4, ok, f"window misses {bad or 'none'}; 85 deg ceiling {ceiling} cm/s ({rel:.1%} from 16.5)")
    assert ok


def test_c05_fig3a_angle_failure(acceptance, presets):
    cfg = presets("fig3a")
    v = verdicts(cfg, SweepMode.DIODE, [(3, 80), (10, -40)])
    ok = v[3, 80] is not Verdict.FULL_TRANSMISSION and v[10, -40] is Verdict.FULL_TRANSMISSION
    acceptance(5, ok, f"(3, +80) -> {v[3, 80].value}, (10, -40) -> {v[10, -40].value}")
    assert ok


def test_c06_fig4b_quench_window(acceptance, presets):
    cfg = presets("fig4b")
    cells = grid(speeds=(6, 12), angles=(-80, -40, 0, 40, 80))
    bad = misses(verdicts(cfg, SweepMode.QUENCH, cells), Verdict.FULL_ABSORPTION)
    fast = verdicts(cfg, SweepMode.QUENCH, [(45, 0)])[45, 0]
    numeric = breakdown_speed(cfg, SweepMode.QUENCH, 0, 6, 400, Verdict.FULL_ABSORPTION, steps=40, tol=1.0)
    analytic = absorption_boundary(cfg.quench_only(), 0.0, beta=3.0)
    analytic_cm = analytic / CM_PER_S if analytic is not None else math.inf
    ratio = max(numeric, analytic_cm) / min(numeric, analytic_cm) if numeric else math.inf
    parts = {"window": not bad, "fails at 45": fast is Verdict.OTHER, "beta=3 within x2": ratio <= 2}
    ok = all(parts.values())
    acceptance(6, ok, f"window misses {bad or 'none'}; (45, 0) -> {fast.value}; numeric breakdown "
                      f"{numeric:.0f} cm/s vs beta=3 {analytic_cm:.0f} cm/s (x{ratio:.1f}); {parts}")
    assert ok


def test_c07_fig5_combined(acceptance, presets):
    cfg = presets("fig5")
    bad = misses(verdicts(cfg, SweepMode.COMBINED, grid()), Verdict.DIODE_WORKS)
    standalone = verdicts(presets("fig3b"), SweepMode.DIODE, [(20, 80), (40, 0), (40, 30)])
    quench = verdicts(presets("fig4b"), SweepMode.QUENCH, [(40, 30)])
    spots = {}
    for w, th, reason in [(20, 80, Reason.REFLECTION), (40, 0, Reason.PUMP), (40, 30, Reason.QUENCH)]:
        spots[reason] = classify_combined(cfg, Incidence.from_cm_deg(w, th)).reason
    consistent = (spots[Reason.REFLECTION] is Reason.REFLECTION and standalone[20, 80] is Verdict.FULL_REFLECTION
                  and spots[Reason.PUMP] is Reason.PUMP and standalone[40, 0] is Verdict.OTHER
                  and spots[Reason.QUENCH] is Reason.QUENCH
                  and standalone[40, 30] is Verdict.FULL_TRANSMISSION
                  and quench[40, 30] is not Verdict.FULL_ABSORPTION)
    ok = not bad and consistent
    acceptance(7, ok, f"window misses {bad or 'none'}; reasons A@(20,80) C@(40,0) B@(40,30) "
                      f"-> {[r.value if r else '-' for r in spots.values()]}, standalone consistent={consistent}")
    assert ok


def test_c08_three_level(acceptance, presets):
    b7, f8 = presets("fig7b"), presets("fig8")
    bad7 = misses(verdicts(b7, SweepMode.DIODE, grid()), Verdict.FULL_TRANSMISSION)
    bad8 = misses(verdicts(f8, SweepMode.COMBINED, grid()), Verdict.DIODE_WORKS)
    ceiling = breakdown_speed(b7, SweepMode.DIODE, 85, 6, 30, Verdict.FULL_TRANSMISSION)
    rel = abs(ceiling - 17.5) / 17.5 if ceiling is not None else math.inf
    ok = not bad7 and not bad8 and rel < 0.15
    acceptance(8, ok, f"7b misses {bad7 or 'none'}; 8 misses {bad8 or 'none'}; "
                      f"85 deg ceiling {ceiling} cm/s ({rel:.1%} from 17.5)")
    assert ok


def far_detuned_three_level(delta_p):
    dv_p = velocity_from_detuning(delta_p) / CM_PER_S
    dv_s = dv_p - velocity_from_detuning(1.7e6) / CM_PER_S
    return SchemeConfig(SchemeKind.THREE_LEVEL, pump=laser(2.8e8, 10, 3, dv_p),
                        stokes=laser(2.8e8, -10, 2, dv_s, y_sign=-1), quench=laser(0, 150, 3),
                        mirror1=gaussian(0, 85), quench_on=True)


def test_c09_reduction_convergence(acceptance):
    rng = np.random.default_rng(0)
    samples = [(rng.uniform(5, 40), rng.uniform(-80, 80)) for _ in range(20)]
    keep = [0, 2, 3]  # three-level channels matching the reduced ones
    errors = {}
    for delta in (1e9, 2e9):
        full = far_detuned_three_level(delta)
        reduced = reduce_three_to_two(full).config
        worst = 0.0
        for w, th in samples:
            inc = Incidence.from_cm_deg(w, th)
            a, b = solve_config(full, inc), solve_config(reduced, inc)
            worst = max(worst, np.max(np.abs(a.PR[keep] - b.PR)), np.max(np.abs(a.PT[keep] - b.PT)),
                        a.PR[1], a.PT[1])
        errors[delta] = worst
    ok = errors[2e9] <= 0.5 * errors[1e9]
    acceptance(9, ok, f"max error {errors[1e9]:.2e} at 1e9, {errors[2e9]:.2e} at 2e9 "
                      f"(ratio {errors[2e9] / errors[1e9]:.2f})")
    assert ok


def test_c10_mirror_convergence(acceptance):
    w_hat, d0, sigma = 1e5, 1e8, 0.5
    diffs = []
    detail = []
    for w in (1.5, 2.0):
        row = []
        for d in (d0, 2 * d0, 4 * d0):
            omega = math.sqrt(2 * d * w_hat)
            cfg = zero_two_level(pump=laser(omega, 0, 0, velocity_from_detuning(d) / CM_PER_S, width_um=sigma))
            inc = Incidence.from_cm_deg(w, 0)
            res = solve_config(cfg, inc)
            mirror = mirror_from_detuned_laser(cfg.pump.profile, cfg.pump.detuning())
            half = 8 * sigma * MICRON
            r, _ = scalar_oracle(mirror, MH, inc.kx(), 0.0, -half, half, 100_000)
            row.append(abs(res.PR[0] - abs(r) ** 2))
        diffs.append(row)
        detail.append(f"w={w}: " + ", ".join(f"{x:.2e}" for x in row))
    ok = all(r[0] > r[1] > r[2] for r in diffs)
    acceptance(10, ok, "; ".join(detail))
    assert ok


def test_c11_determinism(acceptance, tmp_path):
    cfg = load_preset("fig3b").with_sweep(w_count=10, theta_count=8)
    path = tmp_path / "fig3b.ini"
    path.write_text(cfg.emit())
    outs = []
    for jobs in (1, 8):
        out = tmp_path / f"jobs{jobs}.tsv"
        proc = subprocess.run([sys.executable, "-m", "atomdiode.cli", "sweep", "--config", str(path),
                               "--jobs", str(jobs), "--out", str(out)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    ok = outs[0] == outs[1]
    acceptance(11, ok, f"fig3b 8x10 sweep, jobs 1 vs 8 byte-identical: {ok}")
    assert ok
