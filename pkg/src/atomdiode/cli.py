"""``atomdiode`` command line: solve, sweep, boundaries, reduce.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from .config import PRESETS, ConfigError, LaserBlock, MirrorBlock, RunConfig, SweepMode, load_preset
from .diode import Verdict, absorption_boundary, boundary_full_reflection, classify, classify_combined, \
    lower_bound_for, solve_config
from .fields import reduce_three_to_two
from .params import CM_PER_S, MICRON
from .scheme import Incidence, SchemeKind
from .solver import ClosedIncidentChannel, ScatteringError
from .sweep import SweepSpec, default_jobs, run_sweep, write_diagram

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
FAILED_FRACTION_LIMIT = 0.10


def _num(x) -> str:
    return f"{x:.9g}"


def _load(args) -> RunConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("give exactly one of --config or --preset")
    cfg = RunConfig.load(args.config) if args.config else load_preset(args.preset)
    if getattr(args, "threshold", None) is not None:
        cfg = replace(cfg, solver=replace(cfg.solver, threshold=args.threshold))
    return cfg


def _emit(lines, out):
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    cfg = _load(args)
    scheme = cfg.scheme()
    inc = Incidence.from_cm_deg(args.w, args.theta)
    mode = SweepMode(args.mode) if args.mode else cfg.sweep.mode
    threshold = cfg.solver.threshold
    target = scheme.target_channel
    lines = [f"w_cm_per_s={_num(args.w)}", f"theta_deg={_num(args.theta)}", f"mode={mode.value}"]
    if mode is SweepMode.COMBINED:
        cv = classify_combined(scheme, inc, threshold, verify=cfg.solver.verify)
        cls, result = cv.decisive
        lines += [f"diode_works={str(cv.works).lower()}",
                  f"reason={cv.reason.value if cv.reason else '-'}",
                  f"stage1_verdict={cv.transmission.verdict.name}"]
        if cv.absorption is not None:
            lines.append(f"stage2_verdict={cv.absorption.verdict.name}")
    else:
        if mode is SweepMode.QUENCH:
            result = solve_config(scheme.quench_only(), replace(inc, channel=target), cfg.solver.verify)
        else:
            result = solve_config(scheme, inc, cfg.solver.verify)
        cls = classify(result, target, threshold)
    verdict = cls.verdict
    if mode is SweepMode.COMBINED and cv.works:
        verdict = Verdict.DIODE_WORKS
    lines += [f"verdict={verdict.name}", f"verdict_code={verdict.value}", f"budget={_num(cls.budget)}"]
    for j, p in enumerate(result.PR):
        lines.append(f"PR_{j + 1}={_num(p)}")
    for j, p in enumerate(result.PT):
        lines.append(f"PT_{j + 1}={_num(p)}")
    lines += [f"absorption={_num(result.absorption)}", f"sectors={result.grid.n}",
              f"error_estimate={_num(result.error_estimate)}",
              f"flags={','.join(result.flags) if result.flags else '-'}"]
    _emit(lines, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    try:
        spec = SweepSpec(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = args.out or cfg.output or f"{cfg.name or 'diagram'}.tsv"
    total = spec.shape[0] * spec.shape[1]
    step = max(1, total // 20)

    def progress(done, n):
        if done % step == 0 or done == n:
            print(f"sweep: {done}/{n} cells", file=sys.stderr)

    diagram = run_sweep(spec, args.jobs or default_jobs(), progress)
    write_diagram(diagram, out)
    failed = sum(c.failed for c in diagram.cells)
    print(f"sweep: wrote {out}; {failed} of {total} cells failed", file=sys.stderr)
    return EXIT_NUMERIC if failed > FAILED_FRACTION_LIMIT * total else EXIT_OK


def cmd_boundaries(args) -> int:
    cfg = _load(args)
    scheme = cfg.scheme()
    sw = cfg.sweep
    angles = np.linspace(sw.theta_min, sw.theta_max, sw.theta_count)
    if args.theta is not None:
        angles = np.array([args.theta])
    w1 = scheme.mirror1.peak
    quench = scheme.gamma > 0 and scheme.quench.profile.peak != 0
    header = ["theta_deg", "v_rbound_cm_per_s", "v_lbound_cm_per_s"] + (["v_absorb_cm_per_s"] if quench else [])
    lines = ["\t".join(header)]
    for t in angles:
        th = math.radians(t)
        rb = boundary_full_reflection(th, w1, scheme.atom) / CM_PER_S if w1 > 0 else math.nan
        bound = lower_bound_for(scheme, th)
        lb = bound.ceiling if bound.ceiling is not None else bound.floor
        row = [_num(t), _num(rb), _num(lb / CM_PER_S if lb is not None else math.nan)]
        if quench:
            va = absorption_boundary(scheme, th)
            row.append(_num(va / CM_PER_S if va is not None else math.nan))
        lines.append("\t".join(row))
    _emit(lines, args.out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    cfg = _load(args)
    if cfg.kind is not SchemeKind.THREE_LEVEL:
        raise ConfigError("reduce needs a three-level configuration")
    try:
        red = reduce_three_to_two(cfg.scheme())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    two = red.config
    pump = two.pump

    def mirror(p):
        return MirrorBlock(p.peak, p.center / MICRON, p.width / MICRON)

    q = cfg.lasers["quench"]
    reduced = RunConfig(
        kind=SchemeKind.TWO_LEVEL,
        lasers={
            "pump": LaserBlock(pump.profile.peak, pump.profile.center / MICRON, pump.profile.width / MICRON,
                               pump.v0 / CM_PER_S, pump.dv / CM_PER_S, pump.y_sign),
            "quench": q,
        },
        mirrors={"mirror1": mirror(two.mirror1), "mirror2": mirror(two.mirror2)},
        gamma=cfg.gamma, quench_on=cfg.quench_on, pumping_on=cfg.pumping_on, mass=cfg.mass,
        solver=cfg.solver, sweep=cfg.sweep,
    )
    text = f"; reduced two-level configuration; validity_ratio = {_num(red.validity_ratio)}\n" + reduced.emit()
    _emit(text.rstrip("\n").splitlines(), args.out)
    print(f"validity_ratio={_num(red.validity_ratio)}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="atomdiode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="run configuration file (INI)")
        p.add_argument("--preset", choices=PRESETS, help="built-in figure preset")
        p.add_argument("--out", help="output path (default: standard output)")
        p.add_argument("--threshold", type=float, help="classification threshold (default 0.01)")

    p = sub.add_parser("solve", help="solve one (w, theta) point")
    common(p)
    p.add_argument("--w", type=float, required=True, help="signed speed in cm/s (negative: from the right)")
    p.add_argument("--theta", type=float, default=0.0, help="incidence angle in degrees")
    p.add_argument("--mode", choices=[m.value for m in SweepMode], help="override the config's mode")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="phase diagram over the configured grid")
    common(p)
    p.add_argument("--jobs", type=int, help="worker processes (default: core count)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("boundaries", help="analytic breakdown curves")
    common(p)
    p.add_argument("--theta", type=float, help="single angle in degrees instead of the sweep grid")
    p.set_defaults(func=cmd_boundaries)

    p = sub.add_parser("reduce", help="eliminate the intermediate level of a three-level config")
    common(p)
    p.set_defaults(func=cmd_reduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ClosedIncidentChannel as exc:
        print(f"undefined: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ScatteringError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
