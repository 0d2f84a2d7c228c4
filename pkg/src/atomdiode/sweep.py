"""Phase diagrams over (signed speed, angle) grids.

Cells are evaluated independently, optionally in a process pool, and always
assembled in grid order (angle-major, speed-minor), so the diagram does not
depend on the number of workers.  Every stored float is rounded to nine
significant digits when the cell is created; the text format then reproduces
the in-memory diagram exactly.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .config import RunConfig, SweepMode
from .diode import Verdict, classify, classify_combined, solve_config
from .params import CM_PER_S
from .scheme import Incidence, SchemeConfig
from .solver import GRAZING_SPEED, ClosedIncidentChannel, GrazingIncidence, ScatteringError

FORMAT_VERSION = 1
MAGIC = "# atomdiode phase-diagram"
DIGITS = 9


class DiagramFormatError(ValueError):
    """Unreadable diagram file or unsupported format version."""


def quantize(x: float) -> float:
    return float(f"{x:.{DIGITS}g}")


def _fmt(x: float) -> str:
    return f"{x:.{DIGITS}g}"


def _same(a: float, b: float) -> bool:
    return a == b or (math.isnan(a) and math.isnan(b))


@dataclass(frozen=True, eq=False)
class Cell:
    """One grid point: verdict code, criterion budget and probability budget."""

    w: float  # cm/s, signed
    theta: float  # deg
    verdict: Verdict
    budget: float
    pr: tuple
    pt: tuple
    absorption: float
    flags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "verdict", Verdict(self.verdict))
        for name in ("w", "theta", "budget", "absorption"):
            object.__setattr__(self, name, quantize(getattr(self, name)))
        object.__setattr__(self, "pr", tuple(quantize(p) for p in self.pr))
        object.__setattr__(self, "pt", tuple(quantize(p) for p in self.pt))
        object.__setattr__(self, "flags", tuple(self.flags))

    def __eq__(self, other):
        if not isinstance(other, Cell):
            return NotImplemented
        nums = (self.w, self.theta, self.budget, self.absorption) + self.pr + self.pt
        onums = (other.w, other.theta, other.budget, other.absorption) + other.pr + other.pt
        return (self.verdict == other.verdict and self.flags == other.flags
                and len(nums) == len(onums) and all(map(_same, nums, onums)))

    @property
    def failed(self) -> bool:
        return self.verdict is Verdict.FAILED


@dataclass(frozen=True)
class SweepSpec:
    """Grid and evaluation mode, taken from the ``[sweep]`` block of a run config."""

    config: RunConfig

    def __post_init__(self):
        for w in self.speeds:
            if abs(w) * CM_PER_S < GRAZING_SPEED:
                raise ValueError(f"grid speed {w} cm/s falls in the grazing band")
        if self.mode is not SweepMode.DIODE and self.config.sweep.w_min <= 0:
            raise ValueError(f"{self.mode.value} sweeps are defined for left incidence (w > 0)")

    @property
    def mode(self) -> SweepMode:
        return self.config.sweep.mode

    @property
    def threshold(self) -> float:
        return self.config.solver.threshold

    @property
    def speeds(self) -> np.ndarray:
        sw = self.config.sweep
        return np.array([quantize(w) for w in np.linspace(sw.w_min, sw.w_max, sw.w_count)])

    @property
    def angles(self) -> np.ndarray:
        sw = self.config.sweep
        return np.array([quantize(t) for t in np.linspace(sw.theta_min, sw.theta_max, sw.theta_count)])

    @property
    def shape(self) -> tuple:
        return (self.config.sweep.theta_count, self.config.sweep.w_count)

    def points(self):
        return [(float(t), float(w)) for t in self.angles for w in self.speeds]


@dataclass(frozen=True)
class PhaseDiagram:
    spec: SweepSpec
    cells: tuple

    def __post_init__(self):
        n = self.spec.shape[0] * self.spec.shape[1]
        if len(self.cells) != n:
            raise ValueError(f"diagram needs {n} cells, got {len(self.cells)}")

    @property
    def n_channels(self) -> int:
        return self.spec.config.scheme().n_channels

    def codes(self) -> np.ndarray:
        """Verdict letters as an (angles, speeds) array."""
        return np.array([c.verdict.value for c in self.cells]).reshape(self.spec.shape)

    def column(self, theta: float) -> list:
        i = int(np.argmin(np.abs(self.spec.angles - theta)))
        nw = self.spec.shape[1]
        return list(self.cells[i * nw:(i + 1) * nw])

    def failure_fraction(self) -> float:
        return sum(c.failed for c in self.cells) / len(self.cells)


def _cell_from(w, theta, verdict, budget, result, flags, n):
    if result is None:
        zeros = (0.0,) * n
        return Cell(w, theta, verdict, budget, zeros, zeros, 0.0, tuple(flags))
    flags = list(flags) + [f for f in result.flags if f not in flags]
    return Cell(w, theta, verdict, budget, tuple(result.PR), tuple(result.PT), result.absorption,
                tuple(flags))


def evaluate_cell(scheme: SchemeConfig, mode: SweepMode, w: float, theta: float,
                  threshold: float = 0.01, verify: bool = False) -> Cell:
    """Classify a single grid point; solver errors become FAILED/UNDEFINED cells."""
    n = scheme.n_channels
    target = scheme.target_channel
    try:
        inc = Incidence.from_cm_deg(w, theta)
        if mode is SweepMode.COMBINED:
            cv = classify_combined(scheme, inc, threshold, verify)
            cls, result = cv.decisive
            flags = [f"stage={1 if cv.absorption is None else 2}"]
            if cv.works:
                return _cell_from(w, theta, Verdict.DIODE_WORKS, cls.budget, result, flags, n)
            flags.insert(0, f"reason={cv.reason.value}")
            verdict = Verdict.UNDEFINED if cls.verdict is Verdict.UNDEFINED else cls.verdict
            return _cell_from(w, theta, verdict, cls.budget, result, flags, n)
        if mode is SweepMode.QUENCH:
            result = solve_config(scheme.quench_only(), replace(inc, channel=target), verify)
        else:
            result = solve_config(scheme, inc, verify)
        cls = classify(result, target, threshold)
        return _cell_from(w, theta, cls.verdict, cls.budget, result, [], n)
    except GrazingIncidence:
        return _cell_from(w, theta, Verdict.UNDEFINED, math.nan, None, ["grazing"], n)
    except ClosedIncidentChannel:
        return _cell_from(w, theta, Verdict.UNDEFINED, math.nan, None, ["closed-incident"], n)
    except (ScatteringError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return _cell_from(w, theta, Verdict.FAILED, math.nan, None, [f"error={type(exc).__name__}"], n)


def _evaluate(task):
    return evaluate_cell(*task)


def run_sweep(spec: SweepSpec, jobs: int = 1, progress=None) -> PhaseDiagram:
    """Evaluate every cell of ``spec``; ``progress(done, total)`` is called as cells finish."""
    if jobs < 1:
        raise ValueError("jobs must be positive")
    scheme = spec.config.scheme()
    verify = spec.config.solver.verify
    tasks = [(scheme, spec.mode, w, t, spec.threshold, verify) for t, w in spec.points()]
    cells = []
    if jobs == 1:
        results = map(_evaluate, tasks)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=jobs)
        results = pool.map(_evaluate, tasks, chunksize=max(1, len(tasks) // (8 * jobs)))
    try:
        for cell in results:
            cells.append(cell)
            if progress is not None:
                progress(len(cells), len(tasks))
    finally:
        if pool is not None:
            pool.shutdown()
    return PhaseDiagram(spec, tuple(cells))


def extract_boundary(diagram: PhaseDiagram, verdict: Verdict, direction: str = "up",
                     sign: int | None = None) -> list:
    """Per angle, the first speed at which membership in ``verdict`` flips.

    Speeds are scanned increasing (``"up"``) or decreasing (``"down"``),
    optionally only over one sign of ``w``.  Returns ``[(theta_deg, w_cm), ...]``
    for columns that have a transition; undefined and failed cells are skipped.
    """
    if direction not in ("up", "down"):
        raise ValueError("direction must be 'up' or 'down'")
    verdict = Verdict(verdict)
    out = []
    for theta in diagram.spec.angles:
        col = [c for c in diagram.column(theta)
               if c.verdict not in (Verdict.UNDEFINED, Verdict.FAILED)
               and (sign is None or np.sign(c.w) == sign)]
        if direction == "down":
            col = col[::-1]
        if not col:
            continue
        first = col[0].verdict is verdict
        for c in col[1:]:
            if (c.verdict is verdict) != first:
                out.append((float(theta), c.w))
                break
    return out


def breakdown_speed(scheme: SchemeConfig, mode: SweepMode, theta: float, w_start: float, w_stop: float,
                    verdict: Verdict, steps: int = 24, tol: float = 0.05, threshold: float = 0.01) -> float | None:
    """Speed (cm/s) between ``w_start`` and ``w_stop`` where ``verdict`` is first lost.

    Scans ``steps`` equally spaced speeds from ``w_start``, then bisects the first
    bracket down to ``tol`` cm/s.  Returns None when the verdict never changes.
    """
    def holds(w):
        return evaluate_cell(scheme, mode, w, theta, threshold).verdict is Verdict(verdict)

    speeds = np.linspace(w_start, w_stop, steps + 1)
    if not holds(speeds[0]):
        return float(speeds[0])
    prev = speeds[0]
    for w in speeds[1:]:
        if not holds(w):
            lo, hi = prev, w
            while abs(hi - lo) > tol:
                mid = 0.5 * (lo + hi)
                lo, hi = (mid, hi) if holds(mid) else (lo, mid)
            return float(0.5 * (lo + hi))
        prev = w
    return None


def default_jobs() -> int:
    return os.cpu_count() or 1


# text format

def _columns(n: int) -> list:
    return (["w_cm_per_s", "theta_deg", "verdict_code", "budget"]
            + [f"PR_{j + 1}" for j in range(n)] + [f"PT_{j + 1}" for j in range(n)]
            + ["absorption", "flags"])


def write_diagram(diagram: PhaseDiagram, path) -> None:
    if not diagram.cells:
        raise ValueError("refusing to write an empty diagram")
    n = diagram.n_channels
    lines = [f"{MAGIC} v{FORMAT_VERSION}"]
    lines += ["# config " + line for line in diagram.spec.config.emit().splitlines()]
    lines.append("# " + "\t".join(_columns(n)))
    for c in diagram.cells:
        row = [_fmt(c.w), _fmt(c.theta), c.verdict.value, _fmt(c.budget)]
        row += [_fmt(p) for p in c.pr] + [_fmt(p) for p in c.pt]
        row += [_fmt(c.absorption), ",".join(c.flags) if c.flags else "-"]
        lines.append("\t".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_diagram(path) -> PhaseDiagram:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(MAGIC):
        raise DiagramFormatError(f"{path}: not a phase-diagram file")
    version = lines[0][len(MAGIC):].strip()
    if version != f"v{FORMAT_VERSION}":
        raise DiagramFormatError(f"{path}: unsupported format version {version!r}")
    cfg_lines = [ln[len("# config "):] if ln.startswith("# config ") else ""
                 for ln in lines if ln.startswith("# config")]
    config = RunConfig.parse("\n".join(cfg_lines))
    spec = SweepSpec(config)
    n = config.scheme().n_channels
    ncol = len(_columns(n))
    cells = []
    for ln in lines[1:]:
        if ln.startswith("#") or not ln.strip():
            continue
        parts = ln.split("\t")
        if len(parts) != ncol:
            raise DiagramFormatError(f"{path}: expected {ncol} columns, got {len(parts)}")
        try:
            nums = [float(x) for x in parts[4:4 + 2 * n + 1]]
            cells.append(Cell(
                float(parts[0]), float(parts[1]), Verdict(parts[2]), float(parts[3]),
                tuple(nums[:n]), tuple(nums[n:2 * n]), nums[2 * n],
                () if parts[-1] == "-" else tuple(parts[-1].split(",")),
            ))
        except ValueError as exc:
            raise DiagramFormatError(f"{path}: bad row {ln!r}: {exc}") from exc
    try:
        return PhaseDiagram(spec, tuple(cells))
    except ValueError as exc:
        raise DiagramFormatError(f"{path}: {exc}") from exc
