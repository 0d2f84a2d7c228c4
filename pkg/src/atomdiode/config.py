"""Run configuration files: one INI section per laser, file units um and cm/s.

Example::

    [atom]
    mass = 3.3199e-26

    [scheme]
    kind = two_level
    gamma = 0
    quench_on = false

    [pump]
    peak = 1e6
    center_um = 0
    width_um = 15
    v0_cm_s = 3
    dv_cm_s = 1.8e-9

Values are kept in file units so that parse, emit and parse again is exact;
:meth:`RunConfig.scheme` converts to SI.
"""
from __future__ import annotations

import configparser
import enum
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

from .params import CM_PER_S, MICRON, NEON20_MASS, Atom
from .profiles import GaussianProfile
from .scheme import LaserField, SchemeConfig, SchemeKind


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


class SweepMode(str, enum.Enum):
    DIODE = "diode"  # classify the configuration as given, ground-state incidence
    QUENCH = "quench"  # quench laser alone, incidence in the target state
    COMBINED = "combined"  # two-stage diode verdict


LASER_SECTIONS = ("pump", "stokes", "quench")
MIRROR_SECTIONS = ("mirror1", "mirror2")


@dataclass(frozen=True)
class LaserBlock:
    peak: float
    center_um: float
    width_um: float
    v0_cm_s: float = 0.0
    dv_cm_s: float = 0.0
    y_sign: int = 1

    def profile(self) -> GaussianProfile:
        return GaussianProfile(self.peak, self.center_um * MICRON, self.width_um * MICRON)

    def field(self) -> LaserField:
        return LaserField(self.profile(), self.v0_cm_s * CM_PER_S, self.dv_cm_s * CM_PER_S, self.y_sign)


@dataclass(frozen=True)
class MirrorBlock:
    peak: float
    center_um: float
    width_um: float

    def profile(self) -> GaussianProfile:
        return GaussianProfile(self.peak, self.center_um * MICRON, self.width_um * MICRON)


@dataclass(frozen=True)
class SolverBlock:
    oscillation_step: float = 1.0
    verify: bool = False
    threshold: float = 0.01


@dataclass(frozen=True)
class SweepBlock:
    w_min: float = -45.0
    w_max: float = 45.0
    w_count: int = 50
    theta_min: float = -88.5
    theta_max: float = 88.5
    theta_count: int = 60
    mode: SweepMode = SweepMode.DIODE

    def __post_init__(self):
        object.__setattr__(self, "mode", SweepMode(self.mode))


@dataclass(frozen=True)
class RunConfig:
    kind: SchemeKind
    lasers: dict
    mirrors: dict = field(default_factory=dict)
    gamma: float = 0.0
    quench_on: bool = True
    pumping_on: bool = True
    mass: float = NEON20_MASS
    solver: SolverBlock = field(default_factory=SolverBlock)
    sweep: SweepBlock = field(default_factory=SweepBlock)
    output: str | None = None
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        required = ("pump", "quench") + (("stokes",) if self.kind is SchemeKind.THREE_LEVEL else ())
        missing = [s for s in required if s not in self.lasers]
        mirrors = ("mirror1",) if self.kind is SchemeKind.THREE_LEVEL else MIRROR_SECTIONS
        missing += [s for s in mirrors if s not in self.mirrors]
        if missing:
            raise ConfigError(f"{self.kind.value} scheme needs sections: {', '.join(missing)}")
        extra = set(self.lasers) - set(required)
        extra |= set(self.mirrors) - set(mirrors)
        if extra:
            raise ConfigError(f"sections not used by the {self.kind.value} scheme: {', '.join(sorted(extra))}")
        for name, block in list(self.lasers.items()) + list(self.mirrors.items()):
            if not block.width_um > 0:
                raise ConfigError(f"[{name}] width_um must be positive")
            if isinstance(block, LaserBlock):
                if block.y_sign not in (1, -1):
                    raise ConfigError(f"[{name}] y_sign must be 1 or -1")
                if block.v0_cm_s < 0:
                    raise ConfigError(f"[{name}] v0_cm_s must be non-negative")
        if not self.mass > 0:
            raise ConfigError("atom mass must be positive")
        if self.gamma < 0:
            raise ConfigError("gamma must be non-negative")
        if not 0 < self.solver.threshold <= 0.5:
            raise ConfigError("threshold must lie in (0, 0.5]")
        if not 0 < self.solver.oscillation_step < 3.0:
            raise ConfigError("oscillation_step must lie in (0, 3)")
        sw = self.sweep
        if sw.w_count < 2 or sw.theta_count < 2:
            raise ConfigError("sweep counts must be at least 2")
        if not (abs(sw.theta_min) < 90 and abs(sw.theta_max) < 90):
            raise ConfigError("sweep angles must satisfy |theta| < 90 deg")
        if not (sw.w_min < sw.w_max and sw.theta_min < sw.theta_max):
            raise ConfigError("sweep ranges must be increasing")

    def scheme(self) -> SchemeConfig:
        """SI scheme configuration."""
        try:
            return SchemeConfig(
                kind=self.kind,
                pump=self.lasers["pump"].field(),
                quench=self.lasers["quench"].field(),
                stokes=self.lasers["stokes"].field() if "stokes" in self.lasers else None,
                gamma=self.gamma,
                mirror1=self.mirrors["mirror1"].profile(),
                mirror2=self.mirrors["mirror2"].profile() if "mirror2" in self.mirrors else None,
                atom=Atom(self.mass),
                quench_on=self.quench_on,
                pumping_on=self.pumping_on,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    # serialization

    @classmethod
    def parse(cls, text: str, name: str | None = None) -> RunConfig:
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from exc
        known = {"atom", "scheme", "solver", "sweep", "output", *LASER_SECTIONS, *MIRROR_SECTIONS}
        unknown = set(cp.sections()) - known
        if unknown:
            raise ConfigError(f"unknown sections: {', '.join(sorted(unknown))}")
        if "scheme" not in cp:
            raise ConfigError("missing [scheme] section")

        def section(sec, spec):
            if sec not in cp:
                return {}
            items = dict(cp[sec])
            bad = set(items) - set(spec)
            if bad:
                raise ConfigError(f"unknown keys in [{sec}]: {', '.join(sorted(bad))}")
            out = {}
            for key, raw in items.items():
                try:
                    out[key] = _convert(spec[key], raw)
                except ValueError as exc:
                    raise ConfigError(f"[{sec}] {key}: {exc}") from exc
            return out

        scheme = section("scheme", {"kind": str, "gamma": float, "quench_on": bool, "pumping_on": bool})
        if "kind" not in scheme:
            raise ConfigError("[scheme] needs kind")
        try:
            kind = SchemeKind(scheme.pop("kind"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        lasers = {}
        for sec in LASER_SECTIONS:
            if sec in cp:
                vals = section(sec, _types(LaserBlock))
                lasers[sec] = _build(LaserBlock, vals, sec)
        mirrors = {}
        for sec in MIRROR_SECTIONS:
            if sec in cp:
                mirrors[sec] = _build(MirrorBlock, section(sec, _types(MirrorBlock)), sec)
        atom = section("atom", {"mass": float})
        solver = SolverBlock(**section("solver", _types(SolverBlock)))
        sweep_vals = section("sweep", _types(SweepBlock))
        try:
            sweep = SweepBlock(**sweep_vals)
        except ValueError as exc:
            raise ConfigError(f"[sweep] {exc}") from exc
        output = section("output", {"path": str}).get("path")
        return cls(kind=kind, lasers=lasers, mirrors=mirrors, solver=solver, sweep=sweep,
                   output=output, name=name, **scheme, **atom)

    @classmethod
    def load(cls, path) -> RunConfig:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        return cls.parse(text, name=path.stem)

    def emit(self) -> str:
        """INI text that parses back to an equal configuration."""
        lines = ["[atom]", f"mass = {self.mass!r}", "", "[scheme]", f"kind = {self.kind.value}",
                 f"gamma = {self.gamma!r}", f"quench_on = {_fmt(self.quench_on)}",
                 f"pumping_on = {_fmt(self.pumping_on)}", ""]
        for sec in LASER_SECTIONS:
            if sec in self.lasers:
                lines += _emit_block(sec, self.lasers[sec])
        for sec in MIRROR_SECTIONS:
            if sec in self.mirrors:
                lines += _emit_block(sec, self.mirrors[sec])
        lines += _emit_block("solver", self.solver)
        lines += _emit_block("sweep", self.sweep)
        if self.output is not None:
            lines += ["[output]", f"path = {self.output}", ""]
        return "\n".join(lines)

    def with_sweep(self, **changes) -> RunConfig:
        return replace(self, sweep=replace(self.sweep, **changes))


def _types(cls) -> dict:
    hints = {"float": float, "int": int, "bool": bool, "SweepMode": SweepMode}
    return {f.name: hints[f.type] for f in fields(cls)}


def _build(cls, vals, sec):
    try:
        return cls(**vals)
    except TypeError as exc:
        raise ConfigError(f"[{sec}] missing keys: {exc}") from exc


def _convert(kind, raw: str):
    raw = raw.strip()
    if kind is bool:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is SweepMode:
        return SweepMode(raw)
    return raw


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit_block(sec, block) -> list:
    return [f"[{sec}]"] + [f"{f.name} = {_fmt(getattr(block, f.name))}" for f in fields(block)] + [""]


PRESETS = ("fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig5", "fig7a", "fig7b", "fig8")


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return resources.files("atomdiode").joinpath("presets", f"{name}.ini").read_text()


def load_preset(name: str) -> RunConfig:
    return RunConfig.parse(preset_text(name), name=name)
