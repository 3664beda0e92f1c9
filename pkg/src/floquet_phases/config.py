"""Experiment configuration: INI-style text with typed sections.

Example::

    [system]
    spin = 1
    g_factor = 1.0
    initial_m = 1

    [drive]
    omega = 1.0
    theta = 0.0
    kind = harmonic          # or: kind = file, file = drive.txt

    [integration]
    steps_per_period = 512
    phase_grid = 256

    [output]
    path = out.csv
    sample_every = 512
    quantities = amplitudes, probabilities, B_norm, adiabaticity

    [segment.1]
    type = ramp_up
    duration = 31.41592653589793
    b0 = 1.0
    direction = 0, 0, 1

    [segment.2]
    type = rotate_loop
    axis = 0, 1, 0
    omega = 0.1

    [segment.3]
    type = ramp_down
    duration = 31.41592653589793

Command sections ``[fig2]``, ``[holonomy]`` and ``[wcheck]`` are optional.
Keys are case-insensitive; ``#`` starts a comment. Every validation error
carries the line number of the offending key or section header.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .constants import PHASE_GRID, STEPS_PER_PERIOD
from .protocols import E_Z, Hold, RampDown, RampUp, RotateLoop, ScheduleError, FieldSchedule

QUANTITIES = ("amplitudes", "probabilities", "B_norm", "adiabaticity")
_SHAPES = ("smoothstep", "smootherstep", "linear", "plateau")

_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([^=:#;\s\[][^=:]*?)\s*[=:]")


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based or ``None`` when unknown."""

    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Fig2Config:
    a_grid: tuple = tuple(0.25 * k for k in range(17))
    rho: float = 0.1
    ramp_periods: int = 5


@dataclass(frozen=True)
class HolonomyConfig:
    axes: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0))
    a: float = 2.0


@dataclass(frozen=True)
class WCheckConfig:
    draws: int = 100
    spins: tuple = (0.5, 1.0, 1.5)
    a_max: tuple = (1.0, 6.0)
    series_order: int = 12


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a command needs; segments are the :mod:`protocols` dataclasses."""

    spin: float = 1.0
    g_factor: float = 1.0
    initial_m: float | None = None
    omega: float = 1.0
    theta: float = 0.0
    drive: str = "harmonic"
    steps_per_period: int = STEPS_PER_PERIOD
    phase_grid: int = PHASE_GRID
    output_path: str | None = None
    sample_every: int | None = None
    quantities: tuple = QUANTITIES
    segments: tuple = ()
    segment_labels: tuple = field(default=(), compare=False)
    fig2: Fig2Config | None = None
    holonomy: HolonomyConfig | None = None
    wcheck: WCheckConfig | None = None

    def schedule(self) -> FieldSchedule:
        return FieldSchedule(self.segments)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


class _Reader:
    """configparser plus a line index so every value can be traced to its line."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",),
                                            comment_prefixes=("#",), default_section="\x00")
        try:
            self.cp.read_string(text, source=source)
        except configparser.MissingSectionHeaderError as exc:
            raise ConfigError("key outside any [section]", exc.lineno, source) from None
        except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
            raise ConfigError(exc.message.split(": ", 1)[-1], exc.lineno, source) from None
        except configparser.ParsingError as exc:
            lineno = exc.errors[0][0] if exc.errors else None
            raise ConfigError("malformed line", lineno, source) from None
        self.lines: dict[tuple[str, str | None], int] = {}
        section = None
        for i, raw in enumerate(text.splitlines(), start=1):
            m = _SECTION_RE.match(raw)
            if m:
                section = m.group(1).strip()
                self.lines[(section, None)] = i
                continue
            m = _KEY_RE.match(raw)
            if m and section is not None and not raw[:1].isspace():
                self.lines.setdefault((section, m.group(1).strip().lower()), i)
        self.used: set[tuple[str, str]] = set()

    def line(self, section: str, key: str | None = None) -> int | None:
        return self.lines.get((section, key), self.lines.get((section, None)))

    def error(self, section: str, key: str | None, message: str) -> ConfigError:
        label = f"[{section}] {key}: " if key else f"[{section}]: "
        return ConfigError(label + message, self.line(section, key), self.source)

    def has(self, section: str, key: str) -> bool:
        return self.cp.has_section(section) and self.cp.has_option(section, key)

    def raw(self, section: str, key: str, default=None):
        if not self.has(section, key):
            if default is _REQUIRED:
                raise self.error(section, None, f"missing required key {key!r}")
            return default
        self.used.add((section, key))
        return self.cp.get(section, key).strip()

    def number(self, section: str, key: str, default=None, positive=False, nonneg=False) -> float:
        s = self.raw(section, key, default)
        if s is None or isinstance(s, (int, float)):
            return s
        try:
            v = float(s)
        except ValueError:
            raise self.error(section, key, f"expected a number, got {s!r}") from None
        if not math.isfinite(v):
            raise self.error(section, key, f"must be finite, got {s!r}")
        if positive and v <= 0:
            raise self.error(section, key, f"must be positive, got {s!r}")
        if nonneg and v < 0:
            raise self.error(section, key, f"must be non-negative, got {s!r}")
        return v

    def integer(self, section: str, key: str, default=None, minimum: int | None = None) -> int:
        s = self.raw(section, key, default)
        if s is None or isinstance(s, int):
            return s
        try:
            v = int(s)
        except ValueError:
            raise self.error(section, key, f"expected an integer, got {s!r}") from None
        if minimum is not None and v < minimum:
            raise self.error(section, key, f"must be >= {minimum}, got {v}")
        return v

    def floats(self, section: str, key: str, default=None, sep: str = ",") -> tuple:
        s = self.raw(section, key, default)
        if s is None or isinstance(s, tuple):
            return s
        out = []
        for part in s.split(sep):
            part = part.strip()
            try:
                v = float(part)
            except ValueError:
                raise self.error(section, key, f"expected numbers separated by {sep!r}, got {s!r}") from None
            if not math.isfinite(v):
                raise self.error(section, key, f"must be finite, got {part!r}")
            out.append(v)
        return tuple(out)

    def vector(self, section: str, key: str, default=None) -> tuple:
        v = self.floats(section, key, default)
        if v is not None and len(v) != 3:
            raise self.error(section, key, f"expected 3 components, got {len(v)}")
        return v

    def check_unknown(self):
        for section in self.cp.sections():
            for key in self.cp.options(section):
                if (section, key) not in self.used:
                    raise self.error(section, key, "unknown key")


_REQUIRED = object()
_ALLOWED_SECTIONS = ("system", "drive", "integration", "output", "fig2", "holonomy", "wcheck")


def _grid(reader: _Reader, section: str, key: str, default) -> tuple:
    s = reader.raw(section, key, None)
    if s is None:
        return default
    if ":" in s:
        parts = s.split(":")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise reader.error(section, key, f"range must read start:stop:step, got {s!r}") from None
        if step <= 0 or stop < start:
            raise reader.error(section, key, f"empty or reversed range {s!r}")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + k * step for k in range(n))
    return reader.floats(section, key)


def _segment(reader: _Reader, section: str):
    kind = reader.raw(section, "type", _REQUIRED).lower()
    start = reader.number(section, "start")
    if kind == "ramp_up":
        shape = reader.raw(section, "shape", "smoothstep")
        _check_shape(reader, section, "shape", shape)
        return RampUp(reader.number(section, "duration", _REQUIRED, positive=True),
                      reader.number(section, "b0", _REQUIRED, nonneg=True),
                      reader.vector(section, "direction", E_Z), shape, start)
    if kind == "ramp_down":
        shape = reader.raw(section, "shape", "smoothstep")
        _check_shape(reader, section, "shape", shape)
        return RampDown(reader.number(section, "duration", _REQUIRED, positive=True), shape, start)
    if kind == "rotate_loop":
        profile = reader.raw(section, "profile", "plateau")
        _check_shape(reader, section, "profile", profile)
        return RotateLoop(reader.vector(section, "axis", _REQUIRED),
                          reader.number(section, "omega", _REQUIRED, positive=True),
                          reader.number(section, "cycles", 1.0, positive=True),
                          reader.number(section, "b0", None, nonneg=True), profile, start)
    if kind == "hold":
        return Hold(reader.number(section, "duration", _REQUIRED, positive=True), start)
    raise reader.error(section, "type", f"unknown segment type {kind!r} "
                       "(expected ramp_up, rotate_loop, ramp_down or hold)")


def _check_shape(reader, section, key, value):
    if value not in _SHAPES:
        raise reader.error(section, key, f"unknown shape {value!r} (expected one of {', '.join(_SHAPES)})")


def parse_config(text: str, source: str = "<config>", base_dir: Path | None = None) -> ExperimentConfig:
    """Parse and validate configuration text.

    Raises:
        ConfigError: with the source name and line number of the problem.
    """
    r = _Reader(text, source)
    seg_sections = []
    for section in r.cp.sections():
        m = re.fullmatch(r"segment\.(\d+)", section)
        if m:
            seg_sections.append((int(m.group(1)), section))
        elif section not in _ALLOWED_SECTIONS:
            raise r.error(section, None, "unknown section")
    seg_sections.sort()

    spin = r.number("system", "spin", 1.0, nonneg=True)
    if abs(2 * spin - round(2 * spin)) > 1e-12:
        raise r.error("system", "spin", f"must be a half-integer, got {spin:g}")
    g = r.number("system", "g_factor", 1.0)
    m0 = r.number("system", "initial_m", None)
    if m0 is not None and (abs(m0) > spin or abs((spin - m0) - round(spin - m0)) > 1e-12):
        raise r.error("system", "initial_m", f"m = {m0:g} not available for spin {spin:g}")

    omega = r.number("drive", "omega", 1.0, positive=True)
    theta = r.number("drive", "theta", 0.0)
    kind = (r.raw("drive", "kind", "harmonic") or "harmonic").lower()
    if kind == "harmonic":
        drive = "harmonic"
        if r.has("drive", "file"):
            raise r.error("drive", "file", "file given but kind = harmonic")
    elif kind == "file":
        path = r.raw("drive", "file", _REQUIRED)
        p = Path(path)
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        drive = str(p)
    else:
        raise r.error("drive", "kind", f"expected harmonic or file, got {kind!r}")

    spp = r.integer("integration", "steps_per_period", STEPS_PER_PERIOD, minimum=64)
    M = r.integer("integration", "phase_grid", PHASE_GRID, minimum=16)

    out_path = r.raw("output", "path", None)
    sample_every = r.integer("output", "sample_every", None, minimum=1)
    q = r.raw("output", "quantities", None)
    if q is None:
        quantities = QUANTITIES
    else:
        quantities = tuple(s.strip() for s in q.split(",") if s.strip())
        lower = {x.lower(): x for x in QUANTITIES}
        bad = [s for s in quantities if s.lower() not in lower]
        if bad:
            raise r.error("output", "quantities", f"unknown quantity {bad[0]!r} (expected {', '.join(QUANTITIES)})")
        quantities = tuple(lower[s.lower()] for s in quantities)

    segments = tuple(_segment(r, s) for _, s in seg_sections)
    labels = tuple(s for _, s in seg_sections)

    fig2 = None
    if r.cp.has_section("fig2"):
        d = Fig2Config()
        grid = _grid(r, "fig2", "a_grid", d.a_grid)
        if any(a < 0 for a in grid):
            raise r.error("fig2", "a_grid", "values must be non-negative")
        fig2 = Fig2Config(grid, r.number("fig2", "rho", d.rho, positive=True),
                          r.integer("fig2", "ramp_periods", d.ramp_periods, minimum=1))
    hol = None
    if r.cp.has_section("holonomy"):
        d = HolonomyConfig()
        axes = d.axes
        s = r.raw("holonomy", "axes", None)
        if s is not None:
            axes = []
            for part in s.split(";"):
                comps = part.split(",")
                try:
                    v = tuple(float(c) for c in comps)
                except ValueError:
                    raise r.error("holonomy", "axes", f"expected 'x, y, z; x, y, z', got {s!r}") from None
                if len(v) != 3 or not all(math.isfinite(c) for c in v):
                    raise r.error("holonomy", "axes", f"each axis needs 3 finite components, got {part.strip()!r}")
                if not any(v):
                    raise r.error("holonomy", "axes", "zero axis")
                axes.append(v)
            axes = tuple(axes)
        hol = HolonomyConfig(axes, r.number("holonomy", "a", d.a, nonneg=True))
    wc = None
    if r.cp.has_section("wcheck"):
        d = WCheckConfig()
        spins = r.floats("wcheck", "spins", d.spins)
        for s_ in spins:
            if s_ <= 0 or abs(2 * s_ - round(2 * s_)) > 1e-12:
                raise r.error("wcheck", "spins", f"spins must be positive half-integers, got {s_:g}")
        amax = r.floats("wcheck", "a_max", d.a_max)
        if any(a < 0 for a in amax):
            raise r.error("wcheck", "a_max", "values must be non-negative")
        wc = WCheckConfig(r.integer("wcheck", "draws", d.draws, minimum=1), spins, amax,
                          r.integer("wcheck", "series_order", d.series_order, minimum=1))
    r.check_unknown()

    cfg = ExperimentConfig(spin, g, m0, omega, theta, drive, spp, M, out_path, sample_every,
                           quantities, segments, labels, fig2, hol, wc)
    if segments:
        try:
            cfg.schedule()
        except ScheduleError as exc:
            label = labels[exc.index]
            msg = str(exc).split(": ", 1)[1]
            raise ConfigError(f"[{label}]: {msg}", r.line(label), source) from None
    return cfg


def load_config(path) -> ExperimentConfig:
    p = Path(path)
    return parse_config(p.read_text(), str(p), p.parent)


def _g(x) -> str:
    return "%.17g" % x


def _vec(v) -> str:
    return ", ".join(_g(c) for c in v)


def dump_config(cfg: ExperimentConfig) -> str:
    """Normalized text that :func:`parse_config` turns back into ``cfg``."""
    out = ["[system]", f"spin = {_g(cfg.spin)}", f"g_factor = {_g(cfg.g_factor)}"]
    if cfg.initial_m is not None:
        out.append(f"initial_m = {_g(cfg.initial_m)}")
    out += ["", "[drive]", f"omega = {_g(cfg.omega)}", f"theta = {_g(cfg.theta)}"]
    if cfg.drive == "harmonic":
        out.append("kind = harmonic")
    else:
        out += ["kind = file", f"file = {cfg.drive}"]
    out += ["", "[integration]", f"steps_per_period = {cfg.steps_per_period}",
            f"phase_grid = {cfg.phase_grid}", "", "[output]"]
    if cfg.output_path is not None:
        out.append(f"path = {cfg.output_path}")
    if cfg.sample_every is not None:
        out.append(f"sample_every = {cfg.sample_every}")
    out.append(f"quantities = {', '.join(cfg.quantities)}")
    for i, seg in enumerate(cfg.segments, start=1):
        out += ["", f"[segment.{i}]"]
        if isinstance(seg, RampUp):
            out += ["type = ramp_up", f"duration = {_g(seg.duration)}", f"b0 = {_g(seg.B0)}",
                    f"direction = {_vec(seg.direction)}", f"shape = {seg.shape}"]
        elif isinstance(seg, RampDown):
            out += ["type = ramp_down", f"duration = {_g(seg.duration)}", f"shape = {seg.shape}"]
        elif isinstance(seg, RotateLoop):
            out += ["type = rotate_loop", f"axis = {_vec(seg.axis)}", f"omega = {_g(seg.Omega)}",
                    f"cycles = {_g(seg.cycles)}", f"profile = {seg.profile}"]
            if seg.B0 is not None:
                out.append(f"b0 = {_g(seg.B0)}")
        else:
            out += ["type = hold", f"duration = {_g(seg.duration)}"]
        if seg.start is not None:
            out.append(f"start = {_g(seg.start)}")
    if cfg.fig2 is not None:
        f2 = cfg.fig2
        out += ["", "[fig2]", f"a_grid = {_vec(f2.a_grid)}", f"rho = {_g(f2.rho)}",
                f"ramp_periods = {f2.ramp_periods}"]
    if cfg.holonomy is not None:
        h = cfg.holonomy
        out += ["", "[holonomy]", f"axes = {'; '.join(_vec(a) for a in h.axes)}", f"a = {_g(h.a)}"]
    if cfg.wcheck is not None:
        w = cfg.wcheck
        out += ["", "[wcheck]", f"draws = {w.draws}", f"spins = {_vec(w.spins)}",
                f"a_max = {_vec(w.a_max)}", f"series_order = {w.series_order}"]
    return "\n".join(out) + "\n"
