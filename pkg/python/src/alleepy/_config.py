# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import configparser
import io
import re
from typing import Callable, Dict, List, Literal, NamedTuple, Optional, Tuple

import numpy as np

from . import ResourceFunction
from . import defaults
from ._common import ConfigError, ConfigIssue, _Branch
from ._grid import Grid
from ._potential import Box, Potential

__ALL__ = ["ExperimentConfig", "parse_config", "parse_template"]

Mode = Literal["analyze", "simulate", "compete", "eig", "sweep"]
MODES = ("analyze", "simulate", "compete", "eig", "sweep")
RUN_MODES = ("analyze", "simulate", "compete", "eig")


class PotentialSection(NamedTuple):
    kind: str
    amplitudes: Tuple[float, ...] = ()
    centers: Tuple[Tuple[float, ...], ...] = ()
    widths: Tuple[float, ...] = ()
    offset: float = 0.0
    peak: float = 0.0
    location: Tuple[float, ...] = ()
    curvatures: Tuple[float, ...] = ()

    @property
    def dimension(self) -> int:
        return len(self.centers[0]) if self.kind == "gaussian-sum" else len(self.location)

    def to_potential(self) -> Potential:
        if self.kind == "gaussian-sum":
            return Potential.gaussian_sum(self.amplitudes, self.centers, self.widths, self.offset)
        return Potential.quadratic(self.peak, self.location, self.curvatures)


class DomainSection(NamedTuple):
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    cells: Tuple[int, ...]

    def box(self) -> Box:
        return Box(self.lower, self.upper)

    def grid(self) -> Grid:
        return Grid.create(self.lower, self.upper, self.cells)


class PhysicsSection(NamedTuple):
    chi: float
    theta: float
    d: float = 1.0
    mu: float = 1.0
    speed: float = 1.0
    """ `c`, the advection multiplier of the faster species """
    reaction: str = "cubic-allee"
    resource: str = "constant(1)"
    strategy: str = "ifd"
    """ How `v` moves in compete mode: "ifd" climbs `ln r` at rate 1, "aggressive" climbs `A` at rate `c chi` """
    branches: Tuple[str, ...] = ()
    """ Expected branch per maximum; all tall when empty """


class InitialSection(NamedTuple):
    u: str = ""
    v: str = ""


class ScheduleSection(NamedTuple):
    t_end: Optional[float] = None
    """ Required for every mode that integrates in time """
    snapshots: Tuple[float, ...] = ()
    steady_tol: float = defaults.STEADY_TOLERANCE
    dt_max: float = defaults.DT_MAX
    dt_initial: float = defaults.DT_INITIAL


class OutputSection(NamedTuple):
    directory: str = "alleepy-out"
    eigen_count: int = defaults.EIGEN_COUNT
    seeds_per_axis: int = defaults.SEEDS_PER_AXIS


class SweepSection(NamedTuple):
    mode: str
    axes: Tuple[Tuple[str, Tuple[str, ...]], ...]
    """ `(section.key, values)` per axis; the sweep runs their cartesian product """


class ExperimentConfig(NamedTuple):
    """A validated experiment. Build it with `parse_config`; `to_text` gives back an equivalent config file."""

    mode: Mode
    potential: PotentialSection
    domain: DomainSection
    physics: PhysicsSection
    initial: InitialSection = InitialSection()
    schedule: ScheduleSection = ScheduleSection()
    output: OutputSection = OutputSection()
    sweep: Optional[SweepSection] = None

    @property
    def run_mode(self) -> str:
        """The mode each run executes: `mode`, or the swept mode for a sweep."""
        return self.sweep.mode if self.sweep is not None else self.mode

    def to_text(self) -> str:
        sections = [("experiment", [("mode", self.mode)])]
        for name in ("potential", "domain", "physics", "initial", "schedule", "output"):
            section = getattr(self, name)
            entries = []
            for key, value in zip(section._fields, section):
                text = _to_text(value)
                if text != "":
                    entries.append((key, text))
            sections.append((name, entries))
        if self.sweep is not None:
            sections.append(("sweep", [("mode", self.sweep.mode)] + [(k, ", ".join(v)) for k, v in self.sweep.axes]))
        return "\n".join(f"[{name}]\n" + "".join(f"{k} = {v}\n" for k, v in entries) for name, entries in sections)

    def with_parameter(self, name: str, value: str) -> "ExperimentConfig":
        """
        A copy of this config, without its sweep, where the dotted parameter `name` (`physics.chi`) is set to `value`.
        The result is validated from scratch.
        """
        base = self._replace(mode=self.run_mode, sweep=None)
        return parse_config(_set_value(base.to_text(), name, value), base.mode)


def _to_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, int):
        return str(value)
    if len(value) > 0 and isinstance(value[0], tuple):
        return "; ".join(_to_text(v) for v in value)
    return ", ".join(_to_text(v) for v in value)


def _set_value(text: str, name: str, value: str) -> str:
    section, key = name.split(".", 1)
    parser = _parser()
    parser.read_string(text)
    if not parser.has_section(section):
        parser.add_section(section)
    parser.set(section, key, value)
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


def _parser() -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None, empty_lines_in_values=False)
    parser.optionxform = str
    return parser


_SECTION = re.compile(r"^\s*\[([^\]]+)\]")
_KEY = re.compile(r"^\s*([^\s=:#;\[][^=:]*?)\s*[=:]")


def _locate(text: str) -> Dict[Tuple[str, Optional[str]], int]:
    lines: Dict[Tuple[str, Optional[str]], int] = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        match = _SECTION.match(line)
        if match:
            section = match.group(1).strip()
            lines.setdefault((section, None), number)
            continue
        match = _KEY.match(line)
        if match and section is not None:
            lines.setdefault((section, match.group(1).strip()), number)
    return lines


def parse_number(text: str) -> float:
    """A float, or a multiple of pi written `pi`, `4pi` or `4*pi`."""
    token = text.strip().lower()
    if token.endswith("pi"):
        prefix = token[:-2].rstrip("*").strip()
        factor = 1.0 if prefix in ("", "+") else -1.0 if prefix == "-" else float(prefix)
        return factor * np.pi
    return float(token)


def _numbers(text: str) -> Tuple[float, ...]:
    items = [item for item in text.split(",") if item.strip()]
    if not items:
        raise ValueError("expected a comma separated list of numbers")
    values = tuple(parse_number(item) for item in items)
    if not all(np.isfinite(values)):
        raise ValueError("every number must be finite")
    return values


def _number(text: str) -> float:
    value = parse_number(text)
    if not np.isfinite(value):
        raise ValueError("must be a finite number")
    return value


def _positive(text: str) -> float:
    value = _number(text)
    if not value > 0:
        raise ValueError("must be positive")
    return value


def _nonnegative(text: str) -> float:
    value = _number(text)
    if not value >= 0:
        raise ValueError("must be non-negative")
    return value


def _positive_numbers(text: str) -> Tuple[float, ...]:
    values = _numbers(text)
    if not all(v > 0 for v in values):
        raise ValueError("every entry must be positive")
    return values


def _points(text: str) -> Tuple[Tuple[float, ...], ...]:
    return tuple(_numbers(point) for point in text.split(";") if point.strip())


def _counts(text: str) -> Tuple[int, ...]:
    try:
        values = tuple(int(item) for item in text.split(",") if item.strip())
    except ValueError:
        raise ValueError("expected a comma separated list of integers") from None
    if not values or not all(v >= defaults.MIN_CELLS for v in values):
        raise ValueError(f"every axis needs at least {defaults.MIN_CELLS} cells")
    return values


def _count(minimum: int) -> Callable[[str], int]:
    def convert(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise ValueError("must be an integer") from None
        if value < minimum:
            raise ValueError(f"must be at least {minimum}")
        return value

    return convert


def _choice(*options: str) -> Callable[[str], str]:
    def convert(text: str) -> str:
        value = text.strip()
        if value not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return value

    return convert


def _branches(text: str) -> Tuple[str, ...]:
    return tuple(_Branch.from_str(item).to_str() for item in text.split(",") if item.strip())


class TemplateTerm(NamedTuple):
    name: str
    args: Tuple[str, ...]


_TEMPLATE_ARITY = {
    "constant": (1, 1),
    "constant-plus-cosine": (3, 4),
    "gaussian-bump": (2, 4),
    "cosine-of-square": (2, 2),
    "pattern": (1, 64),
}
_CALL = re.compile(r"^\s*([a-z][a-z0-9-]*)\s*\((.*)\)\s*$", re.DOTALL)


def _split_terms(text: str) -> List[str]:
    terms, depth, start = [], 0, 0
    for i, char in enumerate(text):
        depth += char == "("
        depth -= char == ")"
        if depth < 0:
            raise ValueError("unbalanced parentheses")
        if char == "+" and depth == 0:
            terms.append(text[start:i])
            start = i + 1
    if depth != 0:
        raise ValueError("unbalanced parentheses")
    terms.append(text[start:])
    return terms


def _call(text: str) -> Tuple[str, Tuple[str, ...]]:
    match = _CALL.match(text)
    if not match:
        raise ValueError(f"expected name(arguments), got {text.strip()!r}")
    args = tuple(a.strip() for a in match.group(2).split(",") if a.strip())
    return match.group(1), args


def parse_template(text: str) -> Tuple[TemplateTerm, ...]:
    """
    Parses an initial condition: `+` separated terms, each one of `constant(v)`,
    `constant-plus-cosine(base, amp, wavenumber[, phase])`, `gaussian-bump(height, rate[, center...])`,
    `cosine-of-square(amp, wavenumber)` or `pattern(branch, ...)`.
    """
    terms = []
    for piece in _split_terms(text):
        name, args = _call(piece)
        if name not in _TEMPLATE_ARITY:
            raise ValueError(f"unknown template {name!r}; expected one of {', '.join(_TEMPLATE_ARITY)}")
        low, high = _TEMPLATE_ARITY[name]
        if not low <= len(args) <= high:
            raise ValueError(f"{name} takes between {low} and {high} arguments, got {len(args)}")
        if name == "pattern":
            args = tuple(_Branch.from_str(a).to_str() for a in args)
        else:
            for a in args:
                _number(a)
        terms.append(TemplateTerm(name, args))
    return tuple(terms)


def _template(text: str) -> str:
    parse_template(text)
    return text.strip()


def _resource(text: str) -> str:
    name, args = _call(text)
    expected = {"constant": 1, "exp-potential": 0, "affine": 2}
    if name not in expected:
        raise ValueError("must be constant(v), exp-potential() or affine(a, b)")
    if len(args) != expected[name]:
        raise ValueError(f"{name} takes {expected[name]} argument(s)")
    values = [_number(a) for a in args]
    if name == "constant" and not values[0] > 0:
        raise ValueError("a constant resource must be positive")
    return text.strip()


def make_resource(spec: str, potential: Potential) -> ResourceFunction:
    """The resource density described by a validated `physics.resource` value."""
    name, args = _call(spec)
    values = [parse_number(a) for a in args]
    if name == "constant":
        return lambda points: np.full(len(points), values[0])
    if name == "exp-potential":
        return lambda points: np.exp(potential.value(points))
    return lambda points: values[0] + values[1] * np.asarray(points)[:, 0]


_SECTIONS: Dict[str, Dict[str, Callable[[str], object]]] = {
    "experiment": {"mode": _choice(*MODES)},
    "potential": {
        "kind": _choice("gaussian-sum", "quadratic"),
        "amplitudes": _numbers,
        "centers": _points,
        "widths": _positive_numbers,
        "offset": _number,
        "peak": _number,
        "location": _numbers,
        "curvatures": _positive_numbers,
    },
    "domain": {"lower": _numbers, "upper": _numbers, "cells": _counts},
    "physics": {
        "chi": _positive,
        "theta": _nonnegative,
        "d": _positive,
        "mu": _nonnegative,
        "speed": _positive,
        "reaction": _choice("cubic-allee", "logistic-allee"),
        "resource": _resource,
        "strategy": _choice("ifd", "aggressive"),
        "branches": _branches,
    },
    "initial": {"u": _template, "v": _template},
    "schedule": {
        "t_end": _positive,
        "snapshots": lambda text: tuple(sorted(_numbers(text))),
        "steady_tol": _positive,
        "dt_max": _positive,
        "dt_initial": _positive,
    },
    "output": {
        "directory": lambda text: text.strip(),
        "eigen_count": _count(1),
        "seeds_per_axis": _count(defaults.MIN_SEEDS_PER_AXIS),
    },
}

_REQUIRED = {
    "analyze": [("potential", "kind"), ("domain", "lower"), ("domain", "upper"), ("physics", "chi"), ("physics", "theta")],
    "simulate": [("initial", "u"), ("schedule", "t_end")],
    "eig": [("initial", "u"), ("schedule", "t_end")],
    "compete": [("initial", "u"), ("initial", "v"), ("schedule", "t_end")],
}


class _Reader:
    """Reads and converts values, collecting every problem instead of stopping at the first."""

    def __init__(self, parser: configparser.ConfigParser, lines: Dict[Tuple[str, Optional[str]], int]):
        self.parser = parser
        self.lines = lines
        self.issues: List[ConfigIssue] = []
        self.values: Dict[Tuple[str, str], object] = {}

    def issue(self, section: str, key: Optional[str], message: str):
        line = self.lines.get((section, key), self.lines.get((section, None)))
        self.issues.append(ConfigIssue(line, section if key is None else f"{section}.{key}", message))

    def read_all(self):
        for section in self.parser.sections():
            if section == "sweep":
                continue
            if section not in _SECTIONS:
                self.issue(section, None, f"unknown section; expected one of {', '.join(list(_SECTIONS) + ['sweep'])}")
                continue
            for key, text in self.parser.items(section):
                convert = _SECTIONS[section].get(key)
                if convert is None:
                    self.issue(section, key, f"unknown key; expected one of {', '.join(_SECTIONS[section])}")
                    continue
                try:
                    self.values[(section, key)] = convert(text)
                except ValueError as error:
                    self.issue(section, key, f"{text.strip()!r} {error}")

    def has(self, section: str, key: str) -> bool:
        return (section, key) in self.values or self.parser.has_option(section, key)

    def section(self, name: str, cls):
        return cls(**{key: value for (section, key), value in self.values.items() if section == name})


def _check_potential(reader: _Reader, potential: PotentialSection):
    if potential.kind == "gaussian-sum":
        for key in ("amplitudes", "centers", "widths"):
            if not reader.has("potential", key):
                reader.issue("potential", key, "required for a gaussian-sum potential")
        if len(potential.amplitudes) and not (
            len(potential.amplitudes) == len(potential.centers) == len(potential.widths)
        ):
            reader.issue("potential", "centers", "amplitudes, centers and widths must have the same number of terms")
        if len(potential.centers) and len({len(c) for c in potential.centers}) != 1:
            reader.issue("potential", "centers", "every center must have the same number of coordinates")
    else:
        for key in ("peak", "location", "curvatures"):
            if not reader.has("potential", key):
                reader.issue("potential", key, "required for a quadratic potential")
        if len(potential.location) != len(potential.curvatures):
            reader.issue("potential", "curvatures", "one curvature per coordinate of location is required")


def parse_config(text: str, mode: Optional[str] = None) -> ExperimentConfig:
    """
    Parses and validates an experiment config.

    ### Parameters
    - **text**: INI text with the sections `[experiment]`, `[potential]`, `[domain]`, `[physics]`, `[initial]`,
      `[schedule]`, `[output]` and `[sweep]`. `#` starts a comment.
    - **mode**: overrides `experiment.mode` when given

    ### Returns
    `alleepy.ExperimentConfig`

    ### Raises
    `alleepy.ConfigError` listing every problem found, each with its line number
    """
    parser = _parser()
    try:
        parser.read_string(text)
    except configparser.Error as error:
        raise ConfigError([ConfigIssue(getattr(error, "lineno", None), "config", str(error).splitlines()[0])]) from None
    reader = _Reader(parser, _locate(text))
    reader.read_all()

    if mode is not None and mode not in MODES:
        reader.issue("experiment", "mode", f"{mode!r} must be one of {', '.join(MODES)}")
    chosen = mode if mode in MODES else reader.values.get(("experiment", "mode"))
    if chosen is None and not any(i.key == "experiment.mode" for i in reader.issues):
        reader.issue("experiment", "mode", "required; expected one of " + ", ".join(MODES))

    sweep = None
    run_mode = chosen
    if chosen == "sweep":
        sweep, run_mode = _read_sweep(reader)
    elif parser.has_section("sweep"):
        reader.issue("sweep", None, "only allowed in sweep mode")

    required = list(_REQUIRED["analyze"]) + (_REQUIRED.get(run_mode, []) if run_mode != "analyze" else [])
    for section, key in required:
        if not reader.has(section, key):
            reader.issue(section, key, f"required in {run_mode} mode")
    if reader.issues:
        raise ConfigError(reader.issues)

    potential = reader.section("potential", PotentialSection)
    _check_potential(reader, potential)
    if reader.issues:
        raise ConfigError(reader.issues)

    lower = reader.values[("domain", "lower")]
    upper = reader.values[("domain", "upper")]
    dimension = potential.dimension
    cells = reader.values.get(("domain", "cells"), (defaults.CELLS_1D,) if dimension == 1 else (defaults.CELLS_2D,) * 2)
    if dimension not in (1, 2):
        reader.issue("potential", None, "the potential must have 1 or 2 coordinates")
    if not len(lower) == len(upper) == len(cells) == dimension:
        reader.issue("domain", None, f"lower, upper and cells need {dimension} entries, like the potential")
    elif not all(lo < hi for lo, hi in zip(lower, upper)):
        reader.issue("domain", "upper", "every upper bound must exceed its lower bound")
    domain = DomainSection(tuple(lower), tuple(upper), tuple(cells))

    physics = reader.section("physics", PhysicsSection)
    if physics.reaction == "cubic-allee" and physics.theta >= 1:
        reader.issue("physics", "theta", "must be below 1 for the cubic Allee law")
    if physics.branches and potential.kind == "quadratic" and len(physics.branches) != 1:
        reader.issue("physics", "branches", "a quadratic potential has a single maximum")
    if run_mode == "compete" and physics.strategy == "aggressive" and physics.speed < 1:
        reader.issue("physics", "speed", "must be at least 1 for two directed species")
    if run_mode in ("simulate", "eig") and physics.reaction == "cubic-allee" and physics.resource != "constant(1)":
        reader.issue("physics", "resource", "the cubic Allee law takes no resource; use reaction = logistic-allee")
    if dimension == 2 and physics.resource.startswith("affine"):
        reader.issue("physics", "resource", "affine(a, b) is one-dimensional; use constant(v) or exp-potential() in 2D")

    schedule = reader.section("schedule", ScheduleSection)
    if schedule.dt_initial > schedule.dt_max:
        reader.issue("schedule", "dt_initial", "must not exceed dt_max")
    if reader.issues:
        raise ConfigError(reader.issues)

    config = ExperimentConfig(
        chosen,
        potential,
        domain,
        physics,
        reader.section("initial", InitialSection),
        schedule,
        reader.section("output", OutputSection),
        sweep,
    )
    if sweep is not None:
        _check_sweep(reader, config)
        if reader.issues:
            raise ConfigError(reader.issues)
    return config


def _read_sweep(reader: _Reader) -> Tuple[Optional[SweepSection], Optional[str]]:
    if not reader.parser.has_section("sweep"):
        reader.issue("sweep", None, "required in sweep mode")
        return None, None
    inner = None
    axes = []
    for key, text in reader.parser.items("sweep"):
        if key == "mode":
            try:
                inner = _choice(*RUN_MODES)(text)
            except ValueError as error:
                reader.issue("sweep", key, f"{text.strip()!r} {error}")
            continue
        section, _, name = key.partition(".")
        if section not in _SECTIONS or section == "experiment" or name not in _SECTIONS[section]:
            reader.issue("sweep", key, "expected a parameter written section.key, like physics.chi")
            continue
        values = tuple(v.strip() for v in text.split(",") if v.strip())
        if not values:
            reader.issue("sweep", key, "needs at least one value")
            continue
        axes.append((key, values))
    if inner is None and not reader.parser.has_option("sweep", "mode"):
        reader.issue("sweep", "mode", "required; the mode every run executes")
    if not axes:
        reader.issue("sweep", None, "needs at least one parameter axis")
    return SweepSection(inner or "", tuple(axes)), inner


def _check_sweep(reader: _Reader, config: ExperimentConfig):
    for key, values in config.sweep.axes:
        for value in values:
            try:
                config.with_parameter(key, value)
            except ConfigError as error:
                for issue in error.issues:
                    reader.issue("sweep", key, f"value {value!r}: {issue.key}: {issue.message}")


def sweep_points(config: ExperimentConfig) -> List[Tuple[Tuple[str, str], ...]]:
    """Every combination of the sweep axes, the first axis varying slowest."""
    points: List[Tuple[Tuple[str, str], ...]] = [()]
    for key, values in config.sweep.axes:
        points = [point + ((key, value),) for point in points for value in values]
    return points
