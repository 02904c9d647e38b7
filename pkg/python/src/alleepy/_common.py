# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

from enum import Enum
from typing import List, NamedTuple, Optional, Sequence

import numpy as np

from . import Branch, Point, Verdict
from . import defaults

__ALL__ = [
    "AlleepyError",
    "SolverError",
    "ConvergenceError",
    "ConfigIssue",
    "ConfigError",
]


class AlleepyError(RuntimeError):
    """Base class for failures that happen while a computation is running."""


class SolverError(AlleepyError):
    """A linear solve failed, or a time step could not be made acceptable."""


class ConvergenceError(AlleepyError):
    """An iterative eigen-solve stopped before reaching its tolerance."""

    def __init__(self, message: str, residuals: Sequence[float] = ()):
        super().__init__(message)
        self.residuals = list(residuals)
        """ Residual norms of whatever eigenpairs were available when the solver gave up. """


class ConfigIssue(NamedTuple):
    """One problem found in an experiment config."""

    line: Optional[int]
    """ 1-based line number of the offending key or section, if it appears in the text """
    key: str
    """ `section.key` (or just the section) the issue refers to """
    message: str


class ConfigError(ValueError):
    """Raised with every issue found in a config, never just the first one."""

    def __init__(self, issues: Sequence[ConfigIssue]):
        self.issues: List[ConfigIssue] = list(issues)
        super().__init__("\n".join(_format_issue(issue) for issue in self.issues))


def _format_issue(issue: ConfigIssue) -> str:
    where = f"line {issue.line}: " if issue.line is not None else ""
    return f"{where}{issue.key}: {issue.message}"


def _assert(statement_eval: bool, message: str):
    if not statement_eval:
        raise ValueError(message)


def _assert_is_positive(test_value: float, parameter: str):
    _assert(
        test_value is not None and np.isfinite(test_value) and test_value > 0,
        f"{parameter} must be a positive finite number",
    )


def _assert_is_nonnegative(test_value: float, parameter: str):
    _assert(
        test_value is not None and np.isfinite(test_value) and test_value >= 0,
        f"{parameter} must be a non-negative finite number",
    )


def _assert_dimension(dimension: int, parameter: str = "n"):
    _assert(dimension in (1, 2), f"{parameter} must be 1 or 2")


def _assert_finite(values, parameter: str):
    _assert(bool(np.all(np.isfinite(values))), f"{parameter} must be finite")


def _as_point(x, dimension: int, parameter: str = "x") -> Point:
    point = np.atleast_1d(np.asarray(x, dtype=np.float64))
    _assert(
        point.ndim == 1 and point.shape[0] == dimension,
        f"{parameter} must have {dimension} coordinate(s), got shape {point.shape}",
    )
    _assert_finite(point, parameter)
    return point


def _as_points(x, dimension: int) -> np.ndarray:
    # scalars and 1d arrays are accepted for one dimensional problems
    points = np.asarray(x, dtype=np.float64)
    if dimension == 1 and (points.ndim == 0 or points.shape[-1] != 1):
        points = points[..., np.newaxis]
    _assert(
        points.shape[-1] == dimension,
        f"points must have {dimension} coordinate(s) on their last axis, got shape {points.shape}",
    )
    return points


def _readonly(values) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


def _verdict_from_eigenvalue(eigenvalue: float) -> Verdict:
    if not np.isfinite(eigenvalue):
        return "marginal"
    if eigenvalue > defaults.MARGINAL_TOLERANCE:
        return "unstable"
    if eigenvalue < -defaults.MARGINAL_TOLERANCE:
        return "linearly-stable"
    return "marginal"


def _combine_verdicts(verdicts: Sequence[Verdict]) -> Verdict:
    if "unstable" in verdicts:
        return "unstable"
    if "marginal" in verdicts:
        return "marginal"
    return "linearly-stable"


class _Branch(Enum):
    TALL = 0
    SHORT = 1
    OFF = 2

    @classmethod
    def from_str(cls, branch: str) -> "_Branch":
        try:
            return cls[branch.strip().upper()]
        except KeyError:
            raise ValueError(f"branch must be one of 'tall', 'short' or 'off', not {branch!r}") from None

    def to_str(self) -> Branch:
        if self is _Branch.TALL:
            return "tall"
        if self is _Branch.SHORT:
            return "short"
        return "off"
