# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import itertools
import logging
import warnings
from typing import List, Literal, NamedTuple, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy.optimize import brentq

from . import Point
from . import defaults
from ._common import _as_point, _as_points, _assert, _assert_dimension, _assert_finite, _readonly

__ALL__ = ["Box", "Potential", "evaluate_jet", "find_maxima", "find_critical_points", "verify_hypotheses"]

logger = logging.getLogger(__name__)

PotentialKind = Literal["gaussian-sum", "quadratic"]


class Box(NamedTuple):
    """An axis-aligned interval or rectangle."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def validate(self):
        _assert_dimension(len(self.lower), "box dimension")
        _assert(len(self.lower) == len(self.upper), "box lower and upper bounds must have the same dimension")
        _assert(
            all(lo < hi for lo, hi in zip(self.lower, self.upper)),
            "box lower bounds must be strictly below the upper bounds",
        )

    def contains(self, point: Point, slack: float = 0.0) -> bool:
        return bool(
            np.all(point >= np.asarray(self.lower) - slack) and np.all(point <= np.asarray(self.upper) + slack)
        )

    def sample_axes(self, per_axis: int) -> List[np.ndarray]:
        return [np.linspace(lo, hi, per_axis) for lo, hi in zip(self.lower, self.upper)]


class Jet(NamedTuple):
    """Value, gradient and Hessian of a signal at one point."""

    value: float
    gradient: Point
    hessian: npt.NDArray[np.float64]


class Potential:
    """
    An analytic environmental signal `A` on 1 or 2 dimensions.

    Two families are supported:
    - **gaussian-sum**: `offset + sum_j a_j * exp(-|x - mu_j|^2 / sigma_j^2)`
    - **quadratic**: `peak - 1/2 * sum_i h_i * (x_i - p_i)^2`

    Values, gradients and Hessians are evaluated in closed form for any batch of points. Instances are immutable.
    """

    def __init__(
        self,
        kind: PotentialKind,
        dimension: int,
        amplitudes: Sequence[float] = (),
        centers: Sequence[Sequence[float]] = (),
        widths: Sequence[float] = (),
        offset: float = 0.0,
        peak: float = 0.0,
        location: Sequence[float] = (),
        curvatures: Sequence[float] = (),
    ):
        """
        Prefer the `Potential.gaussian_sum` and `Potential.quadratic` constructors.
        """
        _assert(kind in ("gaussian-sum", "quadratic"), "kind must be one of 'gaussian-sum' or 'quadratic'")
        _assert_dimension(dimension, "dimension")
        self._kind = kind
        self._dimension = dimension
        if kind == "gaussian-sum":
            self._amplitudes = _readonly(amplitudes)
            self._centers = _readonly(np.reshape(np.asarray(centers, dtype=np.float64), (-1, dimension)))
            self._widths = _readonly(widths)
            _assert(len(self._amplitudes) > 0, "a gaussian-sum potential needs at least one term")
            _assert(
                len(self._amplitudes) == len(self._centers) == len(self._widths),
                "amplitudes, centers and widths must have the same number of terms",
            )
            _assert(bool(np.all(self._widths > 0)), "all widths must be positive")
            _assert_finite(self._amplitudes, "amplitudes")
            _assert_finite(self._centers, "centers")
            self._offset = float(offset)
        else:
            self._peak = float(peak)
            self._location = _as_point(location, dimension, "location")
            self._location.setflags(write=False)
            self._curvatures = _readonly(curvatures)
            _assert(len(self._curvatures) == dimension, "one curvature per axis is required")
            _assert(bool(np.all(self._curvatures > 0)), "all curvatures must be positive")

    @classmethod
    def gaussian_sum(
        cls,
        amplitudes: Sequence[float],
        centers: Sequence[Sequence[float]],
        widths: Sequence[float],
        offset: float = 0.0,
    ) -> "Potential":
        """
        ### Parameters
        - **amplitudes**: `a_j` per term
        - **centers**: `mu_j` per term, each a sequence of 1 or 2 coordinates
        - **widths**: `sigma_j > 0` per term; the exponent is `-|x - mu_j|^2 / sigma_j^2`
        - **offset**: constant added to the sum
        """
        dimension = len(np.atleast_1d(centers[0])) if len(centers) > 0 else 1
        return cls("gaussian-sum", dimension, amplitudes=amplitudes, centers=centers, widths=widths, offset=offset)

    @classmethod
    def quadratic(cls, peak: float, location: Sequence[float], curvatures: Sequence[float]) -> "Potential":
        """
        ### Parameters
        - **peak**: `A_0`, the value at the maximum
        - **location**: the maximum
        - **curvatures**: `h_i > 0` per axis
        """
        location = np.atleast_1d(location)
        return cls("quadratic", len(location), peak=peak, location=location, curvatures=curvatures)

    @property
    def kind(self) -> PotentialKind:
        return self._kind

    @property
    def dimension(self) -> int:
        return self._dimension

    def value(self, points) -> np.ndarray:
        """`A` at every point; `points` has shape `(..., n)` (a bare scalar or 1d array is fine when `n = 1`)."""
        points = _as_points(points, self._dimension)
        if self._kind == "quadratic":
            diff = points - self._location
            return self._peak - 0.5 * np.sum(self._curvatures * diff**2, axis=-1)
        diff, terms = self._gaussian_terms(points)
        return self._offset + np.sum(terms, axis=-1)

    def gradient(self, points) -> np.ndarray:
        points = _as_points(points, self._dimension)
        if self._kind == "quadratic":
            return -self._curvatures * (points - self._location)
        diff, terms = self._gaussian_terms(points)
        return np.einsum("...j,...jk->...k", terms, -2.0 * diff / self._widths[:, None] ** 2)

    def hessian(self, points) -> np.ndarray:
        points = _as_points(points, self._dimension)
        n = self._dimension
        if self._kind == "quadratic":
            return np.broadcast_to(-np.diag(self._curvatures), points.shape[:-1] + (n, n)).copy()
        diff, terms = self._gaussian_terms(points)
        inv_w2 = 1.0 / self._widths**2
        outer = 4.0 * np.einsum("...ji,...jk->...jik", diff, diff) * (inv_w2**2)[:, None, None]
        outer = outer - 2.0 * np.eye(n) * inv_w2[:, None, None]
        return np.einsum("...j,...jik->...ik", terms, outer)

    def laplacian(self, points) -> np.ndarray:
        return np.trace(self.hessian(points), axis1=-2, axis2=-1)

    def _gaussian_terms(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        diff = points[..., np.newaxis, :] - self._centers
        terms = self._amplitudes * np.exp(-np.sum(diff**2, axis=-1) / self._widths**2)
        return diff, terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, Potential) or other._kind != self._kind or other._dimension != self._dimension:
            return False
        if self._kind == "quadratic":
            return (
                self._peak == other._peak
                and np.array_equal(self._location, other._location)
                and np.array_equal(self._curvatures, other._curvatures)
            )
        return (
            self._offset == other._offset
            and np.array_equal(self._amplitudes, other._amplitudes)
            and np.array_equal(self._centers, other._centers)
            and np.array_equal(self._widths, other._widths)
        )

    def __repr__(self) -> str:
        if self._kind == "quadratic":
            return f"Potential.quadratic(peak={self._peak!r}, location={self._location.tolist()!r}, curvatures={self._curvatures.tolist()!r})"
        return (
            f"Potential.gaussian_sum(amplitudes={self._amplitudes.tolist()!r}, centers={self._centers.tolist()!r}, "
            f"widths={self._widths.tolist()!r}, offset={self._offset!r})"
        )


def evaluate_jet(potential: Potential, x) -> Jet:
    """
    Exact value, gradient and Hessian of the signal at one point.

    ### Parameters
    - **potential**: the signal
    - **x**: a point with `potential.dimension` coordinates

    ### Returns
    `alleepy.Jet`
    """
    point = _as_point(x, potential.dimension)
    return Jet(
        value=float(potential.value(point[np.newaxis])[0]),
        gradient=potential.gradient(point[np.newaxis])[0],
        hessian=potential.hessian(point[np.newaxis])[0],
    )


class CriticalPoint(NamedTuple):
    """A point where the gradient of the signal vanishes."""

    location: Point
    value: float
    """ `A_m`, the signal at `location` """
    h: Tuple[float, ...]
    """ Negated Hessian eigenvalues, ordered by descending Hessian eigenvalue. All positive at a maximum. """
    kind: Literal["maximum", "other"]
    hessian: npt.NDArray[np.float64]

    @property
    def curvature(self) -> npt.NDArray[np.float64]:
        """ The negated Hessian; its eigenvalues are `h`. """
        return -self.hessian


class CriticalPointSearch(NamedTuple):
    maxima: List[CriticalPoint]
    """ Non-degenerate maxima sorted by descending value """
    others: List[CriticalPoint]
    """ Minima, saddles and degenerate points """
    diagnostics: List[str]
    """ Candidates that could not be resolved, and degenerate points """


def _classify(potential: Potential, location: Point, diagnostics: List[str]) -> CriticalPoint:
    jet = evaluate_jet(potential, location)
    eigenvalues = np.sort(np.linalg.eigvalsh(jet.hessian))[::-1]
    degenerate = bool(np.any(np.abs(eigenvalues) < defaults.DEGENERACY_TOLERANCE))
    if degenerate:
        diagnostics.append(f"degenerate critical point at {location.tolist()} with Hessian eigenvalues {eigenvalues.tolist()}")
    kind = "maximum" if not degenerate and bool(np.all(eigenvalues < 0)) else "other"
    location = location.copy()
    location.setflags(write=False)
    return CriticalPoint(location, jet.value, tuple(float(-e) for e in eigenvalues), kind, jet.hessian)


def _converged(potential: Potential, x: Point) -> bool:
    jet = evaluate_jet(potential, x)
    scale = max(1.0, float(np.linalg.norm(jet.hessian, 2)))
    return float(np.linalg.norm(jet.gradient)) <= defaults.NEWTON_TOLERANCE * scale


def _damped_newton(potential: Potential, x0: Point) -> Tuple[Point, bool]:
    x = x0.copy()
    for _ in range(defaults.NEWTON_MAX_ITERATIONS):
        jet = evaluate_jet(potential, x)
        gnorm = float(np.linalg.norm(jet.gradient))
        if gnorm <= defaults.NEWTON_TOLERANCE * max(1.0, float(np.linalg.norm(jet.hessian, 2))):
            return x, True
        try:
            step = np.linalg.solve(jet.hessian, jet.gradient)
        except np.linalg.LinAlgError:
            return x, False
        alpha = 1.0
        while alpha > 1e-10:
            candidate = x - alpha * step
            if float(np.linalg.norm(potential.gradient(candidate[np.newaxis])[0])) < gnorm:
                break
            alpha *= 0.5
        else:
            return x, _converged(potential, x)
        x = candidate
    return x, _converged(potential, x)


def _seeds_1d(potential: Potential, domain: Box, seeds_per_axis: int, diagnostics: List[str]) -> List[Point]:
    xs = domain.sample_axes(seeds_per_axis)[0]
    slopes = potential.gradient(xs)[:, 0]
    found = []
    for i in range(len(xs) - 1):
        if slopes[i] == 0.0:
            found.append(np.array([xs[i]]))
        elif slopes[i] * slopes[i + 1] < 0:
            try:
                root = brentq(
                    lambda t: float(potential.gradient(t)[0]), xs[i], xs[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500
                )
            except RuntimeError:
                diagnostics.append(f"no convergence for the slope sign change in [{xs[i]}, {xs[i + 1]}]")
                continue
            found.append(np.array([root]))
    if slopes[-1] == 0.0:
        found.append(np.array([xs[-1]]))
    return found


def _seeds_2d(potential: Potential, domain: Box, seeds_per_axis: int, diagnostics: List[str]) -> List[Point]:
    xs, ys = domain.sample_axes(seeds_per_axis)
    grid = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1)
    norms = np.sum(potential.gradient(grid) ** 2, axis=-1)
    padded = np.pad(norms, 1, constant_values=np.inf)
    # far field: gradient and Hessian both vanish to working precision around the seed
    flat = (np.sqrt(norms) <= defaults.DEGENERACY_TOLERANCE) & (
        np.max(np.abs(potential.hessian(grid)), axis=(-2, -1)) <= defaults.DEGENERACY_TOLERANCE
    )
    flat_padded = np.pad(flat, 1, constant_values=True)
    found = []
    for i, j in itertools.product(range(seeds_per_axis), range(seeds_per_axis)):
        neighbourhood = padded[i : i + 3, j : j + 3]
        if norms[i, j] > neighbourhood.min():
            continue
        if bool(np.all(flat_padded[i : i + 3, j : j + 3])):
            logger.debug("skipping seed %s where the signal is flat", grid[i, j].tolist())
            continue
        x, ok = _damped_newton(potential, grid[i, j])
        if not domain.contains(x, slack=defaults.MERGE_TOLERANCE):
            logger.debug("Newton from %s left the domain", grid[i, j].tolist())
            continue
        if not ok:
            diagnostics.append(f"damped Newton from {grid[i, j].tolist()} did not converge (stopped at {x.tolist()})")
            continue
        found.append(x)
    return found


def find_critical_points(
    potential: Potential, domain: Box, seeds_per_axis: int = defaults.SEEDS_PER_AXIS
) -> CriticalPointSearch:
    """
    Locate every critical point of the signal inside `domain`.

    In 1 dimension the slope is sampled and each sign change is bracketed and refined. In 2 dimensions local minima of
    the sampled gradient norm seed a damped Newton iteration on `grad A = 0`. Points closer than
    `alleepy.defaults.MERGE_TOLERANCE` are merged.

    ### Parameters
    - **potential**: the signal
    - **domain**: the box to search
    - **seeds_per_axis**: number of samples per axis, at least 8

    ### Returns
    `alleepy.CriticalPointSearch`
    """
    domain.validate()
    _assert(domain.dimension == potential.dimension, "domain and potential dimensions differ")
    _assert(seeds_per_axis >= defaults.MIN_SEEDS_PER_AXIS, f"seeds_per_axis must be at least {defaults.MIN_SEEDS_PER_AXIS}")
    diagnostics: List[str] = []
    if potential.dimension == 1:
        candidates = _seeds_1d(potential, domain, seeds_per_axis, diagnostics)
    else:
        candidates = _seeds_2d(potential, domain, seeds_per_axis, diagnostics)

    unique: List[Point] = []
    for candidate in sorted(candidates, key=lambda p: tuple(p)):
        if all(np.linalg.norm(candidate - kept) > defaults.MERGE_TOLERANCE for kept in unique):
            unique.append(candidate)

    points = [_classify(potential, p, diagnostics) for p in unique]
    maxima = sorted((p for p in points if p.kind == "maximum"), key=lambda p: (-p.value, tuple(p.location)))
    others = [p for p in points if p.kind != "maximum"]
    return CriticalPointSearch(maxima, others, diagnostics)


def find_maxima(potential: Potential, domain: Box, seeds_per_axis: int = defaults.SEEDS_PER_AXIS) -> List[CriticalPoint]:
    """
    The non-degenerate local maxima of the signal inside `domain`, sorted by descending value.

    Unresolved candidates and degenerate points are reported with `warnings.warn`; use `find_critical_points` to get
    them as data.

    ### Parameters
    - **potential**: the signal
    - **domain**: the box to search
    - **seeds_per_axis**: number of samples per axis, at least 8

    ### Returns
    A list of `alleepy.CriticalPoint`
    """
    search = find_critical_points(potential, domain, seeds_per_axis)
    for message in search.diagnostics:
        warnings.warn(message)
    return search.maxima


class HypothesisReport(NamedTuple):
    a2_bound: float
    """ Largest sampled `|Laplacian A|` """
    h1_ok: bool
    """ Every critical point is a non-degenerate maximum or has a positive Laplacian """
    h2_ok: bool
    """ The outward normal derivative of `A` is negative at every sampled boundary point """
    violations: List[Tuple[Point, str]]


def _boundary_samples(domain: Box, samples_per_axis: int) -> List[Tuple[Point, Point]]:
    samples = []
    if domain.dimension == 1:
        samples.append((np.array([domain.lower[0]]), np.array([-1.0])))
        samples.append((np.array([domain.upper[0]]), np.array([1.0])))
        return samples
    xs, ys = domain.sample_axes(samples_per_axis)
    for x in xs:
        samples.append((np.array([x, domain.lower[1]]), np.array([0.0, -1.0])))
        samples.append((np.array([x, domain.upper[1]]), np.array([0.0, 1.0])))
    for y in ys:
        samples.append((np.array([domain.lower[0], y]), np.array([-1.0, 0.0])))
        samples.append((np.array([domain.upper[0], y]), np.array([1.0, 0.0])))
    return samples


def verify_hypotheses(
    potential: Potential, domain: Box, samples_per_axis: int = defaults.HYPOTHESIS_SAMPLES
) -> HypothesisReport:
    """
    Checks the structural assumptions spike patterns rely on: every critical point is either a non-degenerate maximum
    or has `Laplacian A > 0`, and `A` decreases towards the boundary. Failures are collected, never raised.

    ### Parameters
    - **potential**: the signal
    - **domain**: the box the population lives in
    - **samples_per_axis**: interior and boundary samples per axis, at least 64

    ### Returns
    `alleepy.HypothesisReport`
    """
    _assert(
        samples_per_axis >= defaults.HYPOTHESIS_SAMPLES,
        f"samples_per_axis must be at least {defaults.HYPOTHESIS_SAMPLES}",
    )
    domain.validate()
    axes = domain.sample_axes(samples_per_axis)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    a2_bound = float(np.max(np.abs(potential.laplacian(grid))))

    violations: List[Tuple[Point, str]] = []
    search = find_critical_points(potential, domain, samples_per_axis)
    h1_ok = True
    for point in search.others:
        laplacian = float(np.trace(point.hessian))
        if laplacian <= 0:
            h1_ok = False
            violations.append((point.location, f"critical point is not a non-degenerate maximum and has Laplacian {laplacian:.6g}"))
    for message in search.diagnostics:
        logger.warning("critical point search: %s", message)

    h2_ok = True
    for location, normal in _boundary_samples(domain, samples_per_axis):
        slope = float(potential.gradient(location[np.newaxis])[0] @ normal)
        if not slope < 0:
            h2_ok = False
            violations.append((location, f"outward normal derivative is {slope:.6g}, not negative"))
    return HypothesisReport(a2_bound, h1_ok, h2_ok, violations)
