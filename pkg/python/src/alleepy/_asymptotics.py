# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import logging
import warnings
from typing import List, Literal, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy.optimize import brentq

from . import Branch, Point, ResourceFunction
from . import defaults
from ._common import (
    _as_points,
    _assert,
    _assert_dimension,
    _assert_is_nonnegative,
    _assert_is_positive,
    _Branch,
)
from ._potential import Box, CriticalPoint

__ALL__ = [
    "theta_max",
    "spike_heights",
    "build_pattern",
    "evaluate_pattern",
    "balancing_residuals",
    "balancing_jacobian",
    "coexistence_branches",
    "solve_coexistence",
    "resource_moments",
    "resource_beta",
    "epsilon_star",
    "ifd_threshold",
]

logger = logging.getLogger(__name__)

CoexistenceCase = Literal["i", "ii", "iii", "iv"]


def theta_max(n: int, plateau: float = 1.0) -> float:
    """
    The admissibility threshold: spikes of both heights exist exactly when `0 < theta < theta_max(n, plateau)`.

    ### Parameters
    - **n**: spatial dimension, 1 or 2
    - **plateau**: `a`, the carrying capacity at the site. `1` for the cubic Allee law.

    ### Returns
    `plateau * (2**(n+1) - 2*sqrt(4**n - 2**n * 3**(n/2)) - 3**(n/2)) / 3**(n/2)`
    """
    _assert_dimension(n)
    _assert_is_positive(plateau, "plateau")
    s3 = 3.0 ** (n / 2)
    return plateau * (2.0 ** (n + 1) - 2.0 * np.sqrt(4.0**n - 2.0**n * s3) - s3) / s3


class HeightPair(NamedTuple):
    """The two roots of the height quadratic `2^(n/2) c^2 - 3^(n/2) (a + theta) c + 6^(n/2) theta a = 0`."""

    c01: float
    """ The tall height, `nan` when the discriminant is negative """
    c02: float
    """ The short height, `nan` when the discriminant is negative """
    discriminant: float
    admissible: bool
    """ Both heights are real and positive, and `theta` is below `plateau * theta_max(n)` """
    plateau: float

    def height(self, branch: Union[Branch, _Branch]) -> float:
        branch = branch if isinstance(branch, _Branch) else _Branch.from_str(branch)
        if branch is _Branch.TALL:
            return self.c01
        if branch is _Branch.SHORT:
            return self.c02
        return 0.0


def height_quadratic(n: int, theta: float, c, plateau: float = 1.0):
    p = n / 2
    return 2.0**p * c**2 - 3.0**p * (plateau + theta) * c + 6.0**p * theta * plateau


def spike_heights(n: int, theta: float, plateau: float = 1.0) -> HeightPair:
    """
    Solves the height quadratic.

    Spike heights depend on `n`, `theta` and the plateau only; Hessians and `chi` never enter. An inadmissible
    `theta` is not an error: the pair comes back with `admissible = False`.

    ### Parameters
    - **n**: spatial dimension, 1 or 2
    - **theta**: Allee threshold, non-negative
    - **plateau**: `a`, the carrying capacity at the site

    ### Returns
    `alleepy.HeightPair`
    """
    _assert_dimension(n)
    _assert_is_nonnegative(theta, "theta")
    _assert_is_positive(plateau, "plateau")
    p = n / 2
    b = 3.0**p * (plateau + theta)
    product = 6.0**p * theta * plateau
    discriminant = b**2 - 4.0 * 2.0**p * product
    if discriminant < 0:
        return HeightPair(np.nan, np.nan, discriminant, False, plateau)
    # b >= 0, so the tall root never cancels; the short one comes from the product of the roots
    q = 0.5 * (b + np.sqrt(discriminant))
    c01 = q / 2.0**p
    c02 = product / q if q > 0 else 0.0
    admissible = bool(discriminant > 0 and 0 < theta < theta_max(n, plateau) and c02 > 0)
    return HeightPair(float(c01), float(c02), float(discriminant), admissible, plateau)


class SpikeSite(NamedTuple):
    center: Point
    h: Tuple[float, ...]
    """ Negated Hessian eigenvalues of the signal at `center` """
    curvature: npt.NDArray[np.float64]
    """ Negated Hessian of the signal at `center`; its eigenvalues are `h` """
    branch: Branch
    height: float
    """ Leading order height, exactly `0` for sites that are off """
    plateau: float


class SpikePattern(NamedTuple):
    """
    A leading order multi-spike steady state
    `u(x) = sum_m c_m exp(-chi * speed / 2 * (x - x_m)^T K_m (x - x_m))` with `K_m` the negated Hessian at `x_m`.
    """

    sites: Tuple[SpikeSite, ...]
    dimension: int
    theta: float
    chi: float
    speed: float
    """ Multiplies `chi` inside the exponent, for a species that advects `speed` times faster """
    close_pairs: Tuple[Tuple[int, int], ...]
    """ Indices of active sites closer than `alleepy.defaults.SEPARATION_STANDARD_DEVIATIONS` spike widths """


def _spike_width(site: SpikeSite, chi: float, speed: float) -> float:
    return 1.0 / np.sqrt(min(site.h) * chi * speed)


def build_pattern(
    maxima: Sequence[CriticalPoint],
    branches: Sequence[Branch],
    chi: float,
    theta: float,
    n: int,
    plateaus: Optional[Sequence[float]] = None,
    speed: float = 1.0,
) -> SpikePattern:
    """
    Places one spike on each maximum of the signal, following the requested branch of the height quadratic.

    ### Parameters
    - **maxima**: the non-degenerate maxima, usually from `alleepy.find_maxima`
    - **branches**: one of {"tall", "short", "off"} per maximum, at least one of them not "off"
    - **chi**: advection strength, positive
    - **theta**: Allee threshold, in `[0, plateau * theta_max(n))` for every site
    - **n**: spatial dimension
    - **plateaus**: carrying capacity per site; `1` everywhere by default
    - **speed**: advection multiplier of the species, positive

    ### Returns
    `alleepy.SpikePattern`
    """
    _assert_dimension(n)
    _assert(len(maxima) > 0, "at least one maximum is required")
    _assert(len(branches) == len(maxima), "one branch per maximum is required")
    _assert_is_positive(chi, "chi")
    _assert_is_positive(speed, "speed")
    _assert_is_nonnegative(theta, "theta")
    plateaus = [1.0] * len(maxima) if plateaus is None else list(plateaus)
    _assert(len(plateaus) == len(maxima), "one plateau per maximum is required")
    tags = [_Branch.from_str(b) for b in branches]
    _assert(any(tag is not _Branch.OFF for tag in tags), "at least one site must be tall or short")

    sites = []
    for point, tag, plateau in zip(maxima, tags, plateaus):
        _assert(point.kind == "maximum", f"{point.location.tolist()} is not a non-degenerate maximum")
        _assert(len(point.location) == n, "maxima must have n coordinates")
        threshold = theta_max(n, plateau)
        _assert(
            theta < threshold,
            f"theta={theta} is not below the admissibility threshold theta_max={threshold:.12g} (n={n}, plateau={plateau})",
        )
        pair = spike_heights(n, theta, plateau)
        sites.append(SpikeSite(point.location, point.h, point.curvature, tag.to_str(), pair.height(tag), plateau))

    close_pairs = []
    for i in range(len(sites)):
        for j in range(i + 1, len(sites)):
            if sites[i].branch == "off" or sites[j].branch == "off":
                continue
            width = max(_spike_width(sites[i], chi, speed), _spike_width(sites[j], chi, speed))
            distance = float(np.linalg.norm(sites[i].center - sites[j].center))
            if distance < defaults.SEPARATION_STANDARD_DEVIATIONS * width:
                close_pairs.append((i, j))
                warnings.warn(
                    f"spikes at {sites[i].center.tolist()} and {sites[j].center.tolist()} are {distance:.3g} apart, "
                    f"less than {defaults.SEPARATION_STANDARD_DEVIATIONS:g} widths ({width:.3g}); they interact"
                )
    return SpikePattern(tuple(sites), n, float(theta), float(chi), float(speed), tuple(close_pairs))


def evaluate_pattern(pattern: SpikePattern, x) -> Union[float, np.ndarray]:
    """
    Evaluates a pattern at one point (returns a float) or at a batch of points shaped `(..., n)` (returns an array).
    """
    points = _as_points(x, pattern.dimension)
    total = np.zeros(points.shape[:-1])
    scale = 0.5 * pattern.chi * pattern.speed
    for site in pattern.sites:
        if site.height == 0.0:
            continue
        diff = points - site.center
        quadratic = np.einsum("...i,ij,...j->...", diff, site.curvature, diff)
        total = total + site.height * np.exp(-scale * quadratic)
    return float(total) if total.ndim == 0 else total


def balancing_residuals(n: int, c: float, theta: float, s1, s2) -> Tuple[np.ndarray, np.ndarray]:
    """
    The two balancing conditions `(I1, I2)` of a coexisting pair of spikes with heights `S1` (species moving at speed
    1) and `S2` (species moving at speed `c`). Works elementwise on arrays.
    """
    p = n / 2
    s1 = np.asarray(s1, dtype=np.float64)
    s2 = np.asarray(s2, dtype=np.float64)
    t1 = 1.0 + theta
    i1 = (
        -(3.0**-p) * s1**2
        - 2.0 * (c + 2.0) ** -p * s1 * s2
        - (2.0 * c + 1.0) ** -p * s2**2
        + 2.0**-p * t1 * s1
        + (c + 1.0) ** -p * t1 * s2
        - theta
    )
    i2 = (
        -((c + 2.0) ** -p) * s1**2
        - 2.0 * (2.0 * c + 1.0) ** -p * s1 * s2
        - (3.0 * c) ** -p * s2**2
        + (c + 1.0) ** -p * t1 * s1
        + (2.0 * c) ** -p * t1 * s2
        - c**-p * theta
    )
    return i1, i2


def balancing_jacobian(n: int, c: float, theta: float, s1: float, s2: float) -> npt.NDArray[np.float64]:
    """
    Closed-form Jacobian of `(I1, I2)` with respect to `(S1, S2)`. It is symmetric: `dI1/dS2` and `dI2/dS1` are the
    same expression.
    """
    p = n / 2
    t1 = 1.0 + theta
    d11 = t1 * 2.0**-p - 2.0 * 3.0**-p * s1 - 2.0 * (c + 2.0) ** -p * s2
    d12 = t1 * (c + 1.0) ** -p - 2.0 * (c + 2.0) ** -p * s1 - 2.0 * (2.0 * c + 1.0) ** -p * s2
    d22 = t1 * (2.0 * c) ** -p - 2.0 * (2.0 * c + 1.0) ** -p * s1 - 2.0 * (3.0 * c) ** -p * s2
    return np.array([[d11, d12], [d12, d22]])


class BranchValues(NamedTuple):
    """`S1` as a function of `S2` along `I1 = 0` (`g1 >= g2`) and `I2 = 0` (`g3 >= g4`). `nan` where undefined."""

    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    g4: np.ndarray
    delta1: np.ndarray
    delta2: np.ndarray


def _roots(a: float, b: np.ndarray, k: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    # roots of a*s^2 - b*s + k = 0, larger first
    delta = b**2 - 4.0 * a * k
    with np.errstate(invalid="ignore", divide="ignore"):
        sqrt_delta = np.sqrt(np.where(delta >= 0, delta, np.nan))
        q = 0.5 * (b + np.copysign(sqrt_delta, b))
        far = q / a
        near = np.where(q != 0, k / q, 0.0)
    plus = np.where(b >= 0, far, near)
    minus = np.where(b >= 0, near, far)
    return plus, minus, delta


def coexistence_branches(n: int, c: float, theta: float, s2) -> BranchValues:
    """
    Solves `I1 = 0` and `I2 = 0` for `S1` given `S2`. A branch is `nan` where its discriminant is negative; that is
    data, never an error.
    """
    p = n / 2
    s2 = np.asarray(s2, dtype=np.float64)
    t1 = 1.0 + theta
    b1 = 2.0**-p * t1 - 2.0 * (c + 2.0) ** -p * s2
    k1 = (2.0 * c + 1.0) ** -p * s2**2 - (c + 1.0) ** -p * t1 * s2 + theta
    b2 = (c + 1.0) ** -p * t1 - 2.0 * (2.0 * c + 1.0) ** -p * s2
    k2 = (3.0 * c) ** -p * s2**2 - (2.0 * c) ** -p * t1 * s2 + c**-p * theta
    g1, g2, delta1 = _roots(3.0**-p, b1, k1)
    g3, g4, delta2 = _roots((c + 2.0) ** -p, b2, k2)
    return BranchValues(g1, g2, g3, g4, delta1, delta2)


class CoexistenceRoot(NamedTuple):
    s1: float
    s2: float
    case: CoexistenceCase
    """ Which pair of branches meet: i (g1=g3), ii (g1=g4), iii (g2=g3) or iv (g2=g4) """
    residuals: Tuple[float, float]


_CASES = {"i": ("g1", "g3"), "ii": ("g1", "g4"), "iii": ("g2", "g3"), "iv": ("g2", "g4")}


def _branch_gap(n: int, c: float, theta: float, case: CoexistenceCase, s2) -> np.ndarray:
    first, second = _CASES[case]
    values = coexistence_branches(n, c, theta, s2)
    return getattr(values, first) - getattr(values, second)


def _polish(n: int, c: float, theta: float, s1: float, s2: float) -> Tuple[float, float]:
    x = np.array([s1, s2])
    best = np.abs(balancing_residuals(n, c, theta, *x)).max()
    for _ in range(8):
        residual = np.array(balancing_residuals(n, c, theta, *x))
        try:
            step = np.linalg.solve(balancing_jacobian(n, c, theta, *x), residual)
        except np.linalg.LinAlgError:
            break
        candidate = x - step
        size = np.abs(balancing_residuals(n, c, theta, *candidate)).max()
        if not size < best:
            break
        x, best = candidate, size
    return float(x[0]), float(x[1])


def _degenerate_family(n: int, theta: float) -> List[CoexistenceRoot]:
    pair = spike_heights(n, theta)
    roots = []
    samples = defaults.COEXISTENCE_FAMILY_SAMPLES
    for total, case in ((pair.c01, "i"), (pair.c02, "iv")):
        for s2 in total * np.arange(1, samples + 1) / (samples + 1):
            s1 = total - s2
            i1, i2 = balancing_residuals(n, 1.0, theta, s1, s2)
            roots.append(CoexistenceRoot(float(s1), float(s2), case, (float(i1), float(i2))))
    return roots


def solve_coexistence(n: int, c: float, theta: float) -> List[CoexistenceRoot]:
    """
    Finds coexisting spike heights `(S1, S2)`, both positive, where one branch of `I1 = 0` meets one branch of
    `I2 = 0`.

    `S2` is scanned over `(0, 2 c01]` with `alleepy.defaults.COEXISTENCE_SCAN_POINTS` samples; each sign change of a
    branch difference is bracketed, refined and then polished with Newton on `(I1, I2)`. At `c = 1` the system
    degenerates to the single-species quadratic in `S1 + S2`, and a sampled family on the two lines `S1 + S2 = c01`
    (case i) and `S1 + S2 = c02` (case iv) is returned instead.

    ### Parameters
    - **n**: spatial dimension
    - **c**: speed ratio, at least 1
    - **theta**: Allee threshold in `(0, theta_max(n))`

    ### Returns
    A list of `alleepy.CoexistenceRoot`, possibly empty
    """
    _assert_dimension(n)
    _assert(np.isfinite(c) and c >= 1, "c must be at least 1")
    threshold = theta_max(n)
    _assert(0 < theta < threshold, f"theta must be in (0, {threshold:.12g})")
    if c == 1.0:
        return _degenerate_family(n, theta)

    s2_max = 2.0 * spike_heights(n, theta).c01
    scan = np.linspace(s2_max / defaults.COEXISTENCE_SCAN_POINTS, s2_max, defaults.COEXISTENCE_SCAN_POINTS)
    roots: List[CoexistenceRoot] = []
    for case in _CASES:
        gap = _branch_gap(n, c, theta, case, scan)
        candidates = [float(s) for s, g in zip(scan, gap) if g == 0.0]
        for i in np.nonzero(np.isfinite(gap[:-1]) & np.isfinite(gap[1:]) & (gap[:-1] * gap[1:] < 0))[0]:
            try:
                candidates.append(
                    brentq(
                        lambda s: float(_branch_gap(n, c, theta, case, s)),
                        scan[i],
                        scan[i + 1],
                        xtol=defaults.BISECTION_TOLERANCE,
                    )
                )
            except ValueError:
                logger.debug("case %s: bracket [%g, %g] left the branch domain", case, scan[i], scan[i + 1])
        for s2 in candidates:
            s1 = float(getattr(coexistence_branches(n, c, theta, s2), _CASES[case][0]))
            s1, s2 = _polish(n, c, theta, s1, s2)
            if not (s1 > 0 and s2 > 0):
                continue
            i1, i2 = balancing_residuals(n, c, theta, s1, s2)
            if max(abs(i1), abs(i2)) > 1e-10:
                warnings.warn(f"case {case} root near S1={s1:.6g}, S2={s2:.6g} has residuals ({i1:.3g}, {i2:.3g})")
                continue
            if any(r.case == case and abs(r.s1 - s1) + abs(r.s2 - s2) < 1e-10 for r in roots):
                continue
            roots.append(CoexistenceRoot(s1, s2, case, (float(i1), float(i2))))
    logger.info("found %d coexistence root(s) for n=%d, c=%g, theta=%g", len(roots), n, c, theta)
    return roots


class ResourceMoments(NamedTuple):
    m1: float
    """ Integral of r """
    m2: float
    """ Integral of r^2 """
    m3: float
    """ Integral of r^3 """


def _gauss_legendre(lower: float, upper: float, nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    order = defaults.QUADRATURE_PANEL_ORDER
    panels = max(1, -(-nodes // order))
    reference, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lower, upper, panels + 1)
    half = 0.5 * np.diff(edges)
    middle = 0.5 * (edges[:-1] + edges[1:])
    points = (middle[:, None] + half[:, None] * reference).ravel()
    scaled = (half[:, None] * weights).ravel()
    return points, scaled


def resource_moments(
    resource: ResourceFunction, domain: Box, nodes: int = defaults.QUADRATURE_NODES
) -> ResourceMoments:
    """
    Integrals of `r`, `r^2` and `r^3` over `domain` by composite Gauss-Legendre quadrature with at least `nodes` nodes
    per axis.

    ### Parameters
    - **resource**: receives points shaped `(m, n)`, returns `m` values that must all be positive
    - **domain**: the box to integrate over
    - **nodes**: quadrature nodes per axis

    ### Returns
    `alleepy.ResourceMoments`
    """
    domain.validate()
    _assert(nodes >= defaults.QUADRATURE_PANEL_ORDER, f"nodes must be at least {defaults.QUADRATURE_PANEL_ORDER}")
    axes = [_gauss_legendre(lo, hi, nodes) for lo, hi in zip(domain.lower, domain.upper)]
    sums = np.zeros(3)
    if domain.dimension == 1:
        batches = [(axes[0][0][:, None], axes[0][1])]
    else:
        (xs, wx), (ys, wy) = axes
        # rows of the tensor grid, a few at a time to bound memory
        batches = (
            (
                np.stack(np.meshgrid(xs[i : i + 64], ys, indexing="ij"), axis=-1).reshape(-1, 2),
                (wx[i : i + 64, None] * wy[None, :]).ravel(),
            )
            for i in range(0, len(xs), 64)
        )
    for points, weights in batches:
        values = np.asarray(resource(points), dtype=np.float64).reshape(-1)
        _assert(len(values) == len(points), "the resource must return one value per point")
        _assert(bool(np.all(np.isfinite(values) & (values > 0))), "the resource must be positive at every quadrature node")
        sums += [weights @ values, weights @ values**2, weights @ values**3]
    return ResourceMoments(*(float(s) for s in sums))


def resource_beta(resource: ResourceFunction, domain: Box, nodes: int = defaults.QUADRATURE_NODES) -> float:
    """
    `beta = int r^2 / int r^3` over `domain`.
    """
    moments = resource_moments(resource, domain, nodes)
    return moments.m2 / moments.m3


def epsilon_star(n: int, c4: float = 1.0) -> float:
    """
    Below `epsilon_star / chi^(n/2)` a lone spike of the directed species is invaded by the ideal free species,
    whatever its branch.

    ### Parameters
    - **n**: spatial dimension
    - **c4**: the resource constant `int r^2 / (alpha1 pi^(n/2))`, see `ifd_threshold`
    """
    _assert_dimension(n)
    _assert_is_positive(c4, "c4")
    p = n / 2
    return (2.0**p * 4.0**n - 2.0**p * (2.0 * 3.0**p - 2.0**n) ** 2) / (4.0 * 4.0**n * c4)


class IfdThreshold(NamedTuple):
    alpha1: float
    """ Sum over the active sites of `plateau^3 / sqrt(prod h)` """
    c4: float
    epsilon_star: float


def ifd_threshold(
    n: int,
    sites: Sequence[Tuple[float, Sequence[float]]],
    active: int,
    resource: ResourceFunction,
    domain: Box,
    nodes: int = defaults.QUADRATURE_NODES,
) -> IfdThreshold:
    """
    The constants deciding whether a spike pattern of the directed species survives the ideal free one.

    ### Parameters
    - **n**: spatial dimension
    - **sites**: `(plateau, h)` per maximum, where `plateau = r(x_m)` and `h` the negated Hessian eigenvalues
    - **active**: how many of the leading `sites` carry a spike, at least 1
    - **resource**: the resource density
    - **domain**: the box the resource lives on

    ### Returns
    `alleepy.IfdThreshold`
    """
    _assert_dimension(n)
    _assert(1 <= active <= len(sites), "active must be between 1 and the number of sites")
    alpha1 = 0.0
    for plateau, h in sites[:active]:
        _assert_is_positive(plateau, "plateau")
        h = np.asarray(h, dtype=np.float64)
        _assert(len(h) == n and bool(np.all(h > 0)), "every site needs n positive curvatures")
        alpha1 += plateau**3 / np.sqrt(np.prod(h))
    moments = resource_moments(resource, domain, nodes)
    c4 = moments.m2 / (alpha1 * np.pi ** (n / 2))
    return IfdThreshold(float(alpha1), float(c4), epsilon_star(n, c4))
