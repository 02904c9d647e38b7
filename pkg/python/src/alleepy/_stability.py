# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import logging
import warnings
from typing import List, Literal, NamedTuple, Optional, Sequence

import numpy as np

from . import Branch, Point, ResourceFunction, Verdict
from . import defaults
from ._asymptotics import (
    CoexistenceRoot,
    IfdThreshold,
    SpikePattern,
    balancing_jacobian,
    balancing_residuals,
    build_pattern,
    ifd_threshold,
    resource_moments,
)
from ._common import _assert, _assert_dimension, _assert_is_positive, _combine_verdicts, _verdict_from_eigenvalue
from ._potential import Box, CriticalPoint

__ALL__ = [
    "h_eval",
    "classify_pattern",
    "ifd_equilibria_report",
    "coexistence_stability",
    "determinant_polynomial",
]

logger = logging.getLogger(__name__)


class HValue(NamedTuple):
    h: float
    h_prime: float


def h_eval(n: int, theta: float, xi: float, plateau: float = 1.0) -> HValue:
    """
    The reduced balance function `h(xi) = xi * (-2^(n/2) xi^2 + 3^(n/2) (a + theta) xi - 6^(n/2) theta a)` and its
    derivative. Its nonzero roots are the spike heights; the sign of `h'` at a height decides stability.

    ### Parameters
    - **n**: spatial dimension
    - **theta**: Allee threshold
    - **xi**: where to evaluate
    - **plateau**: `a`, the carrying capacity at the site

    ### Returns
    `alleepy.HValue`
    """
    _assert_dimension(n)
    p = n / 2
    a2, a1, a0 = -(2.0**p), 3.0**p * (plateau + theta), -(6.0**p) * theta * plateau
    h = xi * (a2 * xi**2 + a1 * xi + a0)
    h_prime = 3.0 * a2 * xi**2 + 2.0 * a1 * xi + a0
    return HValue(float(h), float(h_prime))


class SiteStability(NamedTuple):
    center: Point
    branch: Branch
    height: float
    h_prime: float
    lambda_leading: float
    """ `alpha0 * h_prime` """
    lambda_mean_field: float
    """
    `6^(-n/2) * h_prime`, the average of `f'` over the Gaussian spike profile. Numerically computed leading
    eigenvalues approach this value as `chi` grows; it equals `-theta` at a site that is off.
    """
    verdict: Verdict


class StabilityReport(NamedTuple):
    sites: List[SiteStability]
    verdict: Verdict
    """ "linearly-stable" when every site is tall or off, "unstable" as soon as one site is short """
    alpha0: float
    """ `pi^(-n/2)` """


def classify_pattern(pattern: SpikePattern) -> StabilityReport:
    """
    Leading order stability of a spike pattern from the sign of `h'` at each site height.

    ### Parameters
    - **pattern**: a pattern from `alleepy.build_pattern`

    ### Returns
    `alleepy.StabilityReport`
    """
    n = pattern.dimension
    alpha0 = np.pi ** (-n / 2)
    mean_field = 6.0 ** (-n / 2)
    sites = []
    for site in pattern.sites:
        slope = h_eval(n, pattern.theta, site.height, site.plateau).h_prime
        leading = alpha0 * slope
        sites.append(
            SiteStability(
                site.center,
                site.branch,
                site.height,
                slope,
                leading,
                mean_field * slope,
                _verdict_from_eigenvalue(leading),
            )
        )
    verdict = _combine_verdicts([s.verdict for s in sites])
    if verdict == "marginal":
        warnings.warn("a site has a leading eigenvalue within the marginal tolerance of zero")
    return StabilityReport(sites, verdict, float(alpha0))


class EquilibriumVerdict(NamedTuple):
    label: str
    eigenvalue: float
    """ Deciding eigenvalue, signed """
    verdict: Verdict
    notes: List[str]


class IfdReport(NamedTuple):
    """Verdicts for the equilibria of a directed species `u` competing with an ideal free species `v`."""

    zero_resource: EquilibriumVerdict
    """ `(0, r)`: the ideal free species alone, matching the resource """
    scaled_resource: EquilibriumVerdict
    """ `(0, beta theta r)` """
    directed_spikes: EquilibriumVerdict
    """ `(u*, 0)`: the directed species alone, spiking on the maxima """
    beta: float
    threshold: IfdThreshold
    pattern: SpikePattern
    """ The plateau-scaled spike pattern `u*` """
    stability: StabilityReport
    """ Per-site verdicts of `u*` against perturbations of `u` """
    psi_eigenvalue: float
    """ Leading eigenvalue of `u*` against invasion by `v`, `-theta int r^2 / int r` """


def ifd_equilibria_report(
    n: int,
    theta: float,
    resource: ResourceFunction,
    domain: Box,
    maxima: Sequence[CriticalPoint],
    chi: float,
    branches: Optional[Sequence[Branch]] = None,
    nodes: int = defaults.QUADRATURE_NODES,
) -> IfdReport:
    """
    Classifies the three equilibrium families of the ideal free competition.

    ### Parameters
    - **n**: spatial dimension
    - **theta**: Allee threshold, positive
    - **resource**: the resource density `r`, positive on `domain`
    - **domain**: the box the populations live on
    - **maxima**: maxima of the signal `A = ln r` the directed species follows
    - **chi**: advection strength of the directed species
    - **branches**: branch per maximum for `u*`; all tall by default
    - **nodes**: quadrature nodes per axis

    ### Returns
    `alleepy.IfdReport`
    """
    _assert_dimension(n)
    _assert_is_positive(theta, "theta")
    _assert_is_positive(chi, "chi")
    _assert(len(maxima) > 0, "at least one maximum is required")
    branches = ["tall"] * len(maxima) if branches is None else list(branches)
    moments = resource_moments(resource, domain, nodes)
    beta = moments.m2 / moments.m3
    p = n / 2

    zero_lambda = (theta * moments.m2 - moments.m3) / moments.m1
    zero_notes = []
    zero_verdict = _verdict_from_eigenvalue(zero_lambda)
    if zero_verdict == "marginal":
        zero_notes.append(f"theta={theta} sits on 1/beta={1 / beta:.12g}")
    zero_resource = EquilibriumVerdict("(0,r)", float(zero_lambda), zero_verdict, zero_notes)

    plateaus = [float(np.asarray(resource(point.location[np.newaxis])).reshape(-1)[0]) for point in maxima]
    scaled_lambda = max(np.pi**-p * a * theta * (1.0 - beta * theta) * (beta - 1.0) for a in plateaus)
    scaled_notes = []
    if scaled_lambda < 0:
        message = (
            f"(0,beta*theta*r) eigenvalue {scaled_lambda:.6g} is negative because beta={beta:.6g} < 1; "
            "reported as computed although this family is expected to be unstable for theta < 1/beta"
        )
        scaled_notes.append(message)
        warnings.warn(message)
    scaled_resource = EquilibriumVerdict(
        "(0,beta*theta*r)", float(scaled_lambda), _verdict_from_eigenvalue(scaled_lambda), scaled_notes
    )

    pattern = build_pattern(maxima, branches, chi, theta, n, plateaus=plateaus)
    stability = classify_pattern(pattern)
    psi_lambda = -theta * moments.m2 / moments.m1
    active = [i for i, b in enumerate(pattern.sites) if b.branch != "off"]
    ordered = [(plateaus[i], maxima[i].h) for i in active] + [
        (plateaus[i], maxima[i].h) for i in range(len(maxima)) if i not in active
    ]
    threshold = ifd_threshold(n, ordered, len(active), resource, domain, nodes)
    directed_notes = []
    directed_verdict = _combine_verdicts([stability.verdict, _verdict_from_eigenvalue(psi_lambda)])
    bound = threshold.epsilon_star / chi**p
    if theta < bound:
        directed_verdict = "unstable"
        directed_notes.append(f"theta={theta} is below epsilon*/chi^(n/2)={bound:.6g}; the ideal free species invades")
    directed_lambda = max(s.lambda_leading for s in stability.sites)
    directed_spikes = EquilibriumVerdict("(u*,0)", float(directed_lambda), directed_verdict, directed_notes)
    logger.info(
        "ideal free report: (0,r) %s, (0,beta*theta*r) %s, (u*,0) %s",
        zero_verdict,
        scaled_resource.verdict,
        directed_verdict,
    )
    return IfdReport(
        zero_resource, scaled_resource, directed_spikes, float(beta), threshold, pattern, stability, float(psi_lambda)
    )


def determinant_polynomial(n: int, c: float, theta: float, s1: float, s2: float) -> float:
    """
    The expanded polynomial `-a1 S1^2 - a2 S1 S2 - a3 S1 - a4 S2^2 - a5 S2 - a6`. It equals the determinant of
    `alleepy.balancing_jacobian` identically.
    """
    p = n / 2
    t1 = 1.0 + theta
    a1 = 4.0 * ((c + 2.0) ** -n - (6.0 * c + 3.0) ** -p)
    a2 = 4.0 * (((2.0 + c) * (2.0 * c + 1.0)) ** -p - (9.0 * c) ** -p)
    a3 = 2.0 * ((6.0 * c) ** -p + (4.0 * c + 2.0) ** -p - 2.0 * ((c + 2.0) * (c + 1.0)) ** -p) * t1
    a4 = 4.0 * ((2.0 * c + 1.0) ** -n - (6.0 * c + 3.0 * c**2) ** -p)
    a5 = 2.0 * t1 * (-2.0 * ((2.0 * c + 1.0) * (c + 1.0)) ** -p + (c * (4.0 + 2.0 * c)) ** -p + (6.0 * c) ** -p)
    a6 = ((c + 1.0) ** -n - (4.0 * c) ** -p) * t1**2
    return float(-a1 * s1**2 - a2 * s1 * s2 - a3 * s1 - a4 * s2**2 - a5 * s2 - a6)


class CoexistenceVerdict(NamedTuple):
    b11: float
    """ dI1/dS1 """
    b12: float
    """ dI1/dS2, identical to dI2/dS1 """
    b22: float
    """ dI2/dS2 """
    trace: float
    determinant: float
    verdict: Literal["stable-candidate", "unstable"]
    det_crosscheck: float
    """ `determinant_polynomial` at the root; matches `determinant` with sign +1 """


def coexistence_stability(n: int, c: float, theta: float, root: CoexistenceRoot) -> CoexistenceVerdict:
    """
    Trace and determinant test for coexisting spikes. Only the signs matter, so the unit-constant Jacobian of
    `(I1, I2)` stands in for the full reduced matrix.

    A negative determinant or a positive trace means unstable. Anything else is only a candidate: it inherits the
    single-species argument for each site and is not proven stable here.
    """
    _assert_dimension(n)
    i1, i2 = balancing_residuals(n, c, theta, root.s1, root.s2)
    _assert(
        max(abs(float(i1)), abs(float(i2))) <= 1e-9,
        f"({root.s1}, {root.s2}) does not solve the balancing system (residuals {float(i1):.3g}, {float(i2):.3g})",
    )
    jacobian = balancing_jacobian(n, c, theta, root.s1, root.s2)
    trace = float(np.trace(jacobian))
    determinant = float(jacobian[0, 0] * jacobian[1, 1] - jacobian[0, 1] * jacobian[1, 0])
    verdict = "unstable" if determinant < 0 or trace > 0 else "stable-candidate"
    return CoexistenceVerdict(
        float(jacobian[0, 0]),
        float(jacobian[0, 1]),
        float(jacobian[1, 1]),
        trace,
        determinant,
        verdict,
        determinant_polynomial(n, c, theta, root.s1, root.s2),
    )
