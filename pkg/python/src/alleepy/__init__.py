# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

"""
# Documentation Overview
`alleepy` studies localized spike patterns of a population that disperses by diffusion and directed movement up
an environmental signal `A`, while its growth obeys a strong Allee effect. It is structured around 4 layers:
[the signal](#signal), [spike algebra](#spike-algebra), [stability](#stability) and
[simulation](#simulation), plus an [experiment harness](#experiment-harness) that drives all of them from a
config file.

It makes substantial use of type hints, with various shorthand [type aliases](#parameter-and-response-type-aliases)
documented. When reading the `alleepy` code we refer to the type aliases, though `pdoc` helpfully expands them.

## Signal
- `Potential` - an analytic signal (a sum of Gaussians, or a quadratic bump) with exact derivatives
- `evaluate_jet` - value, gradient and Hessian of a `Potential` at one point
- `find_maxima` / `find_critical_points` - locate the non-degenerate local maxima the spikes sit on
- `verify_hypotheses` - check the structural assumptions on the signal (critical points and boundary slope)

## Spike Algebra
- `theta_max` - the largest Allee threshold for which spikes exist
- `spike_heights` - the tall and short spike heights solving the height quadratic
- `build_pattern` / `evaluate_pattern` - leading order multi-spike steady states
- `balancing_residuals`, `coexistence_branches`, `solve_coexistence` - the two-species balancing system
- `resource_beta`, `ifd_threshold` - resource integrals used by the ideal free distribution analysis

## Stability
- `h_eval` - the reduced balance function and its derivative
- `classify_pattern` - per-site leading eigenvalues and an overall verdict
- `ifd_equilibria_report` - verdicts for the three equilibrium families of the ideal free competition
- `coexistence_stability` - trace/determinant verdict for coexisting spikes

## Simulation
- `Grid` - uniform cell-centered grid on an interval or rectangle
- `ReactionSpec` - the growth law (cubic Allee, resource limited Allee, shared competition)
- `assemble_transport` - exponentially fitted, mass conserving advection-diffusion operator
- `run_transient` / `run_two_species` - implicit-explicit time stepping with steady-state detection
- `linearized_leading_eigen` - leading spectrum of the linearization around a steady state
- `measure_spikes` - heights, offsets and half-widths of spikes in a numerical field

## Experiment Harness
- `parse_config` / `ExperimentConfig` - validated experiment description
- `run_experiment` - run one experiment and write its CSV artifacts

## Parameter Defaults
- `alleepy.defaults` - Default tolerances and resolutions

## Parameter and Response Type Aliases
- `Point` - a location in 1 or 2 dimensions
- `Field` - cell values of a density on a `Grid`
- `Branch` - which root of the height quadratic a site follows
- `Verdict` - the outcome of a stability test
- `ResourceFunction` - a callable resource density `r(x)`
"""

from typing import Callable, Literal

import numpy as np
from numpy import typing as npt

Point = npt.NDArray[np.float64]
""" Type alias for a point, a 1d array holding one coordinate per axis """
Field = npt.NDArray[np.float64]
""" Type alias for cell values on a `Grid`, shaped like `Grid.shape` """
Branch = Literal["tall", "short", "off"]
""" Type alias for one of {"tall", "short", "off"} """
Verdict = Literal["linearly-stable", "unstable", "marginal"]
"""
Type alias for one of {"linearly-stable", "unstable", "marginal"}. Marginal verdicts are returned when the deciding
eigenvalue is within `alleepy.defaults.MARGINAL_TOLERANCE` of zero.
"""
ResourceFunction = Callable[[npt.NDArray[np.float64]], npt.NDArray[np.float64]]
"""
Type alias for a resource density. It receives points shaped `(m, n)` and returns `m` positive values.
"""


from . import defaults
from ._asymptotics import (
    BranchValues,
    CoexistenceRoot,
    HeightPair,
    IfdThreshold,
    ResourceMoments,
    SpikePattern,
    SpikeSite,
    balancing_jacobian,
    balancing_residuals,
    build_pattern,
    coexistence_branches,
    epsilon_star,
    evaluate_pattern,
    ifd_threshold,
    resource_beta,
    resource_moments,
    solve_coexistence,
    spike_heights,
    theta_max,
)
from ._common import AlleepyError, ConfigError, ConfigIssue, ConvergenceError, SolverError
from ._config import ExperimentConfig, parse_config
from ._files import (
    diagnostics_from_file,
    diagnostics_to_file,
    SnapshotTable,
    snapshot_from_file,
    snapshot_to_file,
)
from ._grid import Grid
from ._harness import ComparisonReport, ComparisonRow, ExperimentResult, run_experiment
from ._measure import SpikeMeasurement, measure_spikes
from ._potential import (
    Box,
    CriticalPoint,
    CriticalPointSearch,
    HypothesisReport,
    Jet,
    Potential,
    evaluate_jet,
    find_critical_points,
    find_maxima,
    verify_hypotheses,
)
from ._reaction import ReactionSpec
from ._spectrum import EigenPair, linearized_leading_eigen
from ._stability import (
    CoexistenceVerdict,
    EquilibriumVerdict,
    HValue,
    IfdReport,
    SiteStability,
    StabilityReport,
    classify_pattern,
    coexistence_stability,
    determinant_polynomial,
    h_eval,
    ifd_equilibria_report,
)
from ._timestepping import Diagnostics, Schedule, Snapshot, Trajectory, run_transient, run_two_species
from ._transport import TransportOperator, assemble_transport, bernoulli

__all__ = [
    "defaults",
    "Point",
    "Field",
    "Branch",
    "Verdict",
    "ResourceFunction",
    "AlleepyError",
    "ConfigError",
    "ConfigIssue",
    "ConvergenceError",
    "SolverError",
    "Box",
    "Jet",
    "Potential",
    "CriticalPoint",
    "CriticalPointSearch",
    "HypothesisReport",
    "evaluate_jet",
    "find_critical_points",
    "find_maxima",
    "verify_hypotheses",
    "HeightPair",
    "SpikeSite",
    "SpikePattern",
    "BranchValues",
    "CoexistenceRoot",
    "IfdThreshold",
    "ResourceMoments",
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
    "HValue",
    "SiteStability",
    "StabilityReport",
    "EquilibriumVerdict",
    "IfdReport",
    "CoexistenceVerdict",
    "h_eval",
    "classify_pattern",
    "ifd_equilibria_report",
    "coexistence_stability",
    "determinant_polynomial",
    "Grid",
    "ReactionSpec",
    "TransportOperator",
    "assemble_transport",
    "bernoulli",
    "Schedule",
    "Snapshot",
    "Diagnostics",
    "Trajectory",
    "run_transient",
    "run_two_species",
    "EigenPair",
    "linearized_leading_eigen",
    "SpikeMeasurement",
    "measure_spikes",
    "SnapshotTable",
    "snapshot_to_file",
    "snapshot_from_file",
    "diagnostics_to_file",
    "diagnostics_from_file",
    "ExperimentConfig",
    "parse_config",
    "ComparisonReport",
    "ComparisonRow",
    "ExperimentResult",
    "run_experiment",
]
