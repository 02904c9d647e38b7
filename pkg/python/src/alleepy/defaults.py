# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

"""
# Parameter Defaults
Tolerances, resolutions and step controls shared by the library, the harness and the command line.
"""

NEWTON_TOLERANCE = 1e-12
"""
Critical points are accepted when the gradient norm is at most this value times `max(1, |Hessian|)`, so that steep
signals are not held to an unreachable absolute bound.
"""
MERGE_TOLERANCE = 1e-8
""" Critical points closer than this are treated as the same point. """
DEGENERACY_TOLERANCE = 1e-8
""" A critical point with any Hessian eigenvalue smaller than this in magnitude is degenerate. """
SEEDS_PER_AXIS = 64
""" Number of gradient samples per axis used to seed the critical point search. """
MIN_SEEDS_PER_AXIS = 8
""" Smallest accepted `seeds_per_axis`. """
HYPOTHESIS_SAMPLES = 64
""" Samples per axis used when checking the structural hypotheses on the signal. Also the smallest accepted value. """
NEWTON_MAX_ITERATIONS = 100
""" Damped Newton iterations allowed per seed. """
SEPARATION_STANDARD_DEVIATIONS = 6.0
""" Active spikes closer than this many standard deviations of the wider spike are flagged. """

COEXISTENCE_SCAN_POINTS = 4096
""" Number of S2 samples scanned for sign changes of the branch differences. """
BISECTION_TOLERANCE = 1e-12
""" Bracket width at which coexistence roots stop being refined. """
COEXISTENCE_FAMILY_SAMPLES = 64
""" Samples returned per line of the one-parameter root family at speed ratio 1. """
QUADRATURE_NODES = 10_000
""" Composite Gauss-Legendre nodes per axis for resource integrals. """
QUADRATURE_PANEL_ORDER = 8
""" Gauss-Legendre nodes per panel. """

MARGINAL_TOLERANCE = 1e-10
""" Eigenvalues within this distance of zero produce a "marginal" verdict. """

CELLS_1D = 4096
""" Default cell count on an interval. """
CELLS_2D = 256
""" Default cell count per axis on a rectangle. """
MIN_CELLS = 16
""" Smallest accepted cell count per axis. """
STEADY_TOLERANCE = 1e-9
""" A run is steady once `max|u(t+dt) - u(t)| / dt` drops below this value. """
DT_MAX = 0.1
""" Largest time step. Steps are always `DT_MAX / 2**k` so implicit factorizations can be reused. """
DT_INITIAL = 1e-3
""" First time step, before the reaction stiffness bound takes over. """
REACTION_STEP_FACTOR = 0.5
""" The time step never exceeds this factor over `max|f'(u)|`. """
MAX_STEP_HALVINGS = 40
""" Rejected steps are retried with half the step this many times before the run is abandoned. """
NEGATIVE_CLIP = 1e-10
""" Densities in `[-NEGATIVE_CLIP, 0)` are clipped to zero; anything lower rejects the step. """
BLOW_UP_FACTOR = 1e3
""" A run blows up once its maximum exceeds this factor times `max(1, initial maximum)`. """
OFF_HEIGHT = 1e-6
""" Measured spikes lower than this are reported as off. """

EIGEN_COUNT = 4
""" Number of leading eigenvalues computed by default. """
EIGEN_MAX_ITERATIONS = 10_000
""" Iteration cap for the shift-invert Lanczos solver used on rectangles. """
EIGEN_TOLERANCE = 1e-12
""" Relative accuracy requested from the Lanczos solver. """
