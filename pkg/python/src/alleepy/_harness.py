# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from time import perf_counter
from typing import Dict, List, Literal, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from . import Field, ResourceFunction
from ._asymptotics import (
    SpikePattern,
    build_pattern,
    coexistence_branches,
    evaluate_pattern,
    solve_coexistence,
    spike_heights,
    theta_max,
)
from ._common import AlleepyError, _assert, _verdict_from_eigenvalue
from ._config import ExperimentConfig, make_resource, parse_config, parse_number, parse_template, sweep_points
from ._files import diagnostics_to_file, snapshot_to_file, table_to_file
from ._grid import Grid
from ._measure import basins, measure_spikes
from ._potential import CriticalPoint, Potential, find_maxima, verify_hypotheses
from ._reaction import ReactionSpec
from ._spectrum import EigenPair, linearized_leading_eigen
from ._stability import classify_pattern, coexistence_stability, ifd_equilibria_report
from ._timestepping import Schedule, Trajectory, run_transient, run_two_species

__ALL__ = ["ComparisonRow", "ComparisonReport", "ExperimentResult", "run_experiment"]

logger = logging.getLogger(__name__)

RunState = Literal["complete", "partial", "failed"]


class Timer:
    def __init__(self):
        self._start = -1.0

    @contextmanager
    def time(self, message: str):
        start = perf_counter()
        if self._start == -1:
            self._start = start
        yield
        now = perf_counter()
        logger.info("Operation %s completed in %.3fs, total: %.3fs", message, now - start, now - self._start)


class ComparisonRow(NamedTuple):
    species: str
    site: int
    center: Tuple[float, ...]
    predicted_height: float
    measured_height: float
    height_error: float
    """ Relative; `nan` when the predicted height is zero """
    half_width: float
    """ Measured distance at which the spike falls to `height / e` """
    predicted_eigenvalue: float
    """ Mean-field leading eigenvalue of the predicted spike, scaled by `mu` """
    measured_eigenvalue: float
    """ Largest computed eigenvalue whose eigenvector peaks in this site's basin; `nan` when none does """
    eigenvalue_error: float
    predicted_verdict: str
    observed_verdict: str


class ComparisonReport(NamedTuple):
    """Asymptotic predictions against measurements of a numerical steady state, one row per maximum and species."""

    rows: List[ComparisonRow]

    def to_file(self, report_file: str):
        header = list(ComparisonRow._fields)
        table_to_file(
            report_file,
            header,
            [[" ".join(f"{c:.17g}" for c in row.center) if k == "center" else v for k, v in zip(header, row)] for row in self.rows],
        )


class ExperimentResult(NamedTuple):
    mode: str
    directory: str
    files: List[str]
    """ Written files, relative to `directory` """
    state: RunState
    report: Optional[ComparisonReport]
    summary: Dict[str, object]
    """ Headline numbers, also printed by the command line """


class _Context:
    """Everything a run derives from its config before computing."""

    def __init__(self, config: ExperimentConfig, directory: Path):
        self.config = config
        self.directory = directory
        self.physics = config.physics
        self.potential: Potential = config.potential.to_potential()
        self.n = self.potential.dimension
        self.box = config.domain.box()
        self.maxima: List[CriticalPoint] = find_maxima(self.potential, self.box, config.output.seeds_per_axis)
        _assert(len(self.maxima) > 0, "the potential has no non-degenerate maximum inside the domain")
        self.resource: ResourceFunction = make_resource(self.physics.resource, self.potential)
        self.branches = list(self.physics.branches) or ["tall"] * len(self.maxima)
        _assert(
            len(self.branches) == len(self.maxima),
            f"physics.branches lists {len(self.branches)} branch(es) but the potential has {len(self.maxima)} maxima",
        )
        self.files: List[str] = []
        self.scaled = config.run_mode == "compete" or self.physics.reaction == "logistic-allee"
        """ Spike heights scale with the resource at each maximum """
        self.speed = self.physics.speed if config.run_mode in ("simulate", "eig") else 1.0
        """ Multiplier on `chi` for the single species runs """

    @property
    def grid(self) -> Grid:
        return self.config.domain.grid()

    def plateaus(self, scaled: bool) -> List[float]:
        if not scaled:
            return [1.0] * len(self.maxima)
        return [float(np.asarray(self.resource(m.location[np.newaxis])).reshape(-1)[0]) for m in self.maxima]

    def pattern(self, branches: Sequence[str], scaled: bool, speed: float = 1.0) -> SpikePattern:
        return build_pattern(
            self.maxima, branches, self.physics.chi, self.physics.theta, self.n, self.plateaus(scaled), speed
        )

    def path(self, name: str) -> str:
        self.files.append(name)
        return str(self.directory / name)

    def schedule(self) -> Schedule:
        s = self.config.schedule
        return Schedule(s.t_end, s.snapshots, s.steady_tol, s.dt_max, s.dt_initial)


def evaluate_template(text: str, grid: Grid, context: _Context) -> Field:
    """
    Evaluates an initial condition template on the cell centers of `grid`. Densities are never negative, so the
    result is the positive part of the sum of the terms: a cosine perturbation below zero leaves those cells empty.
    """
    points = grid.centers()
    field = np.zeros(grid.shape)
    for term in parse_template(text):
        if term.name == "pattern":
            field += evaluate_pattern(context.pattern(term.args, context.scaled, context.speed), points)
            continue
        args = [parse_number(a) for a in term.args]
        if term.name == "constant":
            field += args[0]
        elif term.name == "constant-plus-cosine":
            phase = args[3] if len(args) > 3 else 0.0
            field += args[0] + args[1] * np.prod(np.cos(args[2] * points + phase), axis=-1)
        elif term.name == "gaussian-bump":
            center = np.array(args[2:]) if len(args) > 2 else np.zeros(grid.dimension)
            _assert(len(center) == grid.dimension, "gaussian-bump centers need one coordinate per axis")
            field += args[0] * np.exp(-args[1] * np.sum((points - center) ** 2, axis=-1))
        else:
            field += args[0] * np.cos(args[1] * np.sum(points**2, axis=-1))
    return np.maximum(field, 0.0)


def _relative(measured: float, predicted: float) -> float:
    if not np.isfinite(predicted) or predicted == 0:
        return np.nan
    return abs(measured - predicted) / abs(predicted)


def _site_eigenvalues(grid: Grid, maxima: Sequence[CriticalPoint], pairs: Sequence[EigenPair]) -> List[float]:
    owner = basins(grid, [m.location for m in maxima])
    values = [np.nan] * len(maxima)
    for pair in pairs:
        site = int(owner.ravel()[np.argmax(np.abs(pair.vector.ravel()))])
        if not values[site] >= pair.eigenvalue:
            values[site] = pair.eigenvalue
    return values


def _compare(
    species: str,
    context: _Context,
    field: Field,
    pattern: Optional[SpikePattern],
    eigenvalues: Optional[List[float]],
) -> List[ComparisonRow]:
    measurements = measure_spikes(field, context.grid, context.maxima)
    report = classify_pattern(pattern) if pattern is not None else None
    rows = []
    for i, measured in enumerate(measurements):
        predicted_height = pattern.sites[i].height if pattern is not None else np.nan
        site = report.sites[i] if report is not None else None
        predicted_lambda = site.lambda_mean_field * context.physics.mu if site is not None else np.nan
        measured_lambda = eigenvalues[i] if eigenvalues is not None else np.nan
        rows.append(
            ComparisonRow(
                species,
                i,
                tuple(float(c) for c in context.maxima[i].location),
                float(predicted_height),
                measured.height,
                _relative(measured.height, predicted_height),
                measured.half_width,
                float(predicted_lambda),
                float(measured_lambda),
                _relative(measured_lambda, predicted_lambda),
                site.verdict if site is not None else "",
                _verdict_from_eigenvalue(measured_lambda) if np.isfinite(measured_lambda) else "",
            )
        )
    return rows


def _predicted_pattern(context: _Context, scaled: bool, speed: float = 1.0) -> Optional[SpikePattern]:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return context.pattern(context.branches, scaled, speed)
    except ValueError as error:
        logger.warning("no asymptotic prediction: %s", error)
        return None


def _single_species_reaction(context: _Context) -> ReactionSpec:
    physics = context.physics
    if physics.reaction == "cubic-allee":
        return ReactionSpec.cubic_allee(physics.theta, physics.mu)
    return ReactionSpec.logistic_allee(physics.theta, context.resource, physics.mu)


def _write_trajectory(context: _Context, trajectory: Trajectory, other: Optional[Trajectory] = None):
    grid = context.grid
    for index, snapshot in enumerate(trajectory.snapshots):
        v = other.snapshots[index].values if other is not None else None
        snapshot_to_file(context.path(f"snapshot_{index:04d}_t{snapshot.time:.6g}.csv"), grid, snapshot.values, v)
    if other is None:
        diagnostics_to_file(context.path("diagnostics.csv"), trajectory.diagnostics)
    else:
        diagnostics_to_file(context.path("diagnostics_u.csv"), trajectory.diagnostics)
        diagnostics_to_file(context.path("diagnostics_v.csv"), other.diagnostics)


def _analyze(context: _Context) -> Tuple[Optional[ComparisonReport], Dict[str, object]]:
    physics, n = context.physics, context.n
    pair = spike_heights(n, physics.theta)
    summary: Dict[str, object] = {
        "theta_max": theta_max(n),
        "c01": pair.c01,
        "c02": pair.c02,
        "discriminant": pair.discriminant,
        "admissible": pair.admissible,
    }
    hypotheses = verify_hypotheses(context.potential, context.box, max(64, context.config.output.seeds_per_axis))
    summary.update(a2_bound=hypotheses.a2_bound, h1_ok=hypotheses.h1_ok, h2_ok=hypotheses.h2_ok)
    for location, message in hypotheses.violations:
        logger.warning("hypothesis violated at %s: %s", location.tolist(), message)

    rows = []
    pattern = _predicted_pattern(context, context.scaled)
    if pattern is not None:
        report = classify_pattern(pattern)
        summary.update(
            verdict=report.verdict,
            height_0=report.sites[0].height,
            leading_eigenvalue=max(s.lambda_mean_field for s in report.sites) * physics.mu,
        )
        for i, (point, site) in enumerate(zip(context.maxima, report.sites)):
            rows.append(
                [i, " ".join(f"{c:.17g}" for c in point.location), point.value, " ".join(f"{h:.17g}" for h in point.h)]
                + [site.branch, site.height, site.h_prime, site.lambda_leading, site.lambda_mean_field, site.verdict]
            )
    table_to_file(
        context.path("analysis.csv"),
        ["site", "center", "value", "h", "branch", "height", "h_prime", "lambda_leading", "lambda_mean_field", "verdict"],
        rows,
    )

    if physics.speed > 1 and 0 < physics.theta < theta_max(n):
        roots = solve_coexistence(n, physics.speed, physics.theta)
        verdicts = [coexistence_stability(n, physics.speed, physics.theta, root) for root in roots]
        table_to_file(
            context.path("coexistence.csv"),
            ["case", "s1", "s2", "i1", "i2", "trace", "determinant", "det_crosscheck", "verdict"],
            [
                [r.case, r.s1, r.s2, r.residuals[0], r.residuals[1], v.trace, v.determinant, v.det_crosscheck, v.verdict]
                for r, v in zip(roots, verdicts)
            ],
        )
        branches = coexistence_branches(n, physics.speed, physics.theta, 0.0)
        summary.update(coexistence_roots=len(roots), g1_0=float(branches.g1), g3_0=float(branches.g3))

    if physics.resource != "constant(1)" and physics.theta > 0:
        report = ifd_equilibria_report(
            n, physics.theta, context.resource, context.box, context.maxima, physics.chi, context.branches
        )
        table_to_file(
            context.path("ifd.csv"),
            ["equilibrium", "eigenvalue", "verdict", "notes"],
            [
                [e.label, e.eigenvalue, e.verdict, " | ".join(e.notes)]
                for e in (report.zero_resource, report.scaled_resource, report.directed_spikes)
            ],
        )
        summary.update(beta=report.beta, epsilon_star=report.threshold.epsilon_star, psi_eigenvalue=report.psi_eigenvalue)
    return None, summary


def _simulate(context: _Context, eig: bool) -> Tuple[Optional[ComparisonReport], Dict[str, object]]:
    physics, grid = context.physics, context.grid
    chi = physics.chi * physics.speed
    reaction = _single_species_reaction(context)
    initial = evaluate_template(context.config.initial.u, grid, context)
    trajectory = run_transient(grid, context.potential, chi, physics.d, reaction, initial, context.schedule())
    _write_trajectory(context, trajectory)
    final = trajectory.final.values
    summary: Dict[str, object] = {"termination": trajectory.termination, "t_final": trajectory.final.time}

    eigenvalues = None
    if trajectory.termination == "steady" or eig:
        if trajectory.termination != "steady":
            warnings.warn(f"linearizing around a state that is not steady (termination: {trajectory.termination})")
        count = min(max(context.config.output.eigen_count, len(context.maxima)), grid.size - 1)
        pairs = linearized_leading_eigen(grid, context.potential, chi, physics.d, reaction, final, count)
        eigenvalues = _site_eigenvalues(grid, context.maxima, pairs)
        summary["leading_eigenvalue"] = pairs[0].eigenvalue
        if eig:
            table_to_file(context.path("spectrum.csv"), ["index", "eigenvalue"], [[i, p.eigenvalue] for i, p in enumerate(pairs)])
            for i, p in enumerate(pairs):
                snapshot_to_file(context.path(f"eigenvector_{i:02d}.csv"), grid, p.vector)

    pattern = _predicted_pattern(context, context.scaled, context.speed)
    report = ComparisonReport(_compare("u", context, final, pattern, eigenvalues))
    report.to_file(context.path("comparison.csv"))
    for row in report.rows:
        summary[f"height_{row.site}"] = row.measured_height
    return report, summary


def _compete(context: _Context) -> Tuple[Optional[ComparisonReport], Dict[str, object]]:
    physics, grid = context.physics, context.grid
    reaction = ReactionSpec.shared_competition(physics.theta, context.resource, physics.mu)
    chis = (physics.chi, 1.0) if physics.strategy == "ifd" else (physics.chi, physics.speed * physics.chi)
    initials = (
        evaluate_template(context.config.initial.u, grid, context),
        evaluate_template(context.config.initial.v, grid, context),
    )
    u, v = run_two_species(grid, context.potential, chis, physics.d, reaction, initials, context.schedule())
    _write_trajectory(context, u, v)
    initial_v = float(v.diagnostics.mass[0])
    summary: Dict[str, object] = {
        "termination": u.termination,
        "t_final": u.final.time,
        "u_mass": float(u.diagnostics.mass[-1]),
        "v_mass": float(v.diagnostics.mass[-1]),
        "v_mass_ratio": float(v.diagnostics.mass[-1]) / initial_v if initial_v > 0 else np.nan,
    }
    pattern = _predicted_pattern(context, context.scaled)
    rows = _compare("u", context, u.final.values, pattern, None) + _compare("v", context, v.final.values, None, None)
    report = ComparisonReport(rows)
    report.to_file(context.path("comparison.csv"))
    for row in rows:
        summary[f"{row.species}_height_{row.site}"] = row.measured_height
    return report, summary


def _write_manifest(directory: Path, files: Sequence[str], state: RunState):
    with open(directory / "MANIFEST", "w") as fh:
        fh.write(f"state: {state}\n")
        for name in files:
            fh.write(f"{name}\n")


def _run_single(config: ExperimentConfig, directory: Path) -> ExperimentResult:
    directory.mkdir(parents=True, exist_ok=True)
    files: List[str] = []
    timer = Timer()
    try:
        with timer.time("setup"):
            context = _Context(config, directory)
        files = context.files
        with timer.time(config.run_mode):
            if config.run_mode == "analyze":
                report, summary = _analyze(context)
            elif config.run_mode == "compete":
                report, summary = _compete(context)
            else:
                report, summary = _simulate(context, eig=config.run_mode == "eig")
    except Exception:
        _write_manifest(directory, files, "partial" if files else "failed")
        raise
    _write_manifest(directory, files, "complete")
    return ExperimentResult(config.run_mode, str(directory), list(files), "complete", report, summary)


_SUMMARY_KEYS = ("termination", "height_0", "half_width_0", "leading_eigenvalue", "verdict")


def _sweep_job(text: str, mode: str, directory: str) -> Tuple[str, Dict[str, object]]:
    try:
        config = parse_config(text, mode)
        Path(directory).mkdir(parents=True, exist_ok=True)
        with open(Path(directory) / "config.cfg", "w") as fh:
            fh.write(text)
        result = _run_single(config, Path(directory))
    except (AlleepyError, ValueError) as error:
        logger.error("sweep run in %s failed: %s", directory, error)
        return "failed", {"error": str(error)}
    summary = dict(result.summary)
    if result.report is not None and result.report.rows:
        row = result.report.rows[0]
        summary.update(height_0=row.measured_height, half_width_0=row.half_width)
        summary["verdict"] = row.observed_verdict or row.predicted_verdict
    logger.info("sweep run in %s completed", directory)
    return "complete", summary


def _sweep(config: ExperimentConfig, directory: Path, jobs: int) -> ExperimentResult:
    directory.mkdir(parents=True, exist_ok=True)
    points = sweep_points(config)
    texts = []
    for point in points:
        run = config
        for key, value in point:
            run = run.with_parameter(key, value)
        texts.append(run.to_text())
    names = [f"run_{i:03d}" for i in range(len(points))]
    mode = config.sweep.mode
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_job, texts, [mode] * len(texts), [str(directory / n) for n in names]))
    else:
        outcomes = [_sweep_job(t, mode, str(directory / n)) for t, n in zip(texts, names)]

    axes = [key for key, _ in config.sweep.axes]
    rows = []
    for name, point, (state, summary) in zip(names, points, outcomes):
        rows.append(
            [name, state]
            + [value for _, value in point]
            + [summary.get(key, "") if summary.get(key) is not None else "" for key in _SUMMARY_KEYS]
        )
    table_to_file(str(directory / "summary.csv"), ["run", "state"] + axes + list(_SUMMARY_KEYS), rows)
    states = [state for state, _ in outcomes]
    state: RunState = "complete" if all(s == "complete" for s in states) else (
        "failed" if all(s == "failed" for s in states) else "partial"
    )
    files = ["summary.csv"] + [f"{n}/" for n in names]
    _write_manifest(directory, files, state)
    return ExperimentResult("sweep", str(directory), files, state, None, {"runs": len(points), "failed": states.count("failed")})


def run_experiment(config: ExperimentConfig, directory: Optional[str] = None, jobs: int = 1) -> ExperimentResult:
    """
    Runs one experiment and writes its artifacts, ending with a `MANIFEST` that lists every written file and whether
    the run is complete, partial or failed.

    - **analyze**: heights, thresholds, per-site eigenvalue predictions and the hypothesis check (`analysis.csv`,
      plus `coexistence.csv` when `speed > 1` and `ifd.csv` for a non-constant resource)
    - **simulate**: snapshots, `diagnostics.csv` and `comparison.csv`
    - **eig**: as simulate, plus `spectrum.csv` and the leading eigenvectors
    - **compete**: snapshots with both species, `diagnostics_u.csv`, `diagnostics_v.csv` and `comparison.csv`
    - **sweep**: one `run_<k>` directory per parameter combination and `summary.csv`

    ### Parameters
    - **config**: a validated experiment
    - **directory**: output directory; `config.output.directory` by default
    - **jobs**: worker processes for sweeps

    ### Returns
    `alleepy.ExperimentResult`
    """
    _assert(jobs >= 1, "jobs must be at least 1")
    target = Path(directory or config.output.directory)
    logger.info("running %s experiment into %s", config.mode, target)
    if config.mode == "sweep":
        return _sweep(config, target, jobs)
    return _run_single(config, target)
