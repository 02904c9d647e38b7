# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import logging
from typing import List, Literal, NamedTuple, Sequence, Tuple

import numpy as np

from . import Field
from . import defaults
from ._common import SolverError, _assert, _assert_is_nonnegative, _assert_is_positive
from ._grid import Grid
from ._potential import Potential
from ._reaction import ReactionSpec
from ._transport import TransportOperator, assemble_transport

__ALL__ = ["Schedule", "Snapshot", "Diagnostics", "Trajectory", "run_transient", "run_two_species"]

logger = logging.getLogger(__name__)

Termination = Literal["steady", "time-limit", "blow-up"]


class Schedule(NamedTuple):
    t_end: float
    snapshots: Tuple[float, ...] = ()
    """ Requested snapshot times; each is taken at the first accepted step at or after it """
    steady_tol: float = defaults.STEADY_TOLERANCE
    dt_max: float = defaults.DT_MAX
    dt_initial: float = defaults.DT_INITIAL

    def validate(self):
        _assert_is_positive(self.t_end, "t_end")
        _assert_is_positive(self.steady_tol, "steady_tol")
        _assert_is_positive(self.dt_max, "dt_max")
        _assert_is_positive(self.dt_initial, "dt_initial")
        _assert(self.dt_initial <= self.dt_max, "dt_initial must not exceed dt_max")
        for time in self.snapshots:
            _assert_is_nonnegative(time, "snapshot times")


class Snapshot(NamedTuple):
    time: float
    values: Field


class Diagnostics(NamedTuple):
    """One row per accepted step, plus a first row for the initial state with `dt = 0`."""

    t: np.ndarray
    mass: np.ndarray
    umax: np.ndarray
    umin: np.ndarray
    reaction_integral: np.ndarray
    """ Integral of the growth term; it vanishes at a steady state """
    dt: np.ndarray

    @classmethod
    def from_rows(cls, rows: Sequence[Tuple[float, ...]]) -> "Diagnostics":
        columns = np.asarray(rows, dtype=np.float64).reshape(-1, len(cls._fields))
        return cls(*(columns[:, i].copy() for i in range(len(cls._fields))))


class Trajectory(NamedTuple):
    snapshots: List[Snapshot]
    diagnostics: Diagnostics
    termination: Termination

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]


class _Species:
    """Per-species stepping state: its operator, current field and recorded history."""

    def __init__(self, operator: TransportOperator, initial: Field, requests: List[float]):
        self.operator = operator
        self.u = initial
        self.rows: List[Tuple[float, ...]] = []
        self.snapshots: List[Snapshot] = []
        self.requests = list(requests)

    def record(self, grid: Grid, t: float, dt: float, rate: Field):
        self.rows.append((t, grid.integrate(self.u), float(self.u.max()), float(self.u.min()), grid.integrate(rate), dt))
        while self.requests and self.requests[0] <= t * (1 + 1e-12) + 1e-300:
            self.requests.pop(0)
            if not self.snapshots or self.snapshots[-1].time != t:
                self.snapshots.append(Snapshot(t, self.u.copy()))

    def finish(self, t: float, termination: Termination) -> Trajectory:
        if not self.snapshots or self.snapshots[-1].time != t:
            self.snapshots.append(Snapshot(t, self.u.copy()))
        return Trajectory(self.snapshots, Diagnostics.from_rows(self.rows), termination)


def _initial_field(grid: Grid, initial, name: str) -> Field:
    field = np.array(initial, dtype=np.float64).reshape(grid.shape)
    _assert(bool(np.all(np.isfinite(field))), f"{name} must be finite")
    _assert(
        float(field.min()) >= -defaults.NEGATIVE_CLIP,
        f"{name} must be non-negative (values down to -{defaults.NEGATIVE_CLIP:g} are clipped)",
    )
    return np.maximum(field, 0.0)


def _level(schedule: Schedule, dt: float) -> int:
    # smallest k with dt_max / 2**k <= dt
    return max(0, int(np.ceil(np.log2(schedule.dt_max / dt) - 1e-12)))


def _advance(
    grid: Grid,
    reaction: ReactionSpec,
    resource: Field,
    species: List[_Species],
    schedule: Schedule,
) -> Tuple[float, Termination]:
    """Steps every species together until steady, blow-up or `t_end`."""

    def rates() -> List[Field]:
        if len(species) == 1:
            return [reaction.rate(species[0].u, resource)]
        u, v = species[0].u, species[1].u
        return [reaction.rate(u, resource, v), reaction.rate(v, resource, u)]

    def stiffness() -> float:
        if len(species) == 1:
            return float(np.max(np.abs(reaction.derivative(species[0].u, resource))))
        u, v = species[0].u, species[1].u
        return max(
            float(np.max(np.abs(reaction.derivative(u, resource, v)) + np.abs(reaction.cross_derivative(u, resource, v)))),
            float(np.max(np.abs(reaction.derivative(v, resource, u)) + np.abs(reaction.cross_derivative(v, resource, u)))),
        )

    t = 0.0
    current = rates()
    for s, rate in zip(species, current):
        s.record(grid, t, 0.0, rate)
    blow_up = defaults.BLOW_UP_FACTOR * max(1.0, max(float(s.u.max()) for s in species))
    level = _level(schedule, schedule.dt_initial)
    finish_line = schedule.t_end * (1 - 1e-12)

    while t < finish_line:
        fastest = stiffness()
        if fastest > 0:
            level = max(level, _level(schedule, defaults.REACTION_STEP_FACTOR / fastest))
        while t + schedule.dt_max / 2**level > schedule.t_end * (1 + 1e-12):
            level += 1
        halvings = 0
        while True:
            dt = schedule.dt_max / 2**level
            proposals = [s.operator.implicit_step(s.u + dt * rate, dt) for s, rate in zip(species, current)]
            lowest = min(float(p.min()) for p in proposals)
            if lowest >= -defaults.NEGATIVE_CLIP:
                break
            halvings += 1
            if halvings > defaults.MAX_STEP_HALVINGS:
                raise SolverError(f"densities stayed negative ({lowest:.3g}) after {halvings - 1} step halvings at t={t:g}")
            logger.warning("negative density %.3g at t=%g; halving the step to %g", lowest, t, dt / 2)
            level += 1

        change = 0.0
        for s, proposal in zip(species, proposals):
            proposal = np.maximum(proposal, 0.0)
            change = max(change, float(np.max(np.abs(proposal - s.u))) / dt)
            s.u = proposal
        t += dt
        current = rates()
        for s, rate in zip(species, current):
            s.record(grid, t, dt, rate)
        logger.debug("t=%g dt=%g change=%.3g", t, dt, change)

        peak = max(float(s.u.max()) for s in species)
        if peak > blow_up:
            logger.warning("blow-up at t=%g: maximum density %.6g exceeds %.6g", t, peak, blow_up)
            return t, "blow-up"
        if change < schedule.steady_tol:
            logger.info("steady state reached at t=%g", t)
            return t, "steady"
        level = max(level - 1, 0)

    logger.info("time limit t_end=%g reached", schedule.t_end)
    return t, "time-limit"


def run_transient(
    grid: Grid,
    potential: Potential,
    chi: float,
    d: float,
    reaction: ReactionSpec,
    initial: Field,
    schedule: Schedule,
) -> Trajectory:
    """
    Integrates one species: implicit backward Euler on transport, explicit Euler on growth.

    The step doubles after every accepted step, up to `schedule.dt_max` and to `REACTION_STEP_FACTOR / max|f'(u)|`;
    steps are always `dt_max / 2**k` so factorizations are reused. A step that drives densities below
    `-NEGATIVE_CLIP` is retried with half the step.

    ### Parameters
    - **grid**: the cells
    - **potential**: the signal `A`
    - **chi**: effective advection strength
    - **d**: diffusion rate
    - **reaction**: a single species growth law
    - **initial**: the initial field, shaped like the grid
    - **schedule**: end time, snapshot times and step controls

    ### Returns
    `alleepy.Trajectory`. Blow-up is a termination reason, not an error.
    """
    _assert(not reaction.two_species, "run_transient takes a single species growth law; use run_two_species")
    reaction.validate()
    schedule.validate()
    field = _initial_field(grid, initial, "initial")
    operator = assemble_transport(grid, potential, chi, d)
    resource = reaction.resource_on(grid)
    requests = sorted(t for t in schedule.snapshots if t <= schedule.t_end)
    species = _Species(operator, field, requests)
    logger.info("running %s on %s cells with chi=%g until t=%g", reaction.variant, grid.shape, chi, schedule.t_end)
    t, termination = _advance(grid, reaction, resource, [species], schedule)
    return species.finish(t, termination)


def run_two_species(
    grid: Grid,
    potential: Potential,
    chis: Tuple[float, float],
    d: float,
    reaction: ReactionSpec,
    initials: Tuple[Field, Field],
    schedule: Schedule,
) -> Tuple[Trajectory, Trajectory]:
    """
    Integrates two competing species that share one growth law, both climbing the same signal at their own rates.

    Ideal free competition uses `chis = (chi, 1)` with `A = ln r`; two directed species use `chis = (chi, c chi)`.

    ### Parameters
    - **grid**: the cells
    - **potential**: the signal `A`
    - **chis**: advection strengths of `u` and `v`
    - **d**: diffusion rate of both species
    - **reaction**: the shared-competition growth law
    - **initials**: initial `u` and `v`
    - **schedule**: end time, snapshot times and step controls

    ### Returns
    One `alleepy.Trajectory` per species, with a common termination reason.
    """
    _assert(reaction.two_species, "run_two_species requires the shared-competition growth law")
    _assert(len(chis) == 2 and len(initials) == 2, "chis and initials must both be pairs")
    reaction.validate()
    schedule.validate()
    requests = sorted(t for t in schedule.snapshots if t <= schedule.t_end)
    resource = reaction.resource_on(grid)
    species = [
        _Species(assemble_transport(grid, potential, chi, d), _initial_field(grid, initial, name), requests)
        for chi, initial, name in zip(chis, initials, ("u", "v"))
    ]
    logger.info("running two species on %s cells with chi=%s until t=%g", grid.shape, tuple(chis), schedule.t_end)
    t, termination = _advance(grid, reaction, resource, species, schedule)
    return species[0].finish(t, termination), species[1].finish(t, termination)
