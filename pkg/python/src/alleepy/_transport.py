# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import logging
from typing import Dict, List, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import LinAlgError, solve_banded
from scipy.sparse.linalg import splu
from scipy.special import exprel

from . import Field
from ._common import SolverError, _assert, _assert_is_nonnegative, _assert_is_positive
from ._grid import Grid
from ._potential import Potential

__ALL__ = ["bernoulli", "TransportOperator", "assemble_transport"]

logger = logging.getLogger(__name__)


def bernoulli(x) -> np.ndarray:
    """`B(x) = x / (exp(x) - 1)`, with `B(0) = 1`. Overflows gracefully to `0` for large positive `x`."""
    with np.errstate(over="ignore"):
        return 1.0 / exprel(np.asarray(x, dtype=np.float64))


def _symmetric_bernoulli(x: np.ndarray) -> np.ndarray:
    # B(x) * exp(x/2) = (x/2) / sinh(x/2), the geometric mean of B(x) and B(-x)
    half = 0.5 * x
    with np.errstate(over="ignore", invalid="ignore"):
        values = half / np.sinh(half)
    return np.where(half == 0.0, 1.0, np.nan_to_num(values, nan=0.0))


class _Faces:
    """Pairs of neighbouring cells `(lo, hi)` along every axis, with their coefficient `d / dx^2` and drift `v`."""

    def __init__(self, grid: Grid, values: np.ndarray, chi: float, d: float):
        index = np.arange(grid.size).reshape(grid.shape)
        lo: List[np.ndarray] = []
        hi: List[np.ndarray] = []
        drift: List[np.ndarray] = []
        weight: List[np.ndarray] = []
        for axis, dx in enumerate(grid.spacing):
            first = [slice(None)] * grid.dimension
            second = [slice(None)] * grid.dimension
            first[axis] = slice(None, -1)
            second[axis] = slice(1, None)
            lo.append(index[tuple(first)].ravel())
            hi.append(index[tuple(second)].ravel())
            drift.append((chi * (values[tuple(second)] - values[tuple(first)]) / d).ravel())
            weight.append(np.full(lo[-1].shape, d / dx**2))
        self.lo = np.concatenate(lo)
        self.hi = np.concatenate(hi)
        self.drift = np.concatenate(drift)
        self.weight = np.concatenate(weight)


class TransportOperator:
    """
    The discrete advection-diffusion operator `L u ~ div(d grad u - chi u grad A)` with no-flux boundaries.

    The net flow into cell `lo` from its neighbour `hi` across their shared face is
    `d / dx * (B(v) u_hi - B(-v) u_lo)` with `v = chi (A_hi - A_lo) / d`. Every column of `L` sums to zero, so mass is
    conserved, and `exp(chi (A - max A) / d)` lies in its kernel. Instances are not thread safe: implicit solves cache
    their factorizations.
    """

    def __init__(self, grid: Grid, potential: Potential, chi: float, d: float):
        grid.validate()
        _assert(grid.dimension == potential.dimension, "grid and potential dimensions differ")
        _assert_is_nonnegative(chi, "chi")
        _assert_is_positive(d, "d")
        values = potential.value(grid.centers())
        _assert(bool(np.all(np.isfinite(values))), "the potential is not finite on every cell")
        self._grid = grid
        self._potential = potential
        self._chi = float(chi)
        self._d = float(d)
        self._values = values
        self._values.setflags(write=False)
        self._faces = _Faces(grid, values, self._chi, self._d)
        forward = self._faces.weight * bernoulli(self._faces.drift)
        backward = self._faces.weight * bernoulli(-self._faces.drift)
        rows = np.concatenate([self._faces.lo, self._faces.hi])
        cols = np.concatenate([self._faces.hi, self._faces.lo])
        entries = np.concatenate([forward, backward])
        self._diagonal = -np.bincount(cols, weights=entries, minlength=grid.size)
        self._matrix = sp.csr_matrix(
            (
                np.concatenate([entries, self._diagonal]),
                (np.concatenate([rows, np.arange(grid.size)]), np.concatenate([cols, np.arange(grid.size)])),
            ),
            shape=(grid.size, grid.size),
        )
        self._upper = forward if grid.dimension == 1 else None
        self._lower = backward if grid.dimension == 1 else None
        self._factorizations: Dict[float, object] = {}

    @property
    def grid(self) -> Grid:
        return self._grid

    @property
    def potential(self) -> Potential:
        return self._potential

    @property
    def chi(self) -> float:
        return self._chi

    @property
    def d(self) -> float:
        return self._d

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    @property
    def potential_values(self) -> Field:
        """`A` at the cell centers."""
        return self._values

    def apply(self, u: Field) -> Field:
        return (self._matrix @ np.asarray(u, dtype=np.float64).ravel()).reshape(self._grid.shape)

    def norm(self) -> float:
        """The max-row-sum norm of `L`."""
        return float(np.max(np.asarray(abs(self._matrix).sum(axis=1)).ravel()))

    def equilibrium(self) -> Field:
        """`exp(chi (A - max A) / d)`, the exact discrete steady state of pure transport."""
        return np.exp(self._chi * (self._values - self._values.max()) / self._d)

    def symmetrized(self) -> Tuple[sp.csr_matrix, Field]:
        """
        The symmetric matrix `S = W^(-1/2) L W^(1/2)`, `W = diag(equilibrium)`, and the scale `W^(1/2)` that maps
        eigenvectors of `S` back to eigenvectors of `L`. Off-diagonal entries are formed in closed form so nothing
        overflows for large `chi`.
        """
        size = self._grid.size
        off = self._faces.weight * _symmetric_bernoulli(self._faces.drift)
        matrix = sp.csr_matrix(
            (
                np.concatenate([off, off, self._diagonal]),
                (
                    np.concatenate([self._faces.lo, self._faces.hi, np.arange(size)]),
                    np.concatenate([self._faces.hi, self._faces.lo, np.arange(size)]),
                ),
            ),
            shape=(size, size),
        )
        scale = np.exp(0.5 * self._chi * (self._values - self._values.max()) / self._d)
        return matrix, scale

    def implicit_step(self, u: Field, dt: float) -> Field:
        """
        Solves `(I - dt L) x = u`. Factorizations on rectangles are cached per `dt`, so callers should draw `dt` from a
        small set of values.
        """
        _assert_is_positive(dt, "dt")
        rhs = np.asarray(u, dtype=np.float64).ravel()
        try:
            if self._grid.dimension == 1:
                banded = np.zeros((3, self._grid.size))
                banded[0, 1:] = -dt * self._upper
                banded[1, :] = 1.0 - dt * self._diagonal
                banded[2, :-1] = -dt * self._lower
                solution = solve_banded((1, 1), banded, rhs)
            else:
                solution = self._factorization(dt).solve(rhs)
        except (LinAlgError, RuntimeError, ValueError) as error:
            raise SolverError(f"implicit transport solve failed at dt={dt:g}: {error}") from error
        if not np.all(np.isfinite(solution)):
            raise SolverError(f"implicit transport solve produced non-finite values at dt={dt:g}")
        return solution.reshape(self._grid.shape)

    def _factorization(self, dt: float):
        if dt not in self._factorizations:
            logger.debug("factorizing I - dt L for dt=%g on %s cells", dt, self._grid.shape)
            system = sp.identity(self._grid.size, format="csc") - dt * self._matrix.tocsc()
            self._factorizations[dt] = splu(system.tocsc())
        return self._factorizations[dt]


def assemble_transport(grid: Grid, potential: Potential, chi: float, d: float = 1.0) -> TransportOperator:
    """
    Builds the exponentially fitted, mass conserving transport operator on `grid`.

    ### Parameters
    - **grid**: the cells
    - **potential**: the signal `A` the population climbs
    - **chi**: effective advection strength, non-negative. `0` gives the standard diffusion stencil.
    - **d**: diffusion rate, positive

    ### Returns
    `alleepy.TransportOperator`
    """
    return TransportOperator(grid, potential, chi, d)
