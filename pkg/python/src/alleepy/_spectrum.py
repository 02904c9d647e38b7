# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

import logging
from typing import List, NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from . import Field
from . import defaults
from ._common import ConvergenceError, _assert
from ._grid import Grid
from ._potential import Potential
from ._reaction import ReactionSpec
from ._transport import assemble_transport

__ALL__ = ["EigenPair", "linearized_leading_eigen"]

logger = logging.getLogger(__name__)


class EigenPair(NamedTuple):
    eigenvalue: float
    vector: Field
    """ Shaped like the grid, scaled so its largest magnitude entry is `+1` """


def _normalized(vector: np.ndarray, shape) -> Field:
    peak = vector[np.argmax(np.abs(vector))]
    return (vector / peak).reshape(shape)


def _residuals(matrix: sp.spmatrix, values: np.ndarray, vectors: np.ndarray) -> List[float]:
    return [
        float(np.linalg.norm(matrix @ vectors[:, i] - values[i] * vectors[:, i]) / max(1.0, np.linalg.norm(vectors[:, i])))
        for i in range(len(values))
    ]


def linearized_leading_eigen(
    grid: Grid,
    potential: Potential,
    chi: float,
    d: float,
    reaction: ReactionSpec,
    steady: Field,
    count: int = defaults.EIGEN_COUNT,
) -> List[EigenPair]:
    """
    The `count` largest eigenvalues of the linearization `L + diag(f'(steady))` around a steady state.

    Transport is similar to a symmetric matrix through the diagonal scaling by `sqrt(exp(chi A / d))`, and so is the
    linearization. On an interval the symmetric tridiagonal problem is solved directly; on a rectangle shift-invert
    Lanczos runs with a shift above the Gershgorin bound, so the eigenvalues nearest to it are the largest ones.

    ### Parameters
    - **grid**, **potential**, **chi**, **d**: as for `alleepy.run_transient`
    - **reaction**: a single species growth law
    - **steady**: the steady state to linearize around
    - **count**: number of eigenpairs

    ### Returns
    A list of `alleepy.EigenPair` sorted by descending eigenvalue
    """
    _assert(not reaction.two_species, "the linearization is computed for a single species growth law")
    steady = np.asarray(steady, dtype=np.float64).reshape(grid.shape)
    _assert(bool(np.all(np.isfinite(steady))), "steady must be finite")
    _assert(1 <= count < grid.size, "count must be positive and smaller than the number of cells")
    operator = assemble_transport(grid, potential, chi, d)
    symmetric, scale = operator.symmetrized()
    slope = reaction.derivative(steady, reaction.resource_on(grid)).ravel()
    jacobian = (symmetric + sp.diags(slope)).tocsr()

    if grid.dimension == 1:
        values, vectors = eigh_tridiagonal(
            jacobian.diagonal(),
            jacobian.diagonal(1),
            select="i",
            select_range=(grid.size - count, grid.size - 1),
        )
    else:
        absolute = abs(jacobian)
        bound = float(np.max(np.asarray(absolute.sum(axis=1)).ravel() - absolute.diagonal() + jacobian.diagonal()))
        shift = bound + 1.0
        try:
            values, vectors = eigsh(
                jacobian.tocsc(),
                k=count,
                sigma=shift,
                which="LM",
                maxiter=defaults.EIGEN_MAX_ITERATIONS,
                tol=defaults.EIGEN_TOLERANCE,
            )
        except ArpackNoConvergence as error:
            residuals = _residuals(jacobian, error.eigenvalues, error.eigenvectors)
            raise ConvergenceError(
                f"shift-invert Lanczos found {len(error.eigenvalues)} of {count} eigenpairs", residuals
            ) from error
    order = np.argsort(values)[::-1]
    logger.info("leading eigenvalues: %s", ", ".join(f"{values[i]:.6g}" for i in order))
    return [EigenPair(float(values[i]), _normalized(scale.ravel() * vectors[:, i], grid.shape)) for i in order]
