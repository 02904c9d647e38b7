# Copyright (c) alleepy contributors. All rights reserved.
# Licensed under the MIT license.

from typing import Literal, NamedTuple, Optional

import numpy as np

from . import Field, ResourceFunction
from ._common import _assert, _assert_is_nonnegative
from ._grid import Grid

__ALL__ = ["ReactionSpec"]

ReactionVariant = Literal["cubic-allee", "logistic-allee", "shared-competition"]


class ReactionSpec(NamedTuple):
    """
    A growth law with a strong Allee effect.

    - **cubic-allee**: `mu * u * (1 - u) * (u - theta)`
    - **logistic-allee**: `mu * u * (u - theta) * (r(x) - u)`
    - **shared-competition**: `mu * u * (u + v - theta) * (r(x) - u - v)` for `u`, and symmetrically for `v`

    `resource` is `None` for `r = 1`.
    """

    variant: ReactionVariant
    theta: float
    mu: float = 1.0
    resource: Optional[ResourceFunction] = None

    @classmethod
    def cubic_allee(cls, theta: float, mu: float = 1.0) -> "ReactionSpec":
        spec = cls("cubic-allee", float(theta), float(mu))
        spec.validate()
        return spec

    @classmethod
    def logistic_allee(cls, theta: float, resource: Optional[ResourceFunction] = None, mu: float = 1.0) -> "ReactionSpec":
        spec = cls("logistic-allee", float(theta), float(mu), resource)
        spec.validate()
        return spec

    @classmethod
    def shared_competition(
        cls, theta: float, resource: Optional[ResourceFunction] = None, mu: float = 1.0
    ) -> "ReactionSpec":
        spec = cls("shared-competition", float(theta), float(mu), resource)
        spec.validate()
        return spec

    @property
    def two_species(self) -> bool:
        return self.variant == "shared-competition"

    def validate(self):
        _assert(
            self.variant in ("cubic-allee", "logistic-allee", "shared-competition"),
            "variant must be one of 'cubic-allee', 'logistic-allee' or 'shared-competition'",
        )
        _assert_is_nonnegative(self.mu, "mu")
        _assert_is_nonnegative(self.theta, "theta")
        if self.variant == "cubic-allee":
            _assert(self.theta < 1, "theta must be in [0, 1) for the cubic Allee law")
            _assert(self.resource is None, "the cubic Allee law takes no resource")

    def resource_on(self, grid: Grid) -> Field:
        """`r` at every cell center, checked positive."""
        if self.resource is None:
            return np.ones(grid.shape)
        values = np.asarray(self.resource(grid.centers().reshape(-1, grid.dimension)), dtype=np.float64)
        _assert(values.size == grid.size, "the resource must return one value per cell")
        _assert(bool(np.all(np.isfinite(values) & (values > 0))), "the resource must be positive on the grid")
        return values.reshape(grid.shape)

    def rate(self, u: Field, r: Field, other: Optional[Field] = None) -> Field:
        """Growth of `u`; `other` is the competing density for the shared law."""
        if self.variant == "cubic-allee":
            return self.mu * u * (1.0 - u) * (u - self.theta)
        if self.variant == "logistic-allee":
            return self.mu * u * (u - self.theta) * (r - u)
        total = u + (0.0 if other is None else other)
        return self.mu * u * (total - self.theta) * (r - total)

    def derivative(self, u: Field, r: Field, other: Optional[Field] = None) -> Field:
        """`d rate / du` at fixed `other`."""
        if self.variant == "cubic-allee":
            return self.mu * (-3.0 * u**2 + 2.0 * (1.0 + self.theta) * u - self.theta)
        if self.variant == "logistic-allee":
            return self.mu * (-3.0 * u**2 + 2.0 * (r + self.theta) * u - self.theta * r)
        total = u + (0.0 if other is None else other)
        shared = (total - self.theta) * (r - total)
        return self.mu * (shared + u * (r + self.theta - 2.0 * total))

    def cross_derivative(self, u: Field, r: Field, other: Field) -> Field:
        """`d rate / d other` for the shared law, zero otherwise."""
        if not self.two_species:
            return np.zeros_like(u)
        total = u + other
        return self.mu * u * (r + self.theta - 2.0 * total)
