#!/usr/bin/env python3
"""
Smoothing module for the CATS bandit tool.
Closed-form density, sampling and smoothed-loss arithmetic for the
boundary-clipped uniform smoothing operator over the action space [0, 1].
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from sklearn.utils import check_scalar

MAX_BANDWIDTH = 0.5


@dataclass(frozen=True)
class SupportInterval:
    """Clipped support [center - h, center + h] ∩ [0, 1]."""

    lo: float
    hi: float

    @property
    def length(self) -> float:
        return self.hi - self.lo


def _check_unit(value: float, name: str) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must be in [0, 1], got {value}")


@dataclass(frozen=True)
class SmoothingKernel:
    """
    Uniform smoothing kernel with half-width ``h``.

    The smoothed action around ``a`` is uniform on ``[a - h, a + h] ∩ [0, 1]``;
    ``h = 0`` is the point mass at ``a``.

    Args:
        h: bandwidth in [0, 1/2]
    """

    h: float

    def __post_init__(self) -> None:
        check_scalar(
            self.h,
            name="h",
            target_type=(int, float, np.floating),
            min_val=0.0,
            max_val=MAX_BANDWIDTH,
        )

    @property
    def is_point_mass(self) -> bool:
        return self.h == 0

    def support(self, center: float) -> SupportInterval:
        """Return the clipped support of the kernel around ``center``."""
        _check_unit(center, "center")
        return SupportInterval(max(center - self.h, 0.0), min(center + self.h, 1.0))

    def density(self, center: float, query: float) -> float:
        """
        Density of the kernel around ``center`` at ``query`` w.r.t. Lebesgue measure on [0, 1].

        Raises:
            ValueError: if ``h == 0`` (no density exists) or an argument lies outside [0, 1]
        """
        if self.is_point_mass:
            raise ValueError("density is undefined for h = 0; use the point-mass branch")
        _check_unit(query, "query")
        interval = self.support(center)
        if abs(query - center) > self.h:
            return 0.0
        return 1.0 / interval.length

    def sample(self, center: float, rng: np.random.Generator) -> float:
        """Draw an action from the kernel around ``center``; returns ``center`` when h = 0."""
        if self.is_point_mass:
            _check_unit(center, "center")
            return center
        interval = self.support(center)
        return float(rng.uniform(interval.lo, interval.hi))

    def smoothed_loss(
        self,
        loss: Callable[[float], float],
        a: float,
        quadrature_points: int = 256,
    ) -> float:
        """
        Midpoint-rule approximation of the expected ``loss`` of an action drawn around ``a``.

        The rule is exact for losses that are linear between quadrature cell
        boundaries; for ``|a' - y|`` choose ``quadrature_points`` so that ``y``
        falls on a cell boundary.
        """
        if self.is_point_mass:
            _check_unit(a, "a")
            return float(loss(a))
        check_scalar(quadrature_points, name="quadrature_points", target_type=int, min_val=2)
        interval = self.support(a)
        width = interval.length / quadrature_points
        midpoints = interval.lo + width * (np.arange(quadrature_points) + 0.5)
        return float(np.mean([loss(float(u)) for u in midpoints]))
