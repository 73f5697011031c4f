"""Figure data: K_max surfaces, loss-limit curves and gamma0 curves.

Every value is a direct `analysis` call; this module only lays out the grids. A cell
that has no value (the 0/0 origin of the K_max surfaces, or a curve point without a
usable regime) is None.
"""

import math
from dataclasses import dataclass

import numpy as np

from vopqkd.errors import (
    DegenerateError,
    InvalidArgumentError,
    NoUsableRegimeError,
    RootBracketError,
)
from vopqkd.models import DetectionStrategy
from vopqkd.quantum.channel import length_of_gamma
from vopqkd.services.analysis import (
    DEFAULT_SCAN_STEP,
    DEFAULT_XTOL,
    curve_pair,
    gamma_max,
    gamma_zero,
    kmax_surface,
)
from vopqkd.utils.logging import get_logger

logger = get_logger(__name__)

Cell = float | None


@dataclass(frozen=True)
class SweepTable:
    """Column names and rows of one sweep, in emission order."""

    header: tuple[str, ...]
    rows: list[tuple[Cell, ...]]


def _check_points(points: int) -> None:
    if points < 2:
        raise InvalidArgumentError(f"a sweep needs at least 2 points, got {points}")


def _curve_grid(points: int, lo: float, hi: float) -> list[float]:
    _check_points(points)
    if not 0.0 <= lo < hi <= 1.0:
        raise InvalidArgumentError(f"cos^2(theta1) range [{lo}, {hi}] must lie within [0, 1]")
    return [float(c) for c in np.linspace(lo, hi, points)]


def kmax_grid(strategy: DetectionStrategy, resolution: int) -> SweepTable:
    """K_max over (sin(theta0), sin(theta1)) in [0, 1]^2, sin(theta0) varying slowest."""
    _check_points(resolution)
    axis = np.linspace(0.0, 1.0, resolution)
    thetas = np.arcsin(axis)
    rows: list[tuple[Cell, ...]] = []
    for s0, t0 in zip(axis, thetas):
        for s1, t1 in zip(axis, thetas):
            value: Cell
            try:
                value = kmax_surface(float(t0), float(t1), strategy)
            except DegenerateError:
                value = None
            rows.append((float(s0), float(s1), value))
    return SweepTable(("sin_theta0", "sin_theta1", f"kmax_{strategy.value}"), rows)


def loss_limits(
    cos2_theta0: float,
    alpha: float,
    strategy: DetectionStrategy,
    points: int,
    lo: float,
    hi: float,
    scan_step: float = DEFAULT_SCAN_STEP,
    xtol: float = DEFAULT_XTOL,
) -> SweepTable:
    """(cos^2(theta1), gamma_max, l_max) along the cos^2(theta1) family.

    l_max is infinite where gamma_max is 1.

    Raises:
        InvalidArgumentError: If alpha is not positive or the range is invalid.
    """
    if not (math.isfinite(alpha) and alpha > 0.0):
        raise InvalidArgumentError(f"loss coefficient must be positive, got {alpha}")
    rows: list[tuple[Cell, ...]] = []
    for c in _curve_grid(points, lo, hi):
        psi0, psi1 = curve_pair(cos2_theta0, c)
        try:
            g = gamma_max(psi0, psi1, strategy, scan_step, xtol)
        except (NoUsableRegimeError, RootBracketError) as e:
            logger.warning("No gamma_max on curve", cos2_theta1=c, reason=e.reason)
            rows.append((c, None, None))
            continue
        length = math.inf if g == 1.0 else length_of_gamma(alpha, g)
        rows.append((c, g, length))
    return SweepTable(("cos2_theta1", "gamma_max", "l_max_km"), rows)


def gamma0_curve(cos2_theta0: float, points: int, lo: float, hi: float) -> SweepTable:
    """(cos^2(theta1), gamma0 for PVM, gamma0 for POVM) along the family."""
    rows: list[tuple[Cell, ...]] = []
    for c in _curve_grid(points, lo, hi):
        psi0, psi1 = curve_pair(cos2_theta0, c)
        rows.append(
            (
                c,
                gamma_zero(psi0, psi1, DetectionStrategy.PVM),
                gamma_zero(psi0, psi1, DetectionStrategy.POVM),
            )
        )
    return SweepTable(("cos2_theta1", "gamma0_pvm", "gamma0_povm"), rows)
